// finvision command-line interface. All engine work happens behind the C API
// in libfinvision; this binary only parses arguments and maps statuses to
// exit codes (config=2, data=3, gateway=4).

#include <finvision/finvision.h>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <nlohmann/json.hpp>

namespace {

int exit_code_of(fv_status status) {
    switch (status) {
        case FV_OK: return 0;
        case FV_ERR_CONFIG: return 2;
        case FV_ERR_DATA: return 3;
        case FV_ERR_GATEWAY: return 4;
        case FV_ERR_INVALID: return 2;
        case FV_ERR_INTERNAL: return 1;
    }
    return 1;
}

int finish(fv_status status) {
    if (status != FV_OK) {
        std::cerr << "error: " << fv_last_error() << "\n";
    }
    return exit_code_of(status);
}

struct EngineHandle {
    fv_engine* engine = nullptr;
    ~EngineHandle() { fv_engine_destroy(engine); }
};

std::string output_override(const std::string& output_dir) {
    if (output_dir.empty()) return {};
    nlohmann::json patch;
    patch["output_dir"] = std::filesystem::absolute(output_dir).string();
    return patch.dump();
}

// The cache directory comes from --dir when given, otherwise from the config.
std::string resolve_cache_dir(const std::string& dir, const std::string& config_path) {
    if (!dir.empty()) return dir;
    if (config_path.empty()) return {};
    std::ifstream in(config_path);
    if (!in) return {};
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return {};
    std::string cache = doc.value("cache_dir", "cache");
    std::filesystem::path p(cache);
    if (p.is_absolute()) return p.string();
    return (std::filesystem::absolute(config_path).parent_path() / p).string();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"finvision — multi-agent LLM trading backtests"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(fv_version()));

    std::string config_path, output_dir, strategy, date, cache_dir;
    bool resume = false;

    auto* run = app.add_subcommand("run", "Run the agent backtest and write report files");
    run->add_option("--config", config_path, "JSON config file")->required();
    run->add_flag("--resume", resume, "Continue from the checkpoint in the output directory");
    run->add_option("--output", output_dir, "Override the configured output directory");

    auto* baseline = app.add_subcommand("baseline", "Run a rule-based baseline strategy");
    baseline->add_option("--config", config_path, "JSON config file")->required();
    baseline->add_option("--strategy", strategy, "bh | macd | kdj-rsi")->required();
    baseline->add_option("--output", output_dir, "Override the configured output directory");

    auto* render = app.add_subcommand("render", "Render the agent-facing charts for one day");
    render->add_option("--config", config_path, "JSON config file")->required();
    render->add_option("--date", date, "Trading day, YYYY-MM-DD")->required();
    render->add_option("--output", output_dir, "Override the configured output directory");

    auto* cache = app.add_subcommand("cache", "Inspect or clear the response cache");
    cache->require_subcommand(1);
    auto* stats = cache->add_subcommand("stats", "Print entry count and total bytes");
    auto* clear = cache->add_subcommand("clear", "Remove all cache entries");
    for (auto* sub : {stats, clear}) {
        sub->add_option("--config", config_path, "JSON config file with cache_dir");
        sub->add_option("--dir", cache_dir, "Cache directory (overrides the config)");
    }

    CLI11_PARSE(app, argc, argv);

    if (cache->parsed()) {
        std::string dir = resolve_cache_dir(cache_dir, config_path);
        if (dir.empty()) {
            std::cerr << "error: cache needs --dir or --config\n";
            return 2;
        }
        if (stats->parsed()) {
            uint64_t entries = 0, bytes = 0;
            fv_status status = fv_cache_stats(dir.c_str(), &entries, &bytes);
            if (status != FV_OK) return finish(status);
            std::cout << entries << " entries, " << bytes << " bytes\n";
            return 0;
        }
        return finish(fv_cache_clear(dir.c_str()));
    }

    EngineHandle handle;
    std::string overrides = output_override(output_dir);
    fv_status status = fv_engine_create(config_path.c_str(),
                                        overrides.empty() ? nullptr : overrides.c_str(),
                                        &handle.engine);
    if (status != FV_OK) return finish(status);

    if (run->parsed()) {
        return finish(fv_engine_run(handle.engine, resume ? 1 : 0));
    }
    if (baseline->parsed()) {
        return finish(fv_engine_run_baseline(handle.engine, strategy.c_str()));
    }
    if (render->parsed()) {
        return finish(fv_engine_render_charts(handle.engine, date.c_str()));
    }
    return 2;
}
