#include "core/config.hpp"

#include "core/errors.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>

namespace finvision::app {
namespace {

Date parse_date_field(const nlohmann::json& obj, const char* outer, const char* key) {
    if (!obj.contains(key) || !obj[key].is_string()) {
        throw Error::config(std::string("config: ") + outer + "." + key +
                            " must be an ISO date string");
    }
    Date d;
    if (!Date::try_parse(obj[key].get<std::string>(), d)) {
        throw Error::config(std::string("config: bad date in ") + outer + "." + key + ": '" +
                            obj[key].get<std::string>() + "'");
    }
    return d;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_absolute() || p.empty()) return path;
    return base / path;
}

template <typename T>
T get_or(const nlohmann::json& obj, const char* key, T fallback) {
    if (!obj.contains(key) || obj[key].is_null()) return fallback;
    try {
        return obj[key].get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error::config(std::string("config: field '") + key + "' has the wrong type");
    }
}

} // namespace

void CliConfig::validate() const {
    run.validate();
    if (backend.kind != "http" && backend.kind != "scripted" && backend.kind != "cached-http" &&
        backend.kind != "cached-scripted") {
        throw Error::config("config: backend.kind must be one of "
                            "http | scripted | cached-http | cached-scripted, got '" +
                            backend.kind + "'");
    }
    if ((backend.kind == "scripted" || backend.kind == "cached-scripted") &&
        backend.script_path.empty()) {
        throw Error::config("config: scripted backend needs backend.script_path");
    }
    if (output_dir.empty()) throw Error::config("config: output_dir must be set");
}

CliConfig load_config(const std::filesystem::path& path, const std::string& overrides_json) {
    std::ifstream in(path);
    if (!in) throw Error::config("cannot open config file: " + path.string());
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw Error::config("config file is not a JSON object: " + path.string());
    }
    if (!overrides_json.empty()) {
        nlohmann::json patch = nlohmann::json::parse(overrides_json, nullptr, false);
        if (patch.is_discarded() || !patch.is_object()) {
            throw Error::config("config overrides must be a JSON object");
        }
        doc.merge_patch(patch);
    }

    const auto base = std::filesystem::absolute(path).parent_path();
    CliConfig cfg;

    cfg.run.ticker = get_or<std::string>(doc, "ticker", "");
    cfg.run.bars_path = resolve(base, get_or<std::string>(doc, "bars_path", ""));
    cfg.run.news_path = resolve(base, get_or<std::string>(doc, "news_path", ""));
    if (!doc.contains("warmup") || !doc.contains("test")) {
        throw Error::config("config: warmup and test windows are required");
    }
    cfg.run.warmup_start = parse_date_field(doc["warmup"], "warmup", "start");
    cfg.run.warmup_end = parse_date_field(doc["warmup"], "warmup", "end");
    cfg.run.test_start = parse_date_field(doc["test"], "test", "start");
    cfg.run.test_end = parse_date_field(doc["test"], "test", "end");
    cfg.run.initial_capital = get_or<double>(doc, "initial_capital", 10000.0);

    if (doc.contains("windows") && doc["windows"].is_object()) {
        const auto& w = doc["windows"];
        cfg.run.windows.chart = get_or<int>(w, "chart", 60);
        cfg.run.windows.signal = get_or<int>(w, "signal", 30);
        cfg.run.windows.reflection_short = get_or<int>(w, "reflection_short", 7);
        cfg.run.windows.reflection_medium = get_or<int>(w, "reflection_medium", 30);
    }
    if (doc.contains("indicators") && doc["indicators"].is_object()) {
        const auto& p = doc["indicators"];
        auto& ind = cfg.run.indicators;
        ind.sma_short = get_or<int>(p, "sma_short", 10);
        ind.sma_long = get_or<int>(p, "sma_long", 50);
        ind.rsi_period = get_or<int>(p, "rsi_period", 14);
        ind.bb_period = get_or<int>(p, "bb_period", 20);
        ind.bb_stddev = get_or<double>(p, "bb_stddev", 2.0);
        ind.macd_fast = get_or<int>(p, "macd_fast", 12);
        ind.macd_slow = get_or<int>(p, "macd_slow", 26);
        ind.macd_signal = get_or<int>(p, "macd_signal", 9);
        ind.kdj_period = get_or<int>(p, "kdj_period", 9);
        ind.kdj_k_smooth = get_or<int>(p, "kdj_k_smooth", 3);
        ind.kdj_d_smooth = get_or<int>(p, "kdj_d_smooth", 3);
    }
    cfg.run.annual_trading_days = get_or<int>(doc, "annual_trading_days", 252);
    cfg.run.risk_free_rate = get_or<double>(doc, "risk_free_rate", 0.0);
    if (doc.contains("sharpe_annualization") && !doc["sharpe_annualization"].is_null()) {
        cfg.run.sharpe_annualization = doc["sharpe_annualization"].get<double>();
    }
    cfg.run.use_adjusted_close = get_or<bool>(doc, "use_adjusted_close", false);
    cfg.run.news_lookback_days = get_or<int>(doc, "news_lookback_days", 1);
    cfg.run.reward_as_percent = get_or<bool>(doc, "reward_as_percent", false);
    cfg.run.carry_warmup_portfolio = get_or<bool>(doc, "carry_warmup_portfolio", false);
    cfg.run.parallel_agents = get_or<bool>(doc, "parallel_agents", false);

    if (doc.contains("backend") && doc["backend"].is_object()) {
        const auto& b = doc["backend"];
        cfg.backend.kind = get_or<std::string>(b, "kind", "http");
        cfg.backend.base_url = get_or<std::string>(b, "base_url", cfg.backend.base_url);
        cfg.backend.script_path = resolve(base, get_or<std::string>(b, "script_path", ""));
        cfg.backend.timeout_seconds = get_or<int>(b, "timeout_seconds", 120);
        cfg.backend.max_retries = get_or<int>(b, "max_retries", 3);
        cfg.backend.retry_base_ms = get_or<int>(b, "retry_base_ms", 1000);
        cfg.backend.max_concurrent = get_or<int>(b, "max_concurrent", 4);
    }

    if (doc.contains("models") && doc["models"].is_object()) {
        for (auto role : agents::kAllRoles) {
            auto name = agents::role_name(role);
            if (doc["models"].contains(name)) {
                cfg.roles[role].model = doc["models"][name].get<std::string>();
            }
        }
    }
    if (doc.contains("temperatures") && doc["temperatures"].is_object()) {
        for (auto role : agents::kAllRoles) {
            auto name = agents::role_name(role);
            if (doc["temperatures"].contains(name)) {
                cfg.roles[role].temperature = doc["temperatures"][name].get<double>();
            }
        }
    }

    cfg.output_dir = resolve(base, get_or<std::string>(doc, "output_dir", "out"));
    cfg.cache_dir = resolve(base, get_or<std::string>(doc, "cache_dir", "cache"));
    cfg.prompt_dir = resolve(base, get_or<std::string>(doc, "prompt_dir", ""));
    cfg.emit_charts = get_or<bool>(doc, "emit_charts", true);
    cfg.log_level = get_or<std::string>(doc, "log_level", "info");

    cfg.validate();
    return cfg;
}

nlohmann::ordered_json resolved_json(const CliConfig& cfg) {
    nlohmann::ordered_json out;
    out["schema_version"] = 1;
    out["ticker"] = cfg.run.ticker;
    out["bars_path"] = cfg.run.bars_path.string();
    out["news_path"] = cfg.run.news_path.string();
    out["warmup"] = {{"start", cfg.run.warmup_start.to_string()},
                     {"end", cfg.run.warmup_end.to_string()}};
    out["test"] = {{"start", cfg.run.test_start.to_string()},
                   {"end", cfg.run.test_end.to_string()}};
    out["initial_capital"] = cfg.run.initial_capital;
    out["windows"] = {{"chart", cfg.run.windows.chart},
                      {"signal", cfg.run.windows.signal},
                      {"reflection_short", cfg.run.windows.reflection_short},
                      {"reflection_medium", cfg.run.windows.reflection_medium}};
    const auto& ind = cfg.run.indicators;
    out["indicators"] = {{"sma_short", ind.sma_short},     {"sma_long", ind.sma_long},
                         {"rsi_period", ind.rsi_period},   {"bb_period", ind.bb_period},
                         {"bb_stddev", ind.bb_stddev},     {"macd_fast", ind.macd_fast},
                         {"macd_slow", ind.macd_slow},     {"macd_signal", ind.macd_signal},
                         {"kdj_period", ind.kdj_period},   {"kdj_k_smooth", ind.kdj_k_smooth},
                         {"kdj_d_smooth", ind.kdj_d_smooth}};
    out["annual_trading_days"] = cfg.run.annual_trading_days;
    out["risk_free_rate"] = cfg.run.risk_free_rate;
    if (cfg.run.sharpe_annualization) {
        out["sharpe_annualization"] = *cfg.run.sharpe_annualization;
    } else {
        out["sharpe_annualization"] = nullptr;
    }
    out["use_adjusted_close"] = cfg.run.use_adjusted_close;
    out["news_lookback_days"] = cfg.run.news_lookback_days;
    out["reward_as_percent"] = cfg.run.reward_as_percent;
    out["carry_warmup_portfolio"] = cfg.run.carry_warmup_portfolio;
    out["parallel_agents"] = cfg.run.parallel_agents;
    out["backend"] = {{"kind", cfg.backend.kind},
                      {"base_url", cfg.backend.base_url},
                      {"script_path", cfg.backend.script_path.string()},
                      {"timeout_seconds", cfg.backend.timeout_seconds},
                      {"max_retries", cfg.backend.max_retries},
                      {"retry_base_ms", cfg.backend.retry_base_ms},
                      {"max_concurrent", cfg.backend.max_concurrent}};
    nlohmann::ordered_json models, temperatures;
    for (auto role : agents::kAllRoles) {
        models[agents::role_name(role)] = cfg.roles.at(role).model;
        temperatures[agents::role_name(role)] = cfg.roles.at(role).temperature;
    }
    out["models"] = std::move(models);
    out["temperatures"] = std::move(temperatures);
    out["output_dir"] = cfg.output_dir.string();
    out["cache_dir"] = cfg.cache_dir.string();
    out["prompt_dir"] = cfg.prompt_dir.string();
    out["emit_charts"] = cfg.emit_charts;
    out["log_level"] = cfg.log_level;
    return out;
}

std::shared_ptr<llm::ChatBackend> make_backend(const CliConfig& cfg) {
    auto make_http = [&]() -> std::shared_ptr<llm::ChatBackend> {
        llm::HttpOptions options;
        options.base_url = cfg.backend.base_url;
        if (const char* key = std::getenv("FINVISION_API_KEY")) options.api_key = key;
        options.timeout_seconds = cfg.backend.timeout_seconds;
        options.max_retries = cfg.backend.max_retries;
        options.retry_base_ms = cfg.backend.retry_base_ms;
        options.max_concurrent = cfg.backend.max_concurrent;
        return std::make_shared<llm::HttpBackend>(std::move(options));
    };

    if (cfg.backend.kind == "http") return make_http();
    if (cfg.backend.kind == "scripted") {
        return llm::ScriptedBackend::from_file(cfg.backend.script_path);
    }
    if (cfg.backend.kind == "cached-http") {
        return std::make_shared<llm::CachingBackend>(cfg.cache_dir, make_http());
    }
    if (cfg.backend.kind == "cached-scripted") {
        return std::make_shared<llm::CachingBackend>(
            cfg.cache_dir, llm::ScriptedBackend::from_file(cfg.backend.script_path));
    }
    throw Error::config("unknown backend kind: " + cfg.backend.kind);
}

} // namespace finvision::app
