#include "finvision/finvision.h"

#include "core/analytics.hpp"
#include "core/config.hpp"
#include "core/errors.hpp"
#include "core/runner.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace {

thread_local std::string g_last_error;

fv_status status_of(const finvision::Error& e) {
    using Kind = finvision::Error::Kind;
    switch (e.kind()) {
        case Kind::config: return FV_ERR_CONFIG;
        case Kind::data: return FV_ERR_DATA;
        case Kind::gateway: return FV_ERR_GATEWAY;
        case Kind::chart: return FV_ERR_DATA;
        case Kind::invalid: return FV_ERR_INVALID;
        case Kind::internal: return FV_ERR_INTERNAL;
    }
    return FV_ERR_INTERNAL;
}

template <typename Fn>
fv_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return FV_OK;
    } catch (const finvision::Error& e) {
        g_last_error = e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return FV_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return FV_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

finvision::analytics::EquityCurve curve_from(const double* values, size_t count) {
    if (!values) throw finvision::Error::invalid("values must not be null");
    finvision::analytics::EquityCurve curve;
    for (size_t i = 0; i < count; ++i) {
        curve.push(finvision::Date::from_serial(static_cast<int>(i)), values[i]);
    }
    return curve;
}

} // namespace

struct fv_engine {
    finvision::app::CliConfig config;
};

extern "C" {

const char* fv_version(void) {
    return "0.1.0";
}

const char* fv_last_error(void) {
    return g_last_error.c_str();
}

void fv_string_free(char* s) {
    std::free(s);
}

fv_status fv_engine_create(const char* config_path, const char* overrides_json,
                           fv_engine** out_engine) {
    return guarded([&] {
        if (!config_path || !out_engine) {
            throw finvision::Error::invalid("config_path and out_engine must not be null");
        }
        auto engine = std::make_unique<fv_engine>();
        engine->config = finvision::app::load_config(
            config_path, overrides_json ? std::string(overrides_json) : std::string{});
        *out_engine = engine.release();
    });
}

void fv_engine_destroy(fv_engine* engine) {
    delete engine;
}

fv_status fv_engine_run(fv_engine* engine, int resume) {
    return guarded([&] {
        if (!engine) throw finvision::Error::invalid("null engine handle");
        finvision::app::run_command(engine->config, resume != 0);
    });
}

fv_status fv_engine_run_baseline(fv_engine* engine, const char* strategy) {
    return guarded([&] {
        if (!engine || !strategy) {
            throw finvision::Error::invalid("engine and strategy must not be null");
        }
        finvision::app::baseline_command(engine->config, strategy);
    });
}

fv_status fv_engine_render_charts(fv_engine* engine, const char* date) {
    return guarded([&] {
        if (!engine || !date) throw finvision::Error::invalid("engine and date must not be null");
        finvision::app::render_command(engine->config, finvision::Date::parse(date));
    });
}

fv_status fv_engine_report_json(fv_engine* engine, char** out_json) {
    return guarded([&] {
        if (!engine || !out_json) {
            throw finvision::Error::invalid("engine and out_json must not be null");
        }
        auto path = engine->config.output_dir / "report.json";
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw finvision::Error::data("no report at " + path.string() +
                                         "; run the engine first");
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        *out_json = dup_string(buf.str());
        if (!*out_json) throw finvision::Error::internal("out of memory");
    });
}

fv_status fv_cache_stats(const char* cache_dir, uint64_t* out_entries, uint64_t* out_bytes) {
    return guarded([&] {
        if (!cache_dir || !out_entries || !out_bytes) {
            throw finvision::Error::invalid("cache_dir and out parameters must not be null");
        }
        auto stats = finvision::app::cache_stats_command(cache_dir);
        *out_entries = stats.entries;
        *out_bytes = stats.bytes;
    });
}

fv_status fv_cache_clear(const char* cache_dir) {
    return guarded([&] {
        if (!cache_dir) throw finvision::Error::invalid("cache_dir must not be null");
        finvision::app::cache_clear_command(cache_dir);
    });
}

fv_status fv_metrics_arr(const double* values, size_t count, int annual_trading_days,
                         double* out) {
    return guarded([&] {
        if (!out) throw finvision::Error::invalid("out must not be null");
        *out = finvision::analytics::arr(curve_from(values, count), annual_trading_days);
    });
}

fv_status fv_metrics_sharpe(const double* values, size_t count, double risk_free_daily,
                            double annualization, double* out) {
    return guarded([&] {
        if (!out) throw finvision::Error::invalid("out must not be null");
        *out = finvision::analytics::sharpe(curve_from(values, count), risk_free_daily,
                                            annualization)
                   .annualized;
    });
}

fv_status fv_metrics_mdd(const double* values, size_t count, double* out) {
    return guarded([&] {
        if (!out) throw finvision::Error::invalid("out must not be null");
        *out = finvision::analytics::mdd(curve_from(values, count));
    });
}

} // extern "C"
