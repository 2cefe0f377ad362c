#include "core/runner.hpp"

#include "core/analytics.hpp"
#include "core/digest.hpp"
#include "core/errors.hpp"
#include "core/render.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace finvision::app {
namespace {

double round2(double v) {
    return std::round(v * 100.0) / 100.0;
}

std::string money(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string shortest(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw Error::internal("cannot write " + path.string());
    out << content;
}

nlohmann::ordered_json metrics_json(const engine::MetricsSummary& m) {
    nlohmann::ordered_json out;
    out["arr"] = m.arr ? nlohmann::ordered_json(*m.arr) : nlohmann::ordered_json(nullptr);
    out["sharpe_daily"] =
        m.sharpe_daily ? nlohmann::ordered_json(*m.sharpe_daily) : nlohmann::ordered_json(nullptr);
    out["sharpe_annualized"] = m.sharpe_annualized ? nlohmann::ordered_json(*m.sharpe_annualized)
                                                   : nlohmann::ordered_json(nullptr);
    out["mdd"] = m.mdd ? nlohmann::ordered_json(*m.mdd) : nlohmann::ordered_json(nullptr);
    out["n_days"] = m.n_days;
    out["initial_capital"] = round2(m.initial_capital);
    out["final_value"] = round2(m.final_value);
    out["notes"] = m.notes;
    return out;
}

nlohmann::ordered_json fill_json(const portfolio::Fill& fill) {
    nlohmann::ordered_json out;
    out["date"] = fill.date.to_string();
    out["action"] = agents::action_name(fill.action);
    out["shares"] = fill.shares;
    out["price"] = round2(fill.price);
    out["requested_pct"] = fill.requested_pct;
    out["executed_pct"] = fill.executed_pct;
    out["cash_after"] = round2(fill.cash_after);
    out["shares_after"] = fill.shares_after;
    return out;
}

std::string equity_csv(const analytics::EquityCurve& curve) {
    std::string out = "date,total_value\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
        out += curve.dates[i].to_string() + "," + money(curve.values[i]) + "\n";
    }
    return out;
}

std::string fills_csv(const std::vector<portfolio::Fill>& fills) {
    std::string out = "date,action,shares,price,requested_pct,executed_pct,cash_after,shares_after\n";
    for (const auto& fill : fills) {
        out += fill.date.to_string();
        out += ",";
        out += agents::action_name(fill.action);
        out += "," + shortest(fill.shares) + "," + money(fill.price) + "," +
               std::to_string(fill.requested_pct) + "," + shortest(fill.executed_pct) + "," +
               money(fill.cash_after) + "," + shortest(fill.shares_after) + "\n";
    }
    return out;
}

std::string summary_markdown(const std::string& label, const engine::MetricsSummary& m) {
    auto pct = [](const std::optional<double>& v) {
        return v ? money(*v * 100.0) : std::string("n/a");
    };
    auto plain = [](const std::optional<double>& v) {
        return v ? money(*v) : std::string("n/a");
    };
    std::string out;
    out += "| Strategy | ARR% | SR% | MDD% |\n";
    out += "| --- | --- | --- | --- |\n";
    out += "| " + label + " | " + pct(m.arr) + " | " + plain(m.sharpe_annualized) + " | " +
           pct(m.mdd) + " |\n";
    return out;
}

void write_report_files(const CliConfig& cfg, const nlohmann::ordered_json& resolved,
                        const engine::MetricsSummary& metrics,
                        const analytics::EquityCurve& equity,
                        const std::vector<portfolio::Fill>& fills,
                        const std::vector<engine::Event>& events,
                        const std::string& decisions_jsonl, const std::string& summary_label) {
    nlohmann::ordered_json report;
    report["schema_version"] = 1;
    report["config"] = resolved;
    report["metrics"] = metrics_json(metrics);
    auto equity_rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < equity.size(); ++i) {
        equity_rows.push_back(
            {{"date", equity.dates[i].to_string()}, {"total_value", round2(equity.values[i])}});
    }
    report["equity"] = std::move(equity_rows);
    auto fill_rows = nlohmann::ordered_json::array();
    for (const auto& fill : fills) fill_rows.push_back(fill_json(fill));
    report["fills"] = std::move(fill_rows);
    auto event_rows = nlohmann::ordered_json::array();
    for (const auto& event : events) {
        event_rows.push_back(
            {{"date", event.date.to_string()}, {"kind", event.kind}, {"detail", event.detail}});
    }
    report["events"] = std::move(event_rows);

    write_file(cfg.output_dir / "report.json", report.dump(2) + "\n");
    write_file(cfg.output_dir / "equity.csv", equity_csv(equity));
    write_file(cfg.output_dir / "fills.csv", fills_csv(fills));
    write_file(cfg.output_dir / "decisions.jsonl", decisions_jsonl);
    write_file(cfg.output_dir / "summary.md", summary_markdown(summary_label, metrics));
}

engine::RunEnvironment make_environment(const CliConfig& cfg, bool resume) {
    engine::RunEnvironment env;
    env.backend = make_backend(cfg);
    env.prompts = cfg.prompt_dir.empty() ? agents::PromptLibrary::embedded()
                                         : agents::PromptLibrary::from_directory(cfg.prompt_dir);
    env.role_settings = cfg.roles;
    env.output_dir = cfg.output_dir;
    env.emit_charts = cfg.emit_charts;
    env.resume = resume;
    if (cfg.log_level != "quiet") {
        env.log = [](const std::string& line) { std::cerr << line << "\n"; };
    }
    return env;
}

} // namespace

void run_command(const CliConfig& cfg, bool resume) {
    std::filesystem::create_directories(cfg.output_dir);
    auto resolved = resolved_json(cfg);
    write_file(cfg.output_dir / "config.resolved.json", resolved.dump(2) + "\n");

    engine::BacktestRun run(cfg.run, make_environment(cfg, resume));
    engine::BacktestReport report = run.run();

    std::string decisions;
    for (const auto& r : report.decisions) {
        nlohmann::ordered_json row;
        row["date"] = r.date.to_string();
        row["phase"] = r.phase;
        row["action"] = agents::action_name(r.decision.action);
        row["position_size"] = r.decision.position_size;
        row["explanation"] = r.decision.explanation;
        row["executed"] = r.fill.has_value();
        row["fill"] = r.fill ? fill_json(*r.fill) : nlohmann::ordered_json(nullptr);
        row["exec_price"] = round2(r.exec_price);
        row["close"] = round2(r.close_price);
        row["reward"] = round2(r.reward);
        row["total_value"] = round2(r.total_value);
        row["technical_chart_sha256"] = r.technical_chart_sha256;
        row["signal_chart_sha256"] = r.signal_chart_sha256;
        decisions += row.dump() + "\n";
    }

    std::string run_log;
    for (const auto& entry : report.run_log) {
        nlohmann::ordered_json row;
        row["date"] = entry.date.to_string();
        row["role"] = entry.role;
        row["request_sha256"] = entry.request_digest;
        row["response"] = entry.response;
        run_log += row.dump() + "\n";
    }
    write_file(cfg.output_dir / "run_log.jsonl", run_log);

    write_report_files(cfg, resolved, report.metrics, report.equity, report.fills, report.events,
                       decisions, "finvision");
}

void baseline_command(const CliConfig& cfg, const std::string& strategy) {
    if (strategy != "bh" && strategy != "macd" && strategy != "kdj-rsi") {
        throw Error::config("unknown baseline strategy '" + strategy +
                            "'; valid strategies: bh, macd, kdj-rsi");
    }
    std::filesystem::create_directories(cfg.output_dir);
    auto resolved = resolved_json(cfg);
    resolved["baseline_strategy"] = strategy;
    write_file(cfg.output_dir / "config.resolved.json", resolved.dump(2) + "\n");

    auto bars = market::load_bars(cfg.run.bars_path);
    if (cfg.run.use_adjusted_close) market::apply_adjusted_closes(bars);

    analytics::BaselineResult result;
    if (strategy == "bh") {
        result = analytics::baseline_buy_hold(bars, cfg.run.test_start, cfg.run.test_end,
                                              cfg.run.initial_capital);
    } else if (strategy == "macd") {
        result = analytics::baseline_macd(bars, cfg.run.test_start, cfg.run.test_end,
                                          cfg.run.initial_capital, cfg.run.indicators);
    } else {
        result = analytics::baseline_kdj_rsi(bars, cfg.run.test_start, cfg.run.test_end,
                                             cfg.run.initial_capital, cfg.run.indicators);
    }

    engine::MetricsSummary metrics;
    metrics.n_days = result.curve.size();
    metrics.initial_capital = cfg.run.initial_capital;
    metrics.final_value =
        result.curve.values.empty() ? cfg.run.initial_capital : result.curve.values.back();
    try {
        metrics.arr = analytics::arr(result.curve, cfg.run.annual_trading_days);
    } catch (const Error& e) {
        metrics.notes.push_back(std::string("arr: ") + e.what());
    }
    try {
        double factor = cfg.run.sharpe_annualization.value_or(
            analytics::default_sharpe_annualization(cfg.run.annual_trading_days));
        auto s = analytics::sharpe(result.curve, cfg.run.risk_free_rate, factor);
        metrics.sharpe_daily = s.daily;
        metrics.sharpe_annualized = s.annualized;
    } catch (const Error& e) {
        metrics.notes.push_back(std::string("sharpe: ") + e.what());
    }
    try {
        metrics.mdd = analytics::mdd(result.curve);
    } catch (const Error& e) {
        metrics.notes.push_back(std::string("mdd: ") + e.what());
    }

    std::string decisions;
    for (const auto& [date, action] : result.signals) {
        nlohmann::ordered_json row;
        row["date"] = date.to_string();
        row["action"] = agents::action_name(action);
        row["rule"] = strategy;
        decisions += row.dump() + "\n";
    }

    write_report_files(cfg, resolved, metrics, result.curve, result.fills, {}, decisions,
                       strategy);
}

void render_command(const CliConfig& cfg, Date date) {
    std::filesystem::create_directories(cfg.output_dir);
    auto resolved = resolved_json(cfg);
    write_file(cfg.output_dir / "config.resolved.json", resolved.dump(2) + "\n");

    auto bars = market::load_bars(cfg.run.bars_path);
    if (cfg.run.use_adjusted_close) market::apply_adjusted_closes(bars);

    auto idx = market::bar_index(bars, date);
    if (!idx) {
        Date prev{}, next{};
        bool has_prev = false, has_next = false;
        for (const auto& bar : bars) {
            if (bar.date < date) {
                prev = bar.date;
                has_prev = true;
            } else if (bar.date > date && !has_next) {
                next = bar.date;
                has_next = true;
            }
        }
        std::string hint;
        if (has_prev) hint += " previous trading day: " + prev.to_string() + ";";
        if (has_next) hint += " next trading day: " + next.to_string() + ";";
        throw Error::data(date.to_string() + " is not a trading day in the data;" + hint);
    }

    // Replay prior decisions from an earlier run of this output directory, so
    // the signal chart carries the same markers the pipeline drew.
    std::vector<std::pair<Date, agents::Action>> decisions;
    {
        std::ifstream in(cfg.output_dir / "decisions.jsonl");
        std::string line;
        while (in && std::getline(in, line)) {
            if (line.empty()) continue;
            nlohmann::json row = nlohmann::json::parse(line, nullptr, false);
            if (row.is_discarded() || !row.is_object() || !row.contains("date") ||
                !row.contains("action")) {
                continue;
            }
            Date d;
            if (!Date::try_parse(row["date"].get<std::string>(), d)) continue;
            std::string action = row["action"].get<std::string>();
            if (d < date) {
                decisions.emplace_back(d, action == "BUY"    ? agents::Action::buy
                                          : action == "SELL" ? agents::Action::sell
                                                             : agents::Action::hold);
            }
        }
    }

    engine::DayCharts charts = engine::build_day_charts(bars, *idx, cfg.run, decisions);
    auto tech_path = cfg.output_dir / ("technical_" + date.to_string() + ".png");
    auto sig_path = cfg.output_dir / ("signal_" + date.to_string() + ".png");
    write_file(tech_path, std::string(charts.technical_png.begin(), charts.technical_png.end()));
    write_file(sig_path, std::string(charts.signal_png.begin(), charts.signal_png.end()));
    write_file(cfg.output_dir / ("technical_" + date.to_string() + ".json"),
               charting::spec_to_json(charts.technical).dump(2) + "\n");
    write_file(cfg.output_dir / ("signal_" + date.to_string() + ".json"),
               charting::spec_to_json(charts.signal).dump(2) + "\n");
}

CacheStatsResult cache_stats_command(const std::filesystem::path& dir) {
    auto stats = llm::cache_stats(dir);
    return {stats.entries, stats.bytes};
}

void cache_clear_command(const std::filesystem::path& dir) {
    llm::cache_clear(dir);
}

} // namespace finvision::app
