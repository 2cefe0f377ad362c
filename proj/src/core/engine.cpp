#include "core/engine.hpp"

#include "core/digest.hpp"
#include "core/errors.hpp"
#include "core/render.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>

namespace finvision::engine {

namespace {

std::string shortest(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

double round2(double v) {
    return std::round(v * 100.0) / 100.0;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
        if (!out) throw Error::internal("cannot write " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

} // namespace

void WindowConfig::validate() const {
    if (chart < 1 || signal < 1 || reflection_short < 1 || reflection_medium < 1) {
        throw Error::config("window lengths must be at least 1");
    }
}

void RunConfig::validate() const {
    if (ticker.empty()) throw Error::config("ticker must be set");
    if (initial_capital <= 0) throw Error::config("initial capital must be positive");
    if (!(warmup_start <= warmup_end)) throw Error::config("warmup window start after end");
    if (!(test_start <= test_end)) throw Error::config("test window start after end");
    if (!(warmup_end < test_start)) throw Error::config("warmup must end before the test window");
    if (annual_trading_days < 1) throw Error::config("annual_trading_days must be positive");
    if (news_lookback_days < 1) throw Error::config("news_lookback_days must be at least 1");
    windows.validate();
    indicators.validate();
}

// --- agent graph --------------------------------------------------------------

AgentGraph AgentGraph::standard() {
    AgentGraph g;
    const char* analysis[] = {"summarizer", "technical_analyst", "reflection_short",
                              "reflection_medium", "reflection_visual"};
    for (const char* n : analysis) g.add_node(n);
    g.add_node("decision");
    g.add_node("execute");
    for (const char* n : analysis) g.add_edge(n, "decision");
    g.add_edge("decision", "execute");
    return g;
}

void AgentGraph::add_node(std::string name) {
    if (std::find(nodes_.begin(), nodes_.end(), name) != nodes_.end()) {
        throw Error::config("duplicate graph node: " + name);
    }
    nodes_.push_back(std::move(name));
}

std::size_t AgentGraph::index_of(const std::string& name) const {
    auto it = std::find(nodes_.begin(), nodes_.end(), name);
    if (it == nodes_.end()) throw Error::config("unknown graph node: " + name);
    return static_cast<std::size_t>(it - nodes_.begin());
}

void AgentGraph::add_edge(const std::string& from, const std::string& to) {
    edges_.emplace_back(index_of(from), index_of(to));
}

std::vector<std::vector<std::string>> AgentGraph::execution_plan() const {
    std::vector<int> indegree(nodes_.size(), 0);
    for (const auto& [from, to] : edges_) {
        (void)from;
        ++indegree[to];
    }
    std::vector<bool> done(nodes_.size(), false);
    std::vector<std::vector<std::string>> layers;
    std::size_t placed = 0;
    while (placed < nodes_.size()) {
        std::vector<std::size_t> ready;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (!done[i] && indegree[i] == 0) ready.push_back(i);
        }
        if (ready.empty()) {
            throw Error::config("agent graph contains a dependency cycle");
        }
        std::vector<std::string> layer;
        for (std::size_t i : ready) {
            done[i] = true;
            ++placed;
            layer.push_back(nodes_[i]);
        }
        for (const auto& [from, to] : edges_) {
            if (std::find(ready.begin(), ready.end(), from) != ready.end()) --indegree[to];
        }
        layers.push_back(std::move(layer));
    }
    return layers;
}

std::shared_ptr<llm::ScriptedBackend> find_scripted(
    const std::shared_ptr<llm::ChatBackend>& backend) {
    if (auto scripted = std::dynamic_pointer_cast<llm::ScriptedBackend>(backend)) {
        return scripted;
    }
    if (auto caching = std::dynamic_pointer_cast<llm::CachingBackend>(backend)) {
        return find_scripted(caching->inner());
    }
    return nullptr;
}

// --- day charts ----------------------------------------------------------------

DayCharts build_day_charts(std::span<const market::Bar> bars, std::size_t day_index,
                           const RunConfig& config,
                           std::span<const std::pair<Date, agents::Action>> prior_decisions) {
    if (day_index == 0 || day_index > bars.size()) {
        throw Error::data("cannot build charts without history before the trading day");
    }
    // Truncated view: only bars strictly before the decision day exist here,
    // so no input to any agent can see the day being decided.
    std::span<const market::Bar> prefix = bars.subspan(0, day_index);
    market::IndicatorFrame frame = market::compute_indicators(prefix, config.indicators);

    const Date day = bars[day_index].date;
    DayCharts out;

    std::size_t tech_n = std::min<std::size_t>(prefix.size(), config.windows.chart);
    std::span<const market::Bar> tech_bars = prefix.subspan(prefix.size() - tech_n);
    market::IndicatorFrame tech_frame = market::tail_frame(frame, tech_n);
    out.technical = charting::build_technical_chart(
        tech_bars, tech_frame, config.ticker + " " + day.to_string(), config.windows.chart);

    std::size_t sig_n = std::min<std::size_t>(prefix.size(), config.windows.signal);
    std::span<const market::Bar> sig_bars = prefix.subspan(prefix.size() - sig_n);
    std::vector<std::pair<Date, agents::Action>> in_window;
    for (const auto& [date, action] : prior_decisions) {
        if (date >= sig_bars.front().date && date <= sig_bars.back().date) {
            in_window.emplace_back(date, action);
        }
    }
    out.signal = charting::build_signal_chart(
        sig_bars, in_window, config.ticker + " signals " + day.to_string(),
        config.windows.signal);

    out.technical_png = charting::render_png(out.technical);
    out.signal_png = charting::render_png(out.signal);
    return out;
}

// --- backtest run ---------------------------------------------------------------

BacktestRun::BacktestRun(RunConfig config, RunEnvironment env)
    : config_(std::move(config)), env_(std::move(env)) {
    config_.validate();
    if (!env_.backend) throw Error::config("backtest needs a chat backend");
    invoker_ = std::make_unique<agents::AgentInvoker>(env_.prompts, env_.backend,
                                                      env_.role_settings);
    portfolio_ = portfolio::Portfolio::with_capital(config_.initial_capital);
    state_.ticker = config_.ticker;

    nlohmann::ordered_json cfg;
    cfg["ticker"] = config_.ticker;
    cfg["warmup"] = {config_.warmup_start.to_string(), config_.warmup_end.to_string()};
    cfg["test"] = {config_.test_start.to_string(), config_.test_end.to_string()};
    cfg["initial_capital"] = config_.initial_capital;
    cfg["windows"] = {config_.windows.chart, config_.windows.signal,
                      config_.windows.reflection_short, config_.windows.reflection_medium};
    config_digest_ = sha256_hex(cfg.dump());
}

void BacktestRun::ensure_loaded() {
    if (loaded_) return;
    bars_ = market::load_bars(config_.bars_path);
    if (config_.use_adjusted_close) market::apply_adjusted_closes(bars_);

    auto warmup_days = market::trading_days(bars_, config_.warmup_start, config_.warmup_end);
    auto test_days = market::trading_days(bars_, config_.test_start, config_.test_end);
    if (test_days.empty()) throw Error::data("no trading days inside the test window");

    for (Date d : warmup_days) schedule_.emplace_back(d, true);
    first_test_index_ = schedule_.size();
    for (Date d : test_days) schedule_.emplace_back(d, false);

    if (!env_.output_dir.empty()) {
        std::filesystem::create_directories(env_.output_dir);
        if (env_.emit_charts) {
            std::filesystem::create_directories(env_.output_dir / "charts");
        }
    }
    loaded_ = true;
}

void BacktestRun::add_event(Date date, std::string kind, std::string detail) {
    events_.push_back({date, std::move(kind), std::move(detail)});
}

std::string BacktestRun::history_json(std::size_t max_days) const {
    auto arr = nlohmann::ordered_json::array();
    std::size_t start = state_.decisions.size() > max_days ? state_.decisions.size() - max_days : 0;
    for (std::size_t i = start; i < state_.decisions.size(); ++i) {
        const DecisionRecord& r = state_.decisions[i];
        nlohmann::ordered_json row;
        row["date"] = r.date.to_string();
        row["action"] = agents::action_name(r.decision.action);
        row["position_size"] = r.decision.position_size;
        row["executed"] = r.fill.has_value();
        row["executed_pct"] = r.fill ? round2(r.fill->executed_pct) : 0.0;
        row["close"] = round2(r.close_price);
        row["reward"] = round2(r.reward);
        row["total_value"] = round2(r.total_value);
        row["cumulative_return_pct"] =
            round2((r.total_value / config_.initial_capital - 1.0) * 100.0);
        arr.push_back(std::move(row));
    }
    return arr.dump();
}

void BacktestRun::run_agents_for_day(Date day, std::span<const market::Bar> prefix,
                                     const DayCharts& charts, std::string& x1, std::string& x2,
                                     std::string& x3_short, std::string& x3_medium,
                                     std::string& x4) {
    using agents::AgentRole;

    // News for the preceding calendar day(s).
    std::string news_data;
    {
        std::vector<market::NewsItem> items;
        for (int back = config_.news_lookback_days; back >= 1; --back) {
            auto day_items = market::load_news(config_.news_path, config_.ticker,
                                               day.add_days(-back));
            items.insert(items.end(), day_items.begin(), day_items.end());
        }
        if (items.empty()) {
            news_data = "No relevant news.";
            add_event(day, "no_news", "no news items for the lookback window");
        } else {
            for (const auto& item : items) {
                news_data += "- [" + item.published_at + "] (" + item.source + ") " + item.title;
                if (!item.body.empty()) news_data += ": " + item.body;
                news_data += "\n";
            }
        }
    }

    std::size_t short_n =
        std::min<std::size_t>(state_.decisions.size(), config_.windows.reflection_short);
    std::size_t medium_n =
        std::min<std::size_t>(state_.decisions.size(), config_.windows.reflection_medium);
    if (!state_.decisions.empty() &&
        state_.decisions.size() < static_cast<std::size_t>(config_.windows.reflection_medium)) {
        add_event(day, "partial_reflection_history",
                  "only " + std::to_string(state_.decisions.size()) + " days of decisions");
    }

    struct Task {
        AgentRole role;
        agents::PromptContext context;
        std::vector<std::vector<std::uint8_t>> images;
        std::string* out;
    };
    std::vector<Task> tasks;
    tasks.push_back({AgentRole::summarizer,
                     {{"ticker", config_.ticker}, {"news_data", news_data}},
                     {},
                     &x1});
    tasks.push_back({AgentRole::technical_analyst,
                     {{"ticker", config_.ticker}},
                     {charts.technical_png},
                     &x2});
    tasks.push_back({AgentRole::reflection_short,
                     {{"ticker", config_.ticker},
                      {"len_short_term_data", static_cast<std::int64_t>(short_n)},
                      {"json_data", history_json(short_n)}},
                     {},
                     &x3_short});
    tasks.push_back({AgentRole::reflection_medium,
                     {{"ticker", config_.ticker},
                      {"len_medium_term_data", static_cast<std::int64_t>(medium_n)},
                      {"json_data", history_json(medium_n)}},
                     {},
                     &x3_medium});
    tasks.push_back({AgentRole::reflection_visual,
                     {{"ticker", config_.ticker}},
                     {charts.signal_png},
                     &x4});

    auto run_task = [&](const Task& task) {
        agents::AgentReply reply = invoker_->invoke(
            task.role, task.context,
            std::span<const std::vector<std::uint8_t>>(task.images));
        *task.out = reply.text;
        return RunLogEntry{day, agents::role_name(task.role), reply.request_digest, reply.text};
    };

    const bool parallel = config_.parallel_agents && invoker_->backend_supports_concurrency();
    if (parallel) {
        std::vector<std::future<RunLogEntry>> futures;
        futures.reserve(tasks.size());
        for (const auto& task : tasks) {
            futures.push_back(std::async(std::launch::async, run_task, std::cref(task)));
        }
        for (auto& f : futures) run_log_.push_back(f.get());
    } else {
        for (const auto& task : tasks) run_log_.push_back(run_task(task));
    }
    (void)prefix;
}

const DecisionRecord& BacktestRun::step_day(Date day, bool warmup_phase) {
    ensure_loaded();
    auto idx = market::bar_index(bars_, day);
    if (!idx) throw Error::data("no bar for trading day " + day.to_string());
    if (*idx == 0) {
        throw Error::data("no market history before " + day.to_string() +
                          "; the first processed day needs at least one earlier bar");
    }

    std::span<const market::Bar> all(bars_);
    std::span<const market::Bar> prefix = all.subspan(0, *idx);

    std::vector<std::pair<Date, agents::Action>> prior;
    prior.reserve(state_.decisions.size());
    for (const auto& r : state_.decisions) prior.emplace_back(r.date, r.decision.action);

    DayCharts charts = build_day_charts(all, *idx, config_, prior);
    if (charts.technical.truncated) {
        add_event(day, "truncated_technical_chart",
                  "only " + std::to_string(prefix.size()) + " bars of history");
    }
    std::string tech_sha = sha256_hex(std::span<const std::uint8_t>(charts.technical_png));
    std::string sig_sha = sha256_hex(std::span<const std::uint8_t>(charts.signal_png));
    if (env_.emit_charts && !env_.output_dir.empty()) {
        auto chart_dir = env_.output_dir / "charts";
        std::ofstream tech(chart_dir / ("technical_" + day.to_string() + ".png"),
                           std::ios::binary | std::ios::trunc);
        tech.write(reinterpret_cast<const char*>(charts.technical_png.data()),
                   static_cast<std::streamsize>(charts.technical_png.size()));
        std::ofstream sig(chart_dir / ("signal_" + day.to_string() + ".png"),
                          std::ios::binary | std::ios::trunc);
        sig.write(reinterpret_cast<const char*>(charts.signal_png.data()),
                  static_cast<std::streamsize>(charts.signal_png.size()));
    }

    // X1..X4 (the analysis layer of the agent graph)
    std::string x1, x2, x3_short, x3_medium, x4;
    run_agents_for_day(day, prefix, charts, x1, x2, x3_short, x3_medium, x4);

    // Decision agent sees the previous close's portfolio snapshot.
    const market::Bar& prev_bar = prefix.back();
    portfolio::PortfolioSnapshot prev_snap =
        portfolio::mark_to_market(portfolio_, prev_bar.date, prev_bar.close);

    std::size_t medium_n =
        std::min<std::size_t>(state_.decisions.size(), config_.windows.reflection_medium);
    agents::PromptContext ctx;
    ctx["ticker"] = config_.ticker;
    ctx["state['date'][-1]"] = day.to_string();
    ctx["current_shares"] = shortest(prev_snap.shares);
    ctx["current_price"] = prev_snap.price;
    ctx["avg_purchase_price"] = prev_snap.avg_purchase_price;
    ctx["total_value"] = prev_snap.total_value;
    ctx["cash_reserve"] = prev_snap.cash;
    ctx["cash_percentage"] = prev_snap.cash_percentage;
    ctx["(current_price - avg_purchase_price) * current_shares"] = prev_snap.unrealized_pl;
    ctx["unrealized_profit_percentage"] = prev_snap.unrealized_pct;
    ctx["state['chart_analysis'][-1]"] = x2;
    ctx["state['news_summary'][-1]"] = x1;
    ctx["state['reflection_insights']['short_term']"] = x3_short;
    ctx["state['reflection_insights']['medium_term']"] = x3_medium;
    ctx["state['market_intelligence']"] = x4;
    ctx["len(historical_data)"] = static_cast<std::int64_t>(medium_n);
    ctx["json_data"] = history_json(medium_n);

    agents::AgentReply decision_reply = invoker_->invoke(agents::AgentRole::decision, ctx, {});
    run_log_.push_back({day, "decision", decision_reply.request_digest, decision_reply.text});

    agents::DecisionParse parsed = agents::parse_decision(decision_reply.text);
    for (const auto& kind : parsed.events) {
        add_event(day, kind, "decision text: " + decision_reply.text.substr(0, 120));
    }

    // Execute at the decision day's open; mark to market at its close.
    const market::Bar& today = bars_[*idx];
    portfolio::ExecutionResult exec =
        portfolio::execute(portfolio_, parsed.decision, today.open, day);
    for (const auto& event : exec.events) add_event(day, event.kind, event.detail);
    portfolio_ = exec.portfolio;

    portfolio::PortfolioSnapshot close_snap = portfolio::mark_to_market(portfolio_, day, today.close);
    double reward = portfolio::daily_reward(prev_snap, close_snap);
    if (config_.reward_as_percent) {
        reward = reward / prev_snap.total_value * 100.0;
    }

    DecisionRecord record;
    record.date = day;
    record.phase = warmup_phase ? "warmup" : "test";
    record.decision = parsed.decision;
    record.fill = exec.fill;
    record.exec_price = today.open;
    record.close_price = today.close;
    record.reward = reward;
    record.total_value = close_snap.total_value;
    record.technical_chart_sha256 = tech_sha;
    record.signal_chart_sha256 = sig_sha;

    state_.news_summaries.emplace_back(day, x1);
    state_.chart_analyses.emplace_back(day, x2);
    state_.reflection_short = x3_short;
    state_.reflection_medium = x3_medium;
    state_.market_intelligence = x4;
    state_.decisions.push_back(std::move(record));

    if (!warmup_phase) {
        equity_.push(day, close_snap.total_value);
        if (exec.fill) test_fills_.push_back(*exec.fill);
    }

    if (env_.log) {
        env_.log("[" + day.to_string() + "] " + (warmup_phase ? "warmup " : "test   ") +
                 agents::action_name(parsed.decision.action) + " " +
                 std::to_string(parsed.decision.position_size) + "% total " +
                 shortest(round2(close_snap.total_value)));
    }
    return state_.decisions.back();
}

void BacktestRun::process_index(std::size_t index) {
    const auto& [day, warmup_phase] = schedule_[index];
    if (index == first_test_index_ && !config_.carry_warmup_portfolio) {
        portfolio_ = portfolio::Portfolio::with_capital(config_.initial_capital);
        add_event(day, "portfolio_reset",
                  "portfolio reset to initial capital at the test boundary; "
                  "reflection memory retained");
    }
    step_day(day, warmup_phase);
    next_index_ = index + 1;
    if (!env_.output_dir.empty()) write_checkpoint();
}

BacktestReport BacktestRun::run() {
    ensure_loaded();

    // A resumed run must rebuild the uninterrupted report byte for byte, so
    // the resume itself is logged but never recorded as a report event.
    if (env_.resume && try_load_checkpoint() && env_.log) {
        env_.log("resumed from checkpoint at day index " + std::to_string(next_index_));
    }

    for (std::size_t i = next_index_; i < schedule_.size(); ++i) {
        process_index(i);
    }

    BacktestReport report;
    report.equity = equity_;
    report.fills = test_fills_;
    report.decisions = state_.decisions;
    report.events = events_;
    report.run_log = run_log_;
    finish_metrics(report);
    return report;
}

void BacktestRun::finish_metrics(BacktestReport& report) const {
    MetricsSummary& m = report.metrics;
    m.n_days = report.equity.size();
    m.initial_capital = config_.initial_capital;
    m.final_value = report.equity.values.empty() ? config_.initial_capital
                                                 : report.equity.values.back();
    try {
        m.arr = analytics::arr(report.equity, config_.annual_trading_days);
    } catch (const Error& e) {
        m.notes.push_back(std::string("arr: ") + e.what());
    }
    try {
        double factor = config_.sharpe_annualization.value_or(
            analytics::default_sharpe_annualization(config_.annual_trading_days));
        auto s = analytics::sharpe(report.equity, config_.risk_free_rate, factor);
        m.sharpe_daily = s.daily;
        m.sharpe_annualized = s.annualized;
    } catch (const Error& e) {
        m.notes.push_back(std::string("sharpe: ") + e.what());
    }
    try {
        m.mdd = analytics::mdd(report.equity);
    } catch (const Error& e) {
        m.notes.push_back(std::string("mdd: ") + e.what());
    }
}

// --- checkpointing ---------------------------------------------------------------

namespace {

nlohmann::ordered_json fill_to_json(const portfolio::Fill& fill) {
    nlohmann::ordered_json out;
    out["date"] = fill.date.to_string();
    out["action"] = agents::action_name(fill.action);
    out["shares"] = fill.shares;
    out["price"] = fill.price;
    out["requested_pct"] = fill.requested_pct;
    out["executed_pct"] = fill.executed_pct;
    out["cash_after"] = fill.cash_after;
    out["shares_after"] = fill.shares_after;
    return out;
}

portfolio::Fill fill_from_json(const nlohmann::json& j) {
    portfolio::Fill fill;
    fill.date = Date::parse(j.at("date").get<std::string>());
    std::string action = j.at("action").get<std::string>();
    fill.action = action == "BUY"    ? agents::Action::buy
                  : action == "SELL" ? agents::Action::sell
                                     : agents::Action::hold;
    fill.shares = j.at("shares").get<double>();
    fill.price = j.at("price").get<double>();
    fill.requested_pct = j.at("requested_pct").get<int>();
    fill.executed_pct = j.at("executed_pct").get<double>();
    fill.cash_after = j.at("cash_after").get<double>();
    fill.shares_after = j.at("shares_after").get<double>();
    return fill;
}

nlohmann::ordered_json record_to_json(const DecisionRecord& r) {
    nlohmann::ordered_json out;
    out["date"] = r.date.to_string();
    out["phase"] = r.phase;
    out["action"] = agents::action_name(r.decision.action);
    out["position_size"] = r.decision.position_size;
    out["explanation"] = r.decision.explanation;
    out["fill"] = r.fill ? fill_to_json(*r.fill) : nlohmann::ordered_json(nullptr);
    out["exec_price"] = r.exec_price;
    out["close_price"] = r.close_price;
    out["reward"] = r.reward;
    out["total_value"] = r.total_value;
    out["technical_chart_sha256"] = r.technical_chart_sha256;
    out["signal_chart_sha256"] = r.signal_chart_sha256;
    return out;
}

DecisionRecord record_from_json(const nlohmann::json& j) {
    DecisionRecord r;
    r.date = Date::parse(j.at("date").get<std::string>());
    r.phase = j.at("phase").get<std::string>();
    std::string action = j.at("action").get<std::string>();
    r.decision.action = action == "BUY"    ? agents::Action::buy
                        : action == "SELL" ? agents::Action::sell
                                           : agents::Action::hold;
    r.decision.position_size = j.at("position_size").get<int>();
    r.decision.explanation = j.at("explanation").get<std::string>();
    if (!j.at("fill").is_null()) r.fill = fill_from_json(j.at("fill"));
    r.exec_price = j.at("exec_price").get<double>();
    r.close_price = j.at("close_price").get<double>();
    r.reward = j.at("reward").get<double>();
    r.total_value = j.at("total_value").get<double>();
    r.technical_chart_sha256 = j.at("technical_chart_sha256").get<std::string>();
    r.signal_chart_sha256 = j.at("signal_chart_sha256").get<std::string>();
    return r;
}

} // namespace

void BacktestRun::write_checkpoint() const {
    nlohmann::ordered_json ckpt;
    ckpt["schema_version"] = 1;
    ckpt["config_sha256"] = config_digest_;
    ckpt["next_index"] = next_index_;
    ckpt["portfolio"] = {{"cash", portfolio_.cash},
                         {"shares", portfolio_.shares},
                         {"avg_purchase_price", portfolio_.avg_purchase_price},
                         {"initial_capital", portfolio_.initial_capital}};

    nlohmann::ordered_json st;
    auto texts = nlohmann::ordered_json::array();
    for (const auto& [date, text] : state_.news_summaries) {
        texts.push_back({date.to_string(), text});
    }
    st["news_summaries"] = std::move(texts);
    auto charts = nlohmann::ordered_json::array();
    for (const auto& [date, text] : state_.chart_analyses) {
        charts.push_back({date.to_string(), text});
    }
    st["chart_analyses"] = std::move(charts);
    st["reflection_short"] = state_.reflection_short;
    st["reflection_medium"] = state_.reflection_medium;
    st["market_intelligence"] = state_.market_intelligence;
    auto decisions = nlohmann::ordered_json::array();
    for (const auto& r : state_.decisions) decisions.push_back(record_to_json(r));
    st["decisions"] = std::move(decisions);
    ckpt["state"] = std::move(st);

    auto equity = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < equity_.size(); ++i) {
        equity.push_back({equity_.dates[i].to_string(), equity_.values[i]});
    }
    ckpt["equity"] = std::move(equity);
    auto fills = nlohmann::ordered_json::array();
    for (const auto& fill : test_fills_) fills.push_back(fill_to_json(fill));
    ckpt["fills"] = std::move(fills);
    auto events = nlohmann::ordered_json::array();
    for (const auto& event : events_) {
        events.push_back({event.date.to_string(), event.kind, event.detail});
    }
    ckpt["events"] = std::move(events);
    auto log = nlohmann::ordered_json::array();
    for (const auto& entry : run_log_) {
        log.push_back({entry.date.to_string(), entry.role, entry.request_digest, entry.response});
    }
    ckpt["run_log"] = std::move(log);

    if (auto scripted = find_scripted(env_.backend)) {
        ckpt["scripted_consumed"] = scripted->consumed();
    }

    atomic_write(env_.output_dir / "checkpoint.json", ckpt.dump(2) + "\n");
}

bool BacktestRun::try_load_checkpoint() {
    auto path = env_.output_dir / "checkpoint.json";
    std::ifstream in(path);
    if (!in) return false;

    nlohmann::json ckpt = nlohmann::json::parse(in, nullptr, false);
    if (ckpt.is_discarded()) throw Error::data("corrupt checkpoint: " + path.string());
    if (ckpt.value("config_sha256", "") != config_digest_) {
        throw Error::config("checkpoint was produced by a different configuration; "
                            "refusing to resume");
    }

    const auto& pf = ckpt.at("portfolio");
    portfolio_.cash = pf.at("cash").get<double>();
    portfolio_.shares = pf.at("shares").get<double>();
    portfolio_.avg_purchase_price = pf.at("avg_purchase_price").get<double>();
    portfolio_.initial_capital = pf.at("initial_capital").get<double>();

    const auto& st = ckpt.at("state");
    state_.news_summaries.clear();
    for (const auto& pair : st.at("news_summaries")) {
        state_.news_summaries.emplace_back(Date::parse(pair.at(0).get<std::string>()),
                                           pair.at(1).get<std::string>());
    }
    state_.chart_analyses.clear();
    for (const auto& pair : st.at("chart_analyses")) {
        state_.chart_analyses.emplace_back(Date::parse(pair.at(0).get<std::string>()),
                                           pair.at(1).get<std::string>());
    }
    state_.reflection_short = st.at("reflection_short").get<std::string>();
    state_.reflection_medium = st.at("reflection_medium").get<std::string>();
    state_.market_intelligence = st.at("market_intelligence").get<std::string>();
    state_.decisions.clear();
    for (const auto& r : st.at("decisions")) state_.decisions.push_back(record_from_json(r));

    equity_ = {};
    for (const auto& pair : ckpt.at("equity")) {
        equity_.push(Date::parse(pair.at(0).get<std::string>()), pair.at(1).get<double>());
    }
    test_fills_.clear();
    for (const auto& fill : ckpt.at("fills")) test_fills_.push_back(fill_from_json(fill));
    events_.clear();
    for (const auto& event : ckpt.at("events")) {
        events_.push_back({Date::parse(event.at(0).get<std::string>()),
                           event.at(1).get<std::string>(), event.at(2).get<std::string>()});
    }
    run_log_.clear();
    for (const auto& entry : ckpt.at("run_log")) {
        run_log_.push_back({Date::parse(entry.at(0).get<std::string>()),
                            entry.at(1).get<std::string>(), entry.at(2).get<std::string>(),
                            entry.at(3).get<std::string>()});
    }

    next_index_ = ckpt.at("next_index").get<std::size_t>();
    if (ckpt.contains("scripted_consumed")) {
        if (auto scripted = find_scripted(env_.backend)) {
            scripted->fast_forward(ckpt["scripted_consumed"].get<std::size_t>());
        }
    }
    return true;
}

} // namespace finvision::engine
