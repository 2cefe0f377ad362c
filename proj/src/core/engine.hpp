#pragma once

#include "core/agents.hpp"
#include "core/analytics.hpp"
#include "core/chart.hpp"
#include "core/date.hpp"
#include "core/gateway.hpp"
#include "core/indicators.hpp"
#include "core/market_data.hpp"
#include "core/portfolio.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace finvision::engine {

struct WindowConfig {
    int chart = 60;             // technical chart bars
    int signal = 30;            // signal chart bars
    int reflection_short = 7;   // trading days
    int reflection_medium = 30; // trading days

    void validate() const;
};

struct RunConfig {
    std::string ticker;
    std::filesystem::path bars_path;
    std::filesystem::path news_path;
    Date warmup_start, warmup_end;
    Date test_start, test_end;
    double initial_capital = 10000.0;
    WindowConfig windows;
    market::IndicatorParams indicators;
    int annual_trading_days = 252;
    double risk_free_rate = 0.0;  // per day
    std::optional<double> sharpe_annualization;  // default sqrt(annual_trading_days)
    bool use_adjusted_close = false;
    int news_lookback_days = 1;       // calendar days before the decision day
    bool reward_as_percent = false;   // reward as % of previous total instead of currency
    bool carry_warmup_portfolio = false;
    bool parallel_agents = false;

    void validate() const;
};

struct Event {
    Date date;
    std::string kind;
    std::string detail;
};

struct RunLogEntry {
    Date date;
    std::string role;
    std::string request_digest;
    std::string response;
};

struct DecisionRecord {
    Date date;
    std::string phase;  // "warmup" | "test"
    agents::TradingDecision decision;
    std::optional<portfolio::Fill> fill;
    double exec_price = 0;   // decision-day open
    double close_price = 0;  // decision-day close
    double reward = 0;       // close-to-close change in total value
    double total_value = 0;  // at the decision-day close
    std::string technical_chart_sha256;
    std::string signal_chart_sha256;
};

// Evolving cross-day memory: agent output histories plus the decision log.
// Histories are append-only; exactly one decision is recorded per processed
// trading day.
struct AgentState {
    std::string ticker;
    std::vector<std::pair<Date, std::string>> news_summaries;   // X1 by date
    std::vector<std::pair<Date, std::string>> chart_analyses;   // X2 by date
    std::string reflection_short;                               // latest X3 (short)
    std::string reflection_medium;                              // latest X3 (medium)
    std::string market_intelligence;                            // latest X4
    std::vector<DecisionRecord> decisions;
};

struct MetricsSummary {
    std::optional<double> arr;
    std::optional<double> sharpe_daily;
    std::optional<double> sharpe_annualized;
    std::optional<double> mdd;
    std::size_t n_days = 0;
    double initial_capital = 0;
    double final_value = 0;
    std::vector<std::string> notes;  // e.g. undefined-Sharpe reason
};

struct BacktestReport {
    analytics::EquityCurve equity;          // test window only, marked at closes
    std::vector<portfolio::Fill> fills;     // test window only
    std::vector<DecisionRecord> decisions;  // warmup + test
    std::vector<Event> events;
    std::vector<RunLogEntry> run_log;
    MetricsSummary metrics;
};

// Agent dependency graph. The standard graph runs the five analysis agents as
// one parallelizable layer, then the decision agent, then trade execution.
class AgentGraph {
public:
    static AgentGraph standard();

    void add_node(std::string name);
    void add_edge(const std::string& from, const std::string& to);

    // Kahn layers in declaration order; throws Error::config on a cycle.
    std::vector<std::vector<std::string>> execution_plan() const;

private:
    std::vector<std::string> nodes_;
    std::vector<std::pair<std::size_t, std::size_t>> edges_;
    std::size_t index_of(const std::string& name) const;
};

struct RunEnvironment {
    std::shared_ptr<llm::ChatBackend> backend;
    agents::PromptLibrary prompts = agents::PromptLibrary::embedded();
    agents::RoleSettingsMap role_settings = agents::default_role_settings();
    std::filesystem::path output_dir;  // checkpoint.json and charts/ live here
    bool emit_charts = true;
    bool resume = false;
    std::function<void(const std::string&)> log;
};

// Charts exactly as the pipeline feeds them to the agents on `day`:
// technical chart over the last `windows.chart` bars before the day, signal
// chart over the last `windows.signal` bars with prior decision markers.
struct DayCharts {
    charting::ChartSpec technical;
    charting::ChartSpec signal;
    std::vector<std::uint8_t> technical_png;
    std::vector<std::uint8_t> signal_png;
};

DayCharts build_day_charts(std::span<const market::Bar> bars, std::size_t day_index,
                           const RunConfig& config,
                           std::span<const std::pair<Date, agents::Action>> prior_decisions);

// Day-by-day backtest over the warmup window (reflection memory accumulates,
// trades are simulated) followed by the test window (portfolio reset to the
// initial capital unless configured to carry, memory retained). Checkpoints
// after every completed day; a resumed run reproduces the uninterrupted
// report byte for byte under a deterministic backend.
class BacktestRun {
public:
    BacktestRun(RunConfig config, RunEnvironment env);

    BacktestReport run();

    // Single-day step, exposed for tests: processes the given trading day and
    // returns the recorded decision.
    const DecisionRecord& step_day(Date day, bool warmup_phase);

    const AgentState& state() const { return state_; }
    const portfolio::Portfolio& current_portfolio() const { return portfolio_; }

private:
    void process_index(std::size_t index);
    void ensure_loaded();
    void run_agents_for_day(Date day, std::span<const market::Bar> prefix,
                            const DayCharts& charts, std::string& x1, std::string& x2,
                            std::string& x3_short, std::string& x3_medium, std::string& x4);
    std::string history_json(std::size_t max_days) const;
    void write_checkpoint() const;
    bool try_load_checkpoint();
    void finish_metrics(BacktestReport& report) const;
    void add_event(Date date, std::string kind, std::string detail);

    RunConfig config_;
    RunEnvironment env_;
    std::unique_ptr<agents::AgentInvoker> invoker_;
    std::vector<market::Bar> bars_;
    std::vector<std::pair<Date, bool>> schedule_;  // (day, is_warmup)
    std::size_t first_test_index_ = 0;
    std::size_t next_index_ = 0;
    portfolio::Portfolio portfolio_;
    AgentState state_;
    analytics::EquityCurve equity_;
    std::vector<portfolio::Fill> test_fills_;
    std::vector<Event> events_;
    std::vector<RunLogEntry> run_log_;
    std::string config_digest_;
    bool loaded_ = false;
};

// Resolves through caching wrappers to the scripted backend, when there is one.
std::shared_ptr<llm::ScriptedBackend> find_scripted(const std::shared_ptr<llm::ChatBackend>&);

} // namespace finvision::engine
