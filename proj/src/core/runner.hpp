#pragma once

#include "core/config.hpp"
#include "core/engine.hpp"

#include <cstdint>
#include <string>

namespace finvision::app {

// Backtest over the configured windows. Writes report.json, equity.csv,
// fills.csv, decisions.jsonl, run_log.jsonl, summary.md, per-day charts and
// config.resolved.json into the output directory. Throws Error on failure;
// a gateway failure leaves checkpoint.json behind for --resume.
void run_command(const CliConfig& config, bool resume);

// Same report layout for a rule-based strategy: bh | macd | kdj-rsi.
void baseline_command(const CliConfig& config, const std::string& strategy);

// Renders technical_<date>.png and signal_<date>.png exactly as the pipeline
// would feed the agents on that date, plus ChartSpec JSON side-cars. Prior
// decisions are replayed from decisions.jsonl in the output directory when
// present.
void render_command(const CliConfig& config, Date date);

struct CacheStatsResult {
    std::uint64_t entries = 0;
    std::uint64_t bytes = 0;
};

CacheStatsResult cache_stats_command(const std::filesystem::path& dir);
void cache_clear_command(const std::filesystem::path& dir);

} // namespace finvision::app
