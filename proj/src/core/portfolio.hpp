#pragma once

#include "core/date.hpp"
#include "core/decision.hpp"

#include <optional>
#include <string>
#include <vector>

namespace finvision::portfolio {

// Cash/share accounting for a single-ticker run. Fractional shares are the
// default so value conservation at fills stays exact.
struct Portfolio {
    double cash = 0;
    double shares = 0;
    double avg_purchase_price = 0;  // meaningful only while shares > 0
    double initial_capital = 0;

    static Portfolio with_capital(double capital);
    double total_value(double price) const { return cash + shares * price; }
};

struct PortfolioSnapshot {
    Date date;
    double price = 0;
    double cash = 0;
    double shares = 0;
    double avg_purchase_price = 0;
    double total_value = 0;
    double cash_percentage = 0;    // cash / total * 100
    double unrealized_pl = 0;      // (price - avg) * shares, 0 with no position
    double unrealized_pct = 0;     // (price - avg) / avg * 100, 0 with no position
};

using agents::Action;

struct Fill {
    Date date;
    Action action = Action::hold;
    double shares = 0;        // > 0
    double price = 0;
    int requested_pct = 0;
    double executed_pct = 0;  // <= requested_pct after clamping
    double cash_after = 0;    // post-trade portfolio, for the fill log
    double shares_after = 0;
};

// Rule outcomes that are reported, never thrown.
struct RuleEvent {
    std::string kind;  // cash_reserve_clamped | cash_reserve_blocked | no_position_to_sell
    std::string detail;
};

struct ExecutionResult {
    Portfolio portfolio;
    std::optional<Fill> fill;
    std::vector<RuleEvent> events;
};

// Applies one decision at the given price under the trading rules:
//   - BUY p%: spend p% of total value, clamped so post-trade cash stays at or
//     above 10% of total value; fully blocked buys become no-ops.
//   - SELL p%: sell p% of total value, capped at the held position.
//   - HOLD: no change.
// Zero transaction costs; total value at the fill price is conserved exactly.
ExecutionResult execute(const Portfolio& portfolio, const agents::TradingDecision& decision,
                        double price, Date date);

PortfolioSnapshot mark_to_market(const Portfolio& portfolio, Date date, double price);

// cur.total_value - prev.total_value.
double daily_reward(const PortfolioSnapshot& prev, const PortfolioSnapshot& cur);

// Minimum cash fraction kept after a BUY.
inline constexpr double kCashReserveFraction = 0.10;

} // namespace finvision::portfolio
