#include "core/portfolio.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace finvision::portfolio {
namespace {

struct Settled {
    double shares;
    double cash;
};

// Double-entry residual absorption: settle the post-trade (shares, cash) pair
// so that cash + shares*price == total holds exactly in doubles. Stepping
// cash alone can get stuck when the real sums sit exactly on rounding
// midpoints (round-half-even then skips every other double), so the share
// count is the second degree of freedom; each candidate is at most two ulps
// from the target, far below any economic meaning.
Settled settle_exact(double total, double shares_target, double price) {
    const double inf = std::numeric_limits<double>::infinity();
    const double steps[] = {0.0, -1.0, 1.0, -2.0, 2.0};
    for (double step : steps) {
        double s = shares_target;
        for (int k = 0; k < static_cast<int>(std::abs(step)); ++k) {
            s = std::nextafter(s, step < 0 ? -inf : inf);
        }
        if (s < 0) continue;
        const double position = s * price;
        double c = total - position;
        for (int k = 0; k < 6 && c + position != total; ++k) {
            c = std::nextafter(c, c + position < total ? inf : -inf);
        }
        if (c + position == total && c >= 0) return {s, c};
    }
    return {shares_target, total - shares_target * price};
}

} // namespace

Portfolio Portfolio::with_capital(double capital) {
    if (capital <= 0) throw Error::invalid("initial capital must be positive");
    Portfolio p;
    p.cash = capital;
    p.initial_capital = capital;
    return p;
}

ExecutionResult execute(const Portfolio& portfolio, const agents::TradingDecision& decision,
                        double price, Date date) {
    if (price <= 0) throw Error::invalid("execution price must be positive");

    ExecutionResult result;
    result.portfolio = portfolio;

    const double position0 = portfolio.shares * price;
    const double total = portfolio.cash + position0;

    switch (decision.action) {
        case Action::hold:
            return result;

        case Action::buy: {
            const double target = decision.position_size / 100.0 * total;
            const double max_spend = portfolio.cash - kCashReserveFraction * total;
            const double spend = std::min(target, max_spend);
            if (spend <= 0) {
                result.events.push_back({"cash_reserve_blocked",
                                         "BUY " + std::to_string(decision.position_size) +
                                             "% would breach the 10% cash reserve; order dropped"});
                return result;
            }
            if (spend < target) {
                result.events.push_back({"cash_reserve_clamped",
                                         "BUY trimmed to keep 10% of portfolio value in cash"});
            }

            Settled settled = settle_exact(total, portfolio.shares + spend / price, price);
            const double bought = settled.shares - portfolio.shares;
            const double position1 = settled.shares * price;

            Portfolio next = portfolio;
            next.shares = settled.shares;
            next.cash = settled.cash;
            next.avg_purchase_price =
                (portfolio.shares * portfolio.avg_purchase_price + bought * price) /
                settled.shares;

            Fill fill;
            fill.date = date;
            fill.action = Action::buy;
            fill.shares = bought;
            fill.price = price;
            fill.requested_pct = decision.position_size;
            fill.executed_pct =
                std::min((position1 - position0) / total * 100.0,
                         static_cast<double>(decision.position_size));
            fill.cash_after = next.cash;
            fill.shares_after = next.shares;

            result.portfolio = next;
            result.fill = fill;
            return result;
        }

        case Action::sell: {
            if (portfolio.shares <= 0) {
                result.events.push_back(
                    {"no_position_to_sell", "SELL with no shares held; order dropped"});
                return result;
            }
            const double target_shares = decision.position_size / 100.0 * total / price;
            const double sold = std::min(target_shares, portfolio.shares);
            const double shares_left = sold >= portfolio.shares ? 0.0 : portfolio.shares - sold;
            Settled settled = settle_exact(total, shares_left, price);
            const double position1 = settled.shares * price;

            Portfolio next = portfolio;
            next.shares = settled.shares;
            next.cash = settled.cash;
            // avg purchase price unchanged on SELL

            Fill fill;
            fill.date = date;
            fill.action = Action::sell;
            fill.shares = portfolio.shares - settled.shares;
            fill.price = price;
            fill.requested_pct = decision.position_size;
            fill.executed_pct =
                std::min((position0 - position1) / total * 100.0,
                         static_cast<double>(decision.position_size));
            fill.cash_after = next.cash;
            fill.shares_after = next.shares;

            result.portfolio = next;
            result.fill = fill;
            return result;
        }
    }
    return result;
}

PortfolioSnapshot mark_to_market(const Portfolio& portfolio, Date date, double price) {
    if (price <= 0) throw Error::invalid("mark-to-market price must be positive");

    PortfolioSnapshot snap;
    snap.date = date;
    snap.price = price;
    snap.cash = portfolio.cash;
    snap.shares = portfolio.shares;
    snap.avg_purchase_price = portfolio.avg_purchase_price;
    snap.total_value = portfolio.cash + portfolio.shares * price;
    snap.cash_percentage = snap.total_value > 0 ? portfolio.cash / snap.total_value * 100.0 : 0.0;
    if (portfolio.shares > 0) {
        snap.unrealized_pl = (price - portfolio.avg_purchase_price) * portfolio.shares;
        snap.unrealized_pct = portfolio.avg_purchase_price > 0
                                  ? (price - portfolio.avg_purchase_price) /
                                        portfolio.avg_purchase_price * 100.0
                                  : 0.0;
    }
    return snap;
}

double daily_reward(const PortfolioSnapshot& prev, const PortfolioSnapshot& cur) {
    return cur.total_value - prev.total_value;
}

} // namespace finvision::portfolio
