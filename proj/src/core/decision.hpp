#pragma once

#include <string>

namespace finvision::agents {

enum class Action { buy, sell, hold };

const char* action_name(Action a);

// Parsed output of the decision agent. position_size is an integer percent of
// total portfolio value: 0 for HOLD, otherwise within [1, 10].
struct TradingDecision {
    Action action = Action::hold;
    int position_size = 0;
    std::string explanation;

    bool valid() const {
        if (explanation.empty()) return false;
        if (action == Action::hold) return position_size == 0;
        return position_size >= 1 && position_size <= 10;
    }
};

} // namespace finvision::agents
