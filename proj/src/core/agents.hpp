#pragma once

#include "core/decision.hpp"
#include "core/gateway.hpp"
#include "core/prompts.hpp"

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace finvision::agents {

// Outcome of parsing decision-agent text. Parsing never fails outright:
// unparsable input degrades to HOLD/0 and the anomalies land in `events`.
struct DecisionParse {
    TradingDecision decision;
    std::vector<std::string> events;  // no_recommendation | size_out_of_range | hold_nonzero_size
};

// Extracts the action from the first `Recommendation:` line, the size from the
// first integer after `Position Size:` (suffixes like "% of portfolio" and
// markdown bold are tolerated) and the explanation after `Explanation:`.
DecisionParse parse_decision(std::string_view text);

// Canonical rendering; parse_decision(format_decision(d)) == d for valid d.
std::string format_decision(const TradingDecision& decision);

struct RoleSettings {
    std::string model = "gpt-4o-mini";
    double temperature = 0.3;
};

using RoleSettingsMap = std::map<AgentRole, RoleSettings>;

// Analysis roles on gpt-4o-mini at 0.3; the decision role on o1-mini at 1.0.
RoleSettingsMap default_role_settings();

struct AgentReply {
    std::string text;
    std::string request_digest;
};

// Renders a role's prompt, attaches chart images for vision roles and runs the
// request through the gateway.
class AgentInvoker {
public:
    AgentInvoker(PromptLibrary prompts, std::shared_ptr<llm::ChatBackend> backend,
                 RoleSettingsMap settings);

    AgentReply invoke(AgentRole role, const PromptContext& context,
                      std::span<const std::vector<std::uint8_t>> images) const;

    const PromptLibrary& prompts() const { return prompts_; }
    const llm::ChatBackend& backend() const { return *backend_; }
    bool backend_supports_concurrency() const { return backend_->supports_concurrency(); }

private:
    PromptLibrary prompts_;
    std::shared_ptr<llm::ChatBackend> backend_;
    RoleSettingsMap settings_;
};

} // namespace finvision::agents
