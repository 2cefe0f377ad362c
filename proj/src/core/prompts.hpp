#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>

namespace finvision::agents {

enum class AgentRole {
    summarizer,
    technical_analyst,
    reflection_short,
    reflection_medium,
    reflection_visual,
    decision,
};

inline constexpr std::array<AgentRole, 6> kAllRoles = {
    AgentRole::summarizer,      AgentRole::technical_analyst, AgentRole::reflection_short,
    AgentRole::reflection_medium, AgentRole::reflection_visual, AgentRole::decision,
};

const char* role_name(AgentRole role);
AgentRole role_from_name(std::string_view name);  // throws Error::config
bool role_uses_vision(AgentRole role);

using PromptValue = std::variant<std::string, double, std::int64_t>;
using PromptContext = std::map<std::string, PromptValue, std::less<>>;

// Substitutes {name} and {name:.Nf} placeholders. The whole token between the
// braces is the placeholder name; a trailing :.Nf suffix formats a numeric
// value with fixed decimals. Missing placeholders raise Error::invalid naming
// the placeholder; context keys the template never mentions are ignored.
std::string render_template(std::string_view tpl, const PromptContext& context);

// One template per agent role, shipped as plain-text resource files and
// compiled in as the default set.
class PromptLibrary {
public:
    static PromptLibrary embedded();
    // Expects <role_name>.txt for every role.
    static PromptLibrary from_directory(const std::filesystem::path& dir);

    const std::string& text(AgentRole role) const;
    std::string render(AgentRole role, const PromptContext& context) const;

private:
    std::array<std::string, kAllRoles.size()> templates_;
};

} // namespace finvision::agents
