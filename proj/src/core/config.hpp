#pragma once

#include "core/agents.hpp"
#include "core/engine.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace finvision::app {

struct BackendConfig {
    std::string kind = "http";  // http | scripted | cached-http | cached-scripted
    std::string base_url = "https://api.openai.com/v1";
    std::filesystem::path script_path;
    int timeout_seconds = 120;
    int max_retries = 3;
    int retry_base_ms = 1000;
    int max_concurrent = 4;
};

struct CliConfig {
    engine::RunConfig run;
    BackendConfig backend;
    agents::RoleSettingsMap roles = agents::default_role_settings();
    std::filesystem::path output_dir = "out";
    std::filesystem::path cache_dir = "cache";
    std::filesystem::path prompt_dir;  // empty: use the embedded templates
    bool emit_charts = true;
    std::string log_level = "info";

    void validate() const;
};

// Loads the JSON config file, applies the overrides document (RFC 7386 merge
// patch semantics: overrides replace file values) and resolves relative paths
// against the config file's directory. Flag overrides therefore always win
// over file config, and both end up in the resolved document.
CliConfig load_config(const std::filesystem::path& path, const std::string& overrides_json = "");

// Every effective setting, materialized defaults included. Written as
// config.resolved.json by every command; re-running from it reproduces the
// run under a deterministic backend.
nlohmann::ordered_json resolved_json(const CliConfig& config);

// Builds the configured backend. The API credential comes from the
// FINVISION_API_KEY environment variable, never from the config file.
std::shared_ptr<llm::ChatBackend> make_backend(const CliConfig& config);

} // namespace finvision::app
