#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace finvision {

// Single exception type for the library. The kind maps onto the C API error
// codes and the CLI exit-code taxonomy (config=2, data=3, gateway=4).
class Error : public std::runtime_error {
public:
    enum class Kind { config, data, gateway, chart, invalid, internal };

    Error(Kind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    Kind kind() const { return kind_; }

    static Error config(std::string m)   { return {Kind::config, std::move(m)}; }
    static Error data(std::string m)     { return {Kind::data, std::move(m)}; }
    static Error gateway(std::string m)  { return {Kind::gateway, std::move(m)}; }
    static Error chart(std::string m)    { return {Kind::chart, std::move(m)}; }
    static Error invalid(std::string m)  { return {Kind::invalid, std::move(m)}; }
    static Error internal(std::string m) { return {Kind::internal, std::move(m)}; }

private:
    Kind kind_;
};

} // namespace finvision
