#pragma once

#include <stdexcept>
#include <string>

namespace shockflow {

/// A solver stage failed to produce a trustworthy number.
class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// Invalid user-supplied configuration. Always names the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace shockflow
