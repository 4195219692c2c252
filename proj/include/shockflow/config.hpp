#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "shockflow/legendre.hpp"

namespace shockflow {

enum class KeyType { real, integer, text, choice, real_list, vector_list };

/// One accepted configuration key with its range and default.
struct KeySpec {
    std::string key;
    KeyType type;
    std::string default_value;  ///< empty: optional with no default
    double lo = -1e300;
    double hi = 1e300;
    std::vector<std::string> choices;
    std::string help;
};

const std::vector<KeySpec>& config_schema();

/// Flat key = value configuration with dotted section names. `[section]`
/// headers are also accepted and prefix the keys that follow them.
class ExperimentConfig {
public:
    static ExperimentConfig from_file(const std::filesystem::path& path);
    static ExperimentConfig from_string(const std::string& text);
    static ExperimentConfig from_map(const std::map<std::string, std::string>& entries);

    bool has(const std::string& key) const;
    double real(const std::string& key) const;
    long long integer(const std::string& key) const;
    std::string text(const std::string& key) const;
    std::vector<double> reals(const std::string& key) const;
    /// Semicolon-separated vectors with comma-separated components.
    std::vector<Vec> vectors(const std::string& key) const;

    std::string experiment() const { return text("experiment"); }
    /// Keys given explicitly, in sorted order.
    const std::map<std::string, std::string>& given() const noexcept { return given_; }
    /// Explicit keys plus defaults of every schema key that has one.
    std::map<std::string, std::string> resolved() const;

private:
    void validate() const;
    const KeySpec& spec(const std::string& key) const;
    std::string raw(const std::string& key) const;

    std::map<std::string, std::string> given_;
};

std::vector<double> parse_reals(const std::string& key, const std::string& text);

}  // namespace shockflow
