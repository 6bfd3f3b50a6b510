#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinsim {

/// Configuration problem: unknown key, bad type, missing file.  Mapped to
/// exit code 2 by the CLI.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat key-value view of an INI-style file:
///
///   experiment = chain
///   seed = 42
///   [levels]
///   values = 0 1 2
///
/// Section keys are addressed as "section.key".  Parsing is strict: every key
/// must be consumed by the experiment that runs, otherwise check_consumed()
/// throws naming the stray key.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    long get_long(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<long> get_longs(const std::string& key) const;

    std::string get_string_or(const std::string& key, const std::string& fallback) const;
    double get_double_or(const std::string& key, double fallback) const;
    long get_long_or(const std::string& key, long fallback) const;

    /// Throws ConfigError naming the first key never read by any getter.
    void check_consumed() const;

    /// Raw key/value pairs in file order, for echoing into result metadata.
    const std::vector<std::pair<std::string, std::string>>& entries() const {
        return entries_;
    }

private:
    std::string raw(const std::string& key) const;

    std::vector<std::pair<std::string, std::string>> entries_;
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> consumed_;
};

}  // namespace spinsim
