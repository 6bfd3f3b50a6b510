#include "spinsim/config.hpp"

#include <fstream>
#include <sstream>

namespace spinsim {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

Config Config::parse_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("malformed section header at line " +
                                  std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("empty section name at line " +
                                  std::to_string(lineno));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value' at line " +
                              std::to_string(lineno));
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("empty key at line " + std::to_string(lineno));
        if (!section.empty()) key = section + "." + key;
        if (cfg.values_.count(key))
            throw ConfigError("duplicate key '" + key + "' at line " +
                              std::to_string(lineno));
        cfg.values_[key] = value;
        cfg.entries_.emplace_back(key, value);
    }
    return cfg;
}

bool Config::has(const std::string& key) const {
    const bool present = values_.count(key) > 0;
    if (present) consumed_.insert(key);
    return present;
}

std::string Config::raw(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end())
        throw ConfigError("missing required key '" + key + "'");
    consumed_.insert(key);
    return it->second;
}

std::string Config::get_string(const std::string& key) const { return raw(key); }

double Config::get_double(const std::string& key) const {
    const std::string v = raw(key);
    std::size_t pos = 0;
    double out;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' is not a number: '" + v + "'");
    }
    if (pos != v.size())
        throw ConfigError("trailing characters in numeric key '" + key + "'");
    return out;
}

long Config::get_long(const std::string& key) const {
    const std::string v = raw(key);
    std::size_t pos = 0;
    long out;
    try {
        out = std::stol(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' is not an integer: '" + v + "'");
    }
    if (pos != v.size())
        throw ConfigError("trailing characters in integer key '" + key + "'");
    return out;
}

std::uint64_t Config::get_u64(const std::string& key) const {
    const std::string v = raw(key);
    std::size_t pos = 0;
    unsigned long long out;
    try {
        out = std::stoull(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' is not an unsigned integer: '" + v + "'");
    }
    if (pos != v.size())
        throw ConfigError("trailing characters in integer key '" + key + "'");
    return out;
}

std::vector<double> Config::get_doubles(const std::string& key) const {
    std::istringstream in(raw(key));
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "' has non-numeric entry '" + tok + "'");
        }
    }
    if (out.empty()) throw ConfigError("key '" + key + "' is an empty list");
    return out;
}

std::vector<long> Config::get_longs(const std::string& key) const {
    std::istringstream in(raw(key));
    std::vector<long> out;
    std::string tok;
    while (in >> tok) {
        try {
            out.push_back(std::stol(tok));
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "' has non-integer entry '" + tok + "'");
        }
    }
    if (out.empty()) throw ConfigError("key '" + key + "' is an empty list");
    return out;
}

std::string Config::get_string_or(const std::string& key,
                                  const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}

double Config::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long Config::get_long_or(const std::string& key, long fallback) const {
    return has(key) ? get_long(key) : fallback;
}

void Config::check_consumed() const {
    for (const auto& [key, value] : entries_)
        if (!consumed_.count(key))
            throw ConfigError("unknown key '" + key + "'");
}

}  // namespace spinsim
