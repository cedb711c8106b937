#include "ebt/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <stdexcept>

namespace ebt {

namespace {

std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

KeyValues parse_key_values(std::istream &in) {
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        }
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

KeyValues load_key_values(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file " + path.string());
    }
    return parse_key_values(in);
}

double parse_double(const std::string &text, const std::string &key) {
    double v = 0.0;
    const char *end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || text.empty()) {
        throw std::invalid_argument("'" + key + "': not a number: '" + text + "'");
    }
    return v;
}

long parse_long(const std::string &text, const std::string &key) {
    long v = 0;
    const char *end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || text.empty()) {
        throw std::invalid_argument("'" + key + "': not an integer: '" + text + "'");
    }
    return v;
}

std::optional<double> find_double(const KeyValues &kv, const std::string &key) {
    const auto it = kv.find(key);
    if (it == kv.end()) {
        return std::nullopt;
    }
    return parse_double(it->second, key);
}

} // namespace ebt
