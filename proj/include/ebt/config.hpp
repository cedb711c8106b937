#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

namespace ebt {

/// Ordered key -> value pairs from a `key = value` text.
///
/// Grammar: one pair per line; `#` starts a comment; blank lines are skipped;
/// whitespace around keys and values is trimmed. Repeated keys keep the last value.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream &in);
KeyValues load_key_values(const std::filesystem::path &path);

double parse_double(const std::string &text, const std::string &key);
long parse_long(const std::string &text, const std::string &key);

std::optional<double> find_double(const KeyValues &kv, const std::string &key);

} // namespace ebt
