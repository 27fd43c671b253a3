#pragma once

#include <string>
#include <vector>

namespace sorso {

// One `key = value` line from a config-style file.
struct KvEntry {
    int line = 0;
    std::string key;
    std::string value;
};

// Parses line-oriented `key = value` text. '#' starts a comment, blank lines
// are skipped, keys are [a-z0-9_]+, duplicate keys are rejected.
// Throws ConfigError with a line number on malformed input.
std::vector<KvEntry> parse_kv_text(const std::string& text, const std::string& source_name);

// Reads the file and parses it. Throws ConfigError when unreadable.
std::vector<KvEntry> parse_kv_file(const std::string& path);

// Value conversion helpers; all throw ConfigError naming key and line.
double kv_to_real(const KvEntry& e);
int kv_to_int(const KvEntry& e);
bool kv_to_on_off(const KvEntry& e);
std::vector<double> kv_to_real_list(const KvEntry& e);
std::vector<std::uint64_t> kv_to_u64_list(const KvEntry& e);

// Formats a double with 17 significant digits (exact round-trip).
std::string format_real(double v);

}  // namespace sorso
