#include "sorso/kv.hpp"

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "sorso/errors.hpp"

namespace sorso {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k) {
        if (!(std::islower(static_cast<unsigned char>(c)) ||
              std::isdigit(static_cast<unsigned char>(c)) || c == '_'))
            return false;
    }
    return true;
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& msg) {
    std::ostringstream os;
    os << source << ":" << line << ": " << msg;
    throw ConfigError(os.str());
}

std::vector<std::string> split_commas(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : v) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

}  // namespace

std::vector<KvEntry> parse_kv_text(const std::string& text, const std::string& source_name) {
    std::vector<KvEntry> out;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        std::string s = trim(raw);
        if (s.empty()) continue;
        auto eq = s.find('=');
        if (eq == std::string::npos) fail(source_name, line, "expected `key = value`");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (!valid_key(key)) fail(source_name, line, "bad key `" + key + "`");
        if (value.empty()) fail(source_name, line, "empty value for key `" + key + "`");
        if (!seen.insert(key).second) fail(source_name, line, "duplicate key `" + key + "`");
        out.push_back({line, key, value});
    }
    return out;
}

std::vector<KvEntry> parse_kv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_kv_text(buf.str(), path);
}

double kv_to_real(const KvEntry& e) {
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(e.value.c_str(), &end);
    if (end == e.value.c_str() || *end != '\0' || errno == ERANGE)
        throw ConfigError("line " + std::to_string(e.line) + ": key `" + e.key +
                          "`: not a real number: " + e.value);
    return v;
}

int kv_to_int(const KvEntry& e) {
    errno = 0;
    char* end = nullptr;
    long v = std::strtol(e.value.c_str(), &end, 10);
    if (end == e.value.c_str() || *end != '\0' || errno == ERANGE)
        throw ConfigError("line " + std::to_string(e.line) + ": key `" + e.key +
                          "`: not an integer: " + e.value);
    return static_cast<int>(v);
}

bool kv_to_on_off(const KvEntry& e) {
    if (e.value == "on") return true;
    if (e.value == "off") return false;
    throw ConfigError("line " + std::to_string(e.line) + ": key `" + e.key +
                      "`: expected on|off, got: " + e.value);
}

std::vector<double> kv_to_real_list(const KvEntry& e) {
    std::vector<double> out;
    for (const auto& part : split_commas(e.value)) {
        KvEntry item{e.line, e.key, part};
        out.push_back(kv_to_real(item));
    }
    return out;
}

std::vector<std::uint64_t> kv_to_u64_list(const KvEntry& e) {
    std::vector<std::uint64_t> out;
    for (const auto& part : split_commas(e.value)) {
        errno = 0;
        char* end = nullptr;
        unsigned long long v = std::strtoull(part.c_str(), &end, 10);
        if (end == part.c_str() || *end != '\0' || errno == ERANGE)
            throw ConfigError("line " + std::to_string(e.line) + ": key `" + e.key +
                              "`: not an unsigned integer: " + part);
        out.push_back(v);
    }
    return out;
}

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace sorso
