#include "acore/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "acore/error.hpp"

namespace acore {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    return out;
}

double parse_double(const std::string& token, const std::string& key, std::size_t line) {
    if (token.empty()) throw ConfigError("key '" + key + "' expects a number", line);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(token.c_str(), &end);
    if (errno != 0 || end == token.c_str() || *end != '\0')
        throw ConfigError("key '" + key + "': '" + token + "' is not a number", line);
    return v;
}

std::uint64_t parse_u64(const std::string& token, const std::string& key, std::size_t line) {
    if (token.empty() || token.front() == '-')
        throw ConfigError("key '" + key + "' expects a non-negative integer", line);
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(token.c_str(), &end, 10);
    if (errno != 0 || end == token.c_str() || *end != '\0')
        throw ConfigError("key '" + key + "': '" + token + "' is not a non-negative integer", line);
    return static_cast<std::uint64_t>(v);
}

} // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
    KeyValueConfig cfg;
    cfg.text_ = std::string(text);

    std::string section;
    std::size_t line_no = 0;
    std::istringstream in(cfg.text_);
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find_first_of("#;");
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError("empty section name", line_no);
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ConfigError("missing key before '='", line_no);

        const std::string full = section.empty() ? key : section + "." + key;
        if (cfg.entries_.count(full))
            throw ConfigError("duplicate key '" + full + "' (first set on line " +
                                  std::to_string(cfg.entries_[full].line) + ")",
                              line_no);
        cfg.entries_[full] = Entry{value, line_no};
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

const KeyValueConfig::Entry* KeyValueConfig::find(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

std::string KeyValueConfig::get_string(const std::string& key) const {
    const auto* e = find(key);
    if (!e) throw ConfigError("missing required key '" + key + "'");
    return e->value;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    const auto* e = find(key);
    return e ? e->value : fallback;
}

double KeyValueConfig::get_double(const std::string& key) const {
    const auto* e = find(key);
    if (!e) throw ConfigError("missing required key '" + key + "'");
    return parse_double(e->value, key, e->line);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key) const {
    const auto* e = find(key);
    if (!e) throw ConfigError("missing required key '" + key + "'");
    return parse_u64(e->value, key, e->line);
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? get_u64(key) : fallback;
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key) const {
    const auto* e = find(key);
    if (!e) throw ConfigError("missing required key '" + key + "'");
    std::vector<double> out;
    for (const auto& tok : split_list(e->value)) out.push_back(parse_double(tok, key, e->line));
    if (out.empty()) throw ConfigError("key '" + key + "' expects at least one value", e->line);
    return out;
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key,
                                                std::vector<double> fallback) const {
    return has(key) ? get_doubles(key) : fallback;
}

std::vector<std::uint64_t> KeyValueConfig::get_counts(const std::string& key) const {
    const auto* e = find(key);
    if (!e) throw ConfigError("missing required key '" + key + "'");
    std::vector<std::uint64_t> out;
    for (const auto& tok : split_list(e->value)) out.push_back(parse_u64(tok, key, e->line));
    if (out.empty()) throw ConfigError("key '" + key + "' expects at least one value", e->line);
    return out;
}

std::vector<std::uint64_t> KeyValueConfig::get_counts(const std::string& key,
                                                      std::vector<std::uint64_t> fallback) const {
    return has(key) ? get_counts(key) : fallback;
}

void KeyValueConfig::set(const std::string& key, std::string value) {
    auto& e = entries_[key];
    e.value = std::move(value);
}

void KeyValueConfig::require_known(const std::set<std::string>& known) const {
    for (const auto& [key, entry] : entries_)
        if (!known.count(key)) throw ConfigError("unknown key '" + key + "'", entry.line);
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace acore
