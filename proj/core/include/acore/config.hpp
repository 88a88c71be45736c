#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace acore {

/// Flat key-value configuration with optional `[section]` headers.
///
///     # comment
///     [model]
///     name = poisson_counting
///     lower = 0
///     upper = 20
///
/// Keys are addressed as "section.key" ("key" for entries before the first
/// header). Every lookup error reports the line of the offending entry.
class KeyValueConfig {
public:
    struct Entry {
        std::string value;
        std::size_t line = 0;
    };

    static KeyValueConfig parse(std::string_view text);
    static KeyValueConfig load(const std::filesystem::path& path);

    const std::string& text() const noexcept { return text_; }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    const Entry* find(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;

    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;

    std::uint64_t get_u64(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

    /// Comma-separated list of reals.
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;

    /// Comma-separated list of non-negative integers.
    std::vector<std::uint64_t> get_counts(const std::string& key) const;
    std::vector<std::uint64_t> get_counts(const std::string& key,
                                          std::vector<std::uint64_t> fallback) const;

    /// Sets or replaces a value (used for command-line overrides).
    void set(const std::string& key, std::string value);

    /// Throws ConfigError for the first key not in `known`.
    void require_known(const std::set<std::string>& known) const;

    const std::map<std::string, Entry>& entries() const noexcept { return entries_; }

private:
    std::string text_;
    std::map<std::string, Entry> entries_;
};

/// 64-bit FNV-1a; used for config hashes in run manifests.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

} // namespace acore
