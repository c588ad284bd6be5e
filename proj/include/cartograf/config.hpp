#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace cartograf::config {

/// Flat key-value config file, TOML-shaped. Supported syntax:
///   key = value            scalars: integer, real, bool, "string"
///   key = [a, b, c]        lists of the same scalars
///   [section]              prefixes following keys with "section."
///   # comment
/// Unknown keys are reported as errors by callers via consume tracking.
class KeyValues {
public:
    static KeyValues parse_text(const std::string& text, const std::string& origin);
    static KeyValues parse_file(const std::string& path);

    bool has(const std::string& key) const;

    // Typed getters; the default is returned when the key is absent.
    // Conversion failures throw DataError naming the key.
    long long get_int(const std::string& key, long long fallback) const;
    uint64_t get_u64(const std::string& key, uint64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::vector<std::string> get_string_list(const std::string& key,
                                             const std::vector<std::string>& fallback) const;
    std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;

    /// Keys present in the file but never read by any getter; used to
    /// reject typos after a config struct has been populated.
    std::vector<std::string> unread_keys() const;

private:
    std::string origin_;
    std::map<std::string, std::string> scalars_;
    std::map<std::string, std::vector<std::string>> lists_;
    mutable std::set<std::string> read_;

    const std::string* find_scalar(const std::string& key) const;
};

} // namespace cartograf::config
