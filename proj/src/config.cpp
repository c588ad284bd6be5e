#include "cartograf/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "cartograf/errors.hpp"

namespace cartograf::config {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// strips an optional surrounding quote pair
std::string unquote(const std::string& s, const std::string& where) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    if (!s.empty() && (s.front() == '"' || s.back() == '"'))
        throw DataError(where + ": unbalanced quotes in `" + s + "`");
    return s;
}

// splits "a, b, c" and trims each piece
std::vector<std::string> split_list(const std::string& body, const std::string& where) {
    std::vector<std::string> items;
    std::string cur;
    bool in_quotes = false;
    for (char c : body) {
        if (c == '"') in_quotes = !in_quotes;
        if (c == ',' && !in_quotes) {
            items.push_back(unquote(trim(cur), where));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!trim(cur).empty() || !items.empty()) items.push_back(unquote(trim(cur), where));
    if (in_quotes) throw DataError(where + ": unbalanced quotes");
    // an empty trailing element means a stray comma
    for (const auto& it : items)
        if (it.empty()) throw DataError(where + ": empty list element");
    return items;
}

} // namespace

KeyValues KeyValues::parse_text(const std::string& text, const std::string& origin) {
    KeyValues kv;
    kv.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        const std::string where = origin + ":" + std::to_string(row);
        // strip comments outside quotes
        bool in_quotes = false;
        for (size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_quotes = !in_quotes;
            if (line[i] == '#' && !in_quotes) {
                line = line.substr(0, i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw DataError(where + ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw DataError(where + ": empty section name");
            continue;
        }

        size_t eq = line.find('=');
        if (eq == std::string::npos) throw DataError(where + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw DataError(where + ": empty key");
        if (!section.empty()) key = section + "." + key;
        if (kv.scalars_.count(key) != 0 || kv.lists_.count(key) != 0)
            throw DataError(where + ": duplicate key " + key);

        if (!value.empty() && value.front() == '[') {
            if (value.back() != ']') throw DataError(where + ": unterminated list");
            kv.lists_[key] = split_list(value.substr(1, value.size() - 2), where);
        } else {
            kv.scalars_[key] = unquote(value, where);
        }
    }
    return kv;
}

KeyValues KeyValues::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
}

bool KeyValues::has(const std::string& key) const {
    return scalars_.count(key) != 0 || lists_.count(key) != 0;
}

const std::string* KeyValues::find_scalar(const std::string& key) const {
    auto it = scalars_.find(key);
    if (it == scalars_.end()) {
        if (lists_.count(key) != 0)
            throw DataError(origin_ + ": key " + key + " is a list, expected a scalar");
        return nullptr;
    }
    read_.insert(key);
    return &it->second;
}

long long KeyValues::get_int(const std::string& key, long long fallback) const {
    const std::string* v = find_scalar(key);
    if (v == nullptr) return fallback;
    try {
        size_t pos = 0;
        long long r = std::stoll(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing");
        return r;
    } catch (const std::exception&) {
        throw DataError(origin_ + ": key " + key + ": not an integer: `" + *v + "`");
    }
}

uint64_t KeyValues::get_u64(const std::string& key, uint64_t fallback) const {
    const std::string* v = find_scalar(key);
    if (v == nullptr) return fallback;
    try {
        size_t pos = 0;
        unsigned long long r = std::stoull(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing");
        return r;
    } catch (const std::exception&) {
        throw DataError(origin_ + ": key " + key + ": not an unsigned integer: `" + *v + "`");
    }
}

double KeyValues::get_double(const std::string& key, double fallback) const {
    const std::string* v = find_scalar(key);
    if (v == nullptr) return fallback;
    try {
        size_t pos = 0;
        double r = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing");
        return r;
    } catch (const std::exception&) {
        throw DataError(origin_ + ": key " + key + ": not a number: `" + *v + "`");
    }
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
    const std::string* v = find_scalar(key);
    if (v == nullptr) return fallback;
    if (*v == "true") return true;
    if (*v == "false") return false;
    throw DataError(origin_ + ": key " + key + ": expected true|false, got `" + *v + "`");
}

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) const {
    const std::string* v = find_scalar(key);
    return v == nullptr ? fallback : *v;
}

std::vector<std::string> KeyValues::get_string_list(
    const std::string& key, const std::vector<std::string>& fallback) const {
    auto it = lists_.find(key);
    if (it == lists_.end()) {
        if (scalars_.count(key) != 0)
            throw DataError(origin_ + ": key " + key + " is a scalar, expected a list");
        return fallback;
    }
    read_.insert(key);
    return it->second;
}

std::vector<int> KeyValues::get_int_list(const std::string& key,
                                         const std::vector<int>& fallback) const {
    auto it = lists_.find(key);
    if (it == lists_.end()) {
        if (scalars_.count(key) != 0)
            throw DataError(origin_ + ": key " + key + " is a scalar, expected a list");
        return fallback;
    }
    read_.insert(key);
    std::vector<int> out;
    for (const auto& s : it->second) {
        try {
            size_t pos = 0;
            out.push_back(std::stoi(s, &pos));
            if (pos != s.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw DataError(origin_ + ": key " + key + ": not an integer: `" + s + "`");
        }
    }
    return out;
}

std::vector<std::string> KeyValues::unread_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : scalars_)
        if (read_.count(k) == 0) out.push_back(k);
    for (const auto& [k, v] : lists_)
        if (read_.count(k) == 0) out.push_back(k);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace cartograf::config
