#pragma once

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "soundmine/errors.hpp"

namespace soundmine {

// A typed parm-file value. Inference order: int, float, bool, string.
using ParmValue = std::variant<std::int64_t, double, bool, std::string>;

enum class ParmType { Int, Float, Bool, String };

inline ParmType type_of(const ParmValue& v) {
    switch (v.index()) {
        case 0: return ParmType::Int;
        case 1: return ParmType::Float;
        case 2: return ParmType::Bool;
        default: return ParmType::String;
    }
}

inline const char* parm_type_name(ParmType t) {
    switch (t) {
        case ParmType::Int: return "int";
        case ParmType::Float: return "float";
        case ParmType::Bool: return "bool";
        default: return "string";
    }
}

inline std::string to_string(const ParmValue& v) {
    std::ostringstream os;
    switch (v.index()) {
        case 0: os << std::get<std::int64_t>(v); break;
        case 1: os << std::get<double>(v); break;
        case 2: os << (std::get<bool>(v) ? "true" : "false"); break;
        default: os << std::get<std::string>(v); break;
    }
    return os.str();
}

// Detector configuration parsed from a parm-file. Entries keep file order.
class ParmSet {
public:
    std::string detector_id;
    std::string source_path;
    bool validated = false;

    bool contains(std::string_view key) const {
        return index_.find(std::string(key)) != index_.end();
    }

    const ParmValue* find(std::string_view key) const {
        auto it = index_.find(std::string(key));
        return it == index_.end() ? nullptr : &entries_[it->second].second;
    }

    // Inserts or overwrites. Returns false if the key already existed.
    bool set(const std::string& key, ParmValue value) {
        auto it = index_.find(key);
        if (it != index_.end()) {
            entries_[it->second].second = std::move(value);
            return false;
        }
        index_.emplace(key, entries_.size());
        entries_.emplace_back(key, std::move(value));
        return true;
    }

    const std::vector<std::pair<std::string, ParmValue>>& entries() const {
        return entries_;
    }

    std::int64_t get_int(std::string_view key) const {
        return std::get<std::int64_t>(get(key));
    }

    // Int entries coerce to float transparently.
    double get_float(std::string_view key) const {
        const ParmValue& v = get(key);
        if (v.index() == 0) return static_cast<double>(std::get<std::int64_t>(v));
        return std::get<double>(v);
    }

    bool get_bool(std::string_view key) const { return std::get<bool>(get(key)); }

    const std::string& get_string(std::string_view key) const {
        return std::get<std::string>(get(key));
    }

private:
    const ParmValue& get(std::string_view key) const {
        const ParmValue* v = find(key);
        if (!v) throw std::out_of_range("no parm entry named '" + std::string(key) + "'");
        return *v;
    }

    std::vector<std::pair<std::string, ParmValue>> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline bool is_int_literal(std::string_view s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (s[i] < '0' || s[i] > '9') return false;
    return true;
}

inline bool is_float_literal(std::string_view s, double& out) {
    if (s.empty()) return false;
    std::string buf(s);
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(buf.c_str(), &end);
    if (errno != 0 || end != buf.c_str() + buf.size()) return false;
    out = v;
    return true;
}

inline ParmValue infer_value(std::string_view raw) {
    if (is_int_literal(raw)) {
        errno = 0;
        char* end = nullptr;
        std::string buf(raw);
        long long v = std::strtoll(buf.c_str(), &end, 10);
        if (errno == 0 && end == buf.c_str() + buf.size())
            return ParmValue(static_cast<std::int64_t>(v));
    }
    double f;
    if (is_float_literal(raw, f)) return ParmValue(f);
    if (raw == "true") return ParmValue(true);
    if (raw == "false") return ParmValue(false);
    return ParmValue(std::string(raw));
}

}  // namespace detail

// Parses parm-file text: one `key = value` per line, `#` starts a comment,
// surrounding whitespace trimmed, keys case-sensitive, duplicates rejected.
inline ParmSet parse_parm_text(std::string_view text, const std::string& source = "<text>") {
    ParmSet parms;
    parms.source_path = source;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = (eol == std::string_view::npos)
                                    ? text.substr(pos)
                                    : text.substr(pos, eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++line_no;

        std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParmSyntaxError(source + ":" + std::to_string(line_no) +
                                      ": expected 'key = value'",
                                  line_no);
        std::string key(detail::trim(line.substr(0, eq)));
        std::string_view raw = detail::trim(line.substr(eq + 1));
        if (key.empty())
            throw ParmSyntaxError(source + ":" + std::to_string(line_no) + ": empty key",
                                  line_no);
        if (parms.contains(key))
            throw ParmDuplicateKeyError(source + ":" + std::to_string(line_no) +
                                            ": duplicate key '" + key + "'",
                                        line_no);
        parms.set(key, detail::infer_value(raw));
    }
    return parms;
}

inline ParmSet parse_parm_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open parm-file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    ParmSet parms = parse_parm_text(buf.str(), path);
    parms.source_path = path;
    return parms;
}

}  // namespace soundmine
