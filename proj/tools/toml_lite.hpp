#ifndef VCIR_TOML_LITE_HPP
#define VCIR_TOML_LITE_HPP

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace vcir::tomllite {

// Minimal strict TOML subset used for experiment configs: top-level and
// [section] key/value pairs, inline tables { k = v, ... }, arrays of
// scalars, strings, numbers, booleans, # comments. Duplicate keys and
// malformed input raise config_error.
struct Value;
using Table = std::map<std::string, Value>;
using Array = std::vector<Value>;

struct Value {
    std::variant<std::string, double, std::int64_t, bool, Array, Table> data;

    bool is_table() const { return std::holds_alternative<Table>(data); }
    bool is_array() const { return std::holds_alternative<Array>(data); }
    bool is_string() const { return std::holds_alternative<std::string>(data); }
    bool is_bool() const { return std::holds_alternative<bool>(data); }
    bool is_number() const {
        return std::holds_alternative<double>(data) || std::holds_alternative<std::int64_t>(data);
    }
    double as_number() const;
    std::int64_t as_integer() const;
    const std::string& as_string() const;
    bool as_bool() const;
    const Table& as_table() const;
    const Array& as_array() const;
};

Table parse(const std::string& text, const std::string& source_name);
Table parse_file(const std::string& path);

} // namespace vcir::tomllite

#endif
