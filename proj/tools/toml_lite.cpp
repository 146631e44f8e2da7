#include "toml_lite.hpp"

#include "vcir/errors.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

namespace vcir::tomllite {

double Value::as_number() const {
    if (std::holds_alternative<double>(data)) return std::get<double>(data);
    if (std::holds_alternative<std::int64_t>(data))
        return static_cast<double>(std::get<std::int64_t>(data));
    throw config_error("expected a number");
}

std::int64_t Value::as_integer() const {
    if (std::holds_alternative<std::int64_t>(data)) return std::get<std::int64_t>(data);
    throw config_error("expected an integer");
}

const std::string& Value::as_string() const {
    if (!is_string()) throw config_error("expected a string");
    return std::get<std::string>(data);
}

bool Value::as_bool() const {
    if (!is_bool()) throw config_error("expected a boolean");
    return std::get<bool>(data);
}

const Table& Value::as_table() const {
    if (!is_table()) throw config_error("expected a table");
    return std::get<Table>(data);
}

const Array& Value::as_array() const {
    if (!is_array()) throw config_error("expected an array");
    return std::get<Array>(data);
}

namespace {

struct Cursor {
    const std::string& text;
    std::size_t pos = 0;
    const std::string& source;
    int line = 1;

    [[noreturn]] void fail(const std::string& what) const {
        throw config_error(source + ":" + std::to_string(line) + ": " + what);
    }
    bool eof() const { return pos >= text.size(); }
    char peek() const { return eof() ? '\0' : text[pos]; }
    char take() {
        const char c = text[pos++];
        if (c == '\n') ++line;
        return c;
    }
    // spaces and tabs only; newlines are significant outside values
    void skip_blanks() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos;
    }
    void skip_comment_to_eol() {
        while (!eof() && peek() != '\n') ++pos;
    }
};

bool is_bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string parse_key(Cursor& c) {
    c.skip_blanks();
    std::string key;
    while (!c.eof() && is_bare_key_char(c.peek())) key.push_back(c.take());
    if (key.empty()) c.fail("expected a key");
    return key;
}

Value parse_value(Cursor& c);

std::string parse_string(Cursor& c) {
    c.take(); // opening quote
    std::string out;
    while (true) {
        if (c.eof()) c.fail("unterminated string");
        char ch = c.take();
        if (ch == '"') break;
        if (ch == '\n') c.fail("newline inside string");
        if (ch == '\\') {
            if (c.eof()) c.fail("dangling escape");
            const char e = c.take();
            switch (e) {
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                default: c.fail(std::string("unsupported escape \\") + e);
            }
        } else {
            out.push_back(ch);
        }
    }
    return out;
}

Value parse_number(Cursor& c) {
    std::string tok;
    while (!c.eof()) {
        const char ch = c.peek();
        if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '+' || ch == '-' || ch == '.' ||
            ch == 'e' || ch == 'E' || ch == 'x' || std::isalpha(static_cast<unsigned char>(ch))) {
            tok.push_back(c.take());
        } else {
            break;
        }
    }
    if (tok.empty()) c.fail("expected a number");
    const bool floaty = tok.find_first_of(".eE") != std::string::npos || tok == "inf" ||
                        tok == "+inf" || tok == "-inf" || tok == "nan";
    if (!floaty) {
        std::int64_t iv = 0;
        const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), iv);
        if (ec == std::errc() && p == tok.data() + tok.size()) return Value{iv};
    }
    try {
        std::size_t used = 0;
        const double dv = std::stod(tok, &used);
        if (used != tok.size()) c.fail("malformed number '" + tok + "'");
        return Value{dv};
    } catch (const std::exception&) {
        c.fail("malformed number '" + tok + "'");
    }
}

Value parse_inline_table(Cursor& c) {
    c.take(); // '{'
    Table t;
    c.skip_blanks();
    if (c.peek() == '}') {
        c.take();
        return Value{t};
    }
    while (true) {
        const std::string key = parse_key(c);
        c.skip_blanks();
        if (c.peek() != '=') c.fail("expected '=' in inline table");
        c.take();
        c.skip_blanks();
        if (!t.emplace(key, parse_value(c)).second) c.fail("duplicate key '" + key + "'");
        c.skip_blanks();
        const char ch = c.peek();
        if (ch == ',') {
            c.take();
            c.skip_blanks();
            continue;
        }
        if (ch == '}') {
            c.take();
            return Value{t};
        }
        c.fail("expected ',' or '}' in inline table");
    }
}

Value parse_array(Cursor& c) {
    c.take(); // '['
    Array a;
    c.skip_blanks();
    if (c.peek() == ']') {
        c.take();
        return Value{a};
    }
    while (true) {
        c.skip_blanks();
        a.push_back(parse_value(c));
        c.skip_blanks();
        const char ch = c.peek();
        if (ch == ',') {
            c.take();
            continue;
        }
        if (ch == ']') {
            c.take();
            return Value{a};
        }
        c.fail("expected ',' or ']' in array");
    }
}

Value parse_value(Cursor& c) {
    c.skip_blanks();
    const char ch = c.peek();
    if (ch == '"') return Value{parse_string(c)};
    if (ch == '{') return parse_inline_table(c);
    if (ch == '[') return parse_array(c);
    if (std::isalpha(static_cast<unsigned char>(ch))) {
        std::string word;
        while (!c.eof() && (is_bare_key_char(c.peek()))) word.push_back(c.take());
        if (word == "true") return Value{true};
        if (word == "false") return Value{false};
        if (word == "inf") return Value{std::numeric_limits<double>::infinity()};
        if (word == "nan") return Value{std::numeric_limits<double>::quiet_NaN()};
        c.fail("unexpected token '" + word + "'");
    }
    return parse_number(c);
}

} // namespace

Table parse(const std::string& text, const std::string& source_name) {
    Cursor c{text, 0, source_name};
    Table root;
    Table* current = &root;
    std::string section;
    while (!c.eof()) {
        c.skip_blanks();
        if (c.eof()) break;
        const char ch = c.peek();
        if (ch == '\n') {
            c.take();
            continue;
        }
        if (ch == '#') {
            c.skip_comment_to_eol();
            continue;
        }
        if (ch == '[') {
            c.take();
            section = parse_key(c);
            c.skip_blanks();
            if (c.peek() != ']') c.fail("expected ']' after section name");
            c.take();
            if (root.count(section) && !std::get<Table>(root[section].data).empty())
                c.fail("duplicate section '" + section + "'");
            root[section] = Value{Table{}};
            current = &std::get<Table>(root[section].data);
            continue;
        }
        const std::string key = parse_key(c);
        c.skip_blanks();
        if (c.peek() != '=') c.fail("expected '=' after key '" + key + "'");
        c.take();
        c.skip_blanks();
        Value v = parse_value(c);
        if (!current->emplace(key, std::move(v)).second)
            c.fail("duplicate key '" + (section.empty() ? key : section + "." + key) + "'");
        c.skip_blanks();
        if (!c.eof() && c.peek() == '#') c.skip_comment_to_eol();
        if (!c.eof() && c.peek() != '\n') c.fail("trailing characters after value of '" + key + "'");
    }
    return root;
}

Table parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open config file " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path);
}

} // namespace vcir::tomllite
