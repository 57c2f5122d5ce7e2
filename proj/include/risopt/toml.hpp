// SPDX-License-Identifier: Apache-2.0
//
// risopt - joint precoder / RIS phase-shift optimization library
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// Minimal TOML reader covering the subset this project's config files use:
// [table.sub] headers, bare keys, strings with the common escapes, integers,
// floats (inf/nan included), booleans, (nested, possibly multi-line) arrays,
// and # comments. No inline tables, dates, or arrays-of-tables.

#include <cctype>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "risopt/core.hpp"

namespace risopt::toml {

struct Value;
using Array = std::vector<Value>;

struct Value {
    std::variant<bool, std::int64_t, double, std::string, Array> data;

    bool is_bool() const { return std::holds_alternative<bool>(data); }
    bool is_int() const { return std::holds_alternative<std::int64_t>(data); }
    bool is_float() const { return std::holds_alternative<double>(data); }
    bool is_number() const { return is_int() || is_float(); }
    bool is_string() const { return std::holds_alternative<std::string>(data); }
    bool is_array() const { return std::holds_alternative<Array>(data); }

    bool as_bool() const {
        if (!is_bool()) throw ValidationError("expected a boolean");
        return std::get<bool>(data);
    }
    std::int64_t as_int() const {
        if (!is_int()) throw ValidationError("expected an integer");
        return std::get<std::int64_t>(data);
    }
    double as_double() const {
        if (is_int()) return static_cast<double>(std::get<std::int64_t>(data));
        if (!is_float()) throw ValidationError("expected a number");
        return std::get<double>(data);
    }
    const std::string& as_string() const {
        if (!is_string()) throw ValidationError("expected a string");
        return std::get<std::string>(data);
    }
    const Array& as_array() const {
        if (!is_array()) throw ValidationError("expected an array");
        return std::get<Array>(data);
    }
};

// Keys are flattened: [a.b] + `c = 1` lands under "a.b.c".
using Table = std::map<std::string, Value>;

namespace detail {

struct Cursor {
    std::string_view text;
    std::size_t pos = 0;
    int line = 1;

    bool eof() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    char take() {
        const char c = text[pos++];
        if (c == '\n') ++line;
        return c;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("line " + std::to_string(line) + ": " + what);
    }
    void skip_ws_and_comments(bool cross_lines) {
        while (!eof()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || c == '\r') {
                take();
            } else if (c == '#') {
                while (!eof() && peek() != '\n') take();
            } else if (c == '\n' && cross_lines) {
                take();
            } else {
                break;
            }
        }
    }
};

inline bool is_bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
}

inline std::string parse_basic_string(Cursor& cur) {
    cur.take(); // opening quote
    std::string out;
    while (true) {
        if (cur.eof()) cur.fail("unterminated string");
        const char c = cur.take();
        if (c == '"') break;
        if (c == '\n') cur.fail("newline inside string");
        if (c == '\\') {
            if (cur.eof()) cur.fail("dangling escape");
            const char e = cur.take();
            switch (e) {
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case 'r': out.push_back('\r'); break;
                default: cur.fail(std::string("unsupported escape \\") + e);
            }
        } else {
            out.push_back(c);
        }
    }
    return out;
}

inline Value parse_number(Cursor& cur) {
    std::string tok;
    while (!cur.eof()) {
        const char c = cur.peek();
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.' ||
            c == '_') {
            tok.push_back(cur.take());
        } else {
            break;
        }
    }
    std::string clean;
    for (char c : tok)
        if (c != '_') clean.push_back(c);
    if (clean.empty()) cur.fail("expected a value");

    const std::string body = (clean[0] == '+' || clean[0] == '-') ? clean.substr(1) : clean;
    const bool is_float = body == "inf" || body == "nan" ||
                          body.find('.') != std::string::npos ||
                          body.find('e') != std::string::npos ||
                          body.find('E') != std::string::npos;
    try {
        std::size_t used = 0;
        if (is_float) {
            const double v = std::stod(clean, &used);
            if (used != clean.size()) cur.fail("malformed number '" + tok + "'");
            return Value{v};
        }
        const std::int64_t v = std::stoll(clean, &used);
        if (used != clean.size()) cur.fail("malformed number '" + tok + "'");
        return Value{v};
    } catch (const std::exception&) {
        cur.fail("malformed number '" + tok + "'");
    }
}

inline Value parse_value(Cursor& cur) {
    cur.skip_ws_and_comments(false);
    if (cur.eof()) cur.fail("expected a value");
    const char c = cur.peek();
    if (c == '"') return Value{parse_basic_string(cur)};
    if (c == '[') {
        cur.take();
        Array arr;
        while (true) {
            cur.skip_ws_and_comments(true); // arrays may span lines
            if (cur.eof()) cur.fail("unterminated array");
            if (cur.peek() == ']') {
                cur.take();
                break;
            }
            arr.push_back(parse_value(cur));
            cur.skip_ws_and_comments(true);
            if (cur.eof()) cur.fail("unterminated array");
            if (cur.peek() == ',') {
                cur.take();
            } else if (cur.peek() != ']') {
                cur.fail("expected ',' or ']' in array");
            }
        }
        return Value{std::move(arr)};
    }
    if (cur.text.substr(cur.pos, 4) == "true" &&
        (cur.pos + 4 >= cur.text.size() || !is_bare_key_char(cur.text[cur.pos + 4]))) {
        cur.pos += 4;
        return Value{true};
    }
    if (cur.text.substr(cur.pos, 5) == "false" &&
        (cur.pos + 5 >= cur.text.size() || !is_bare_key_char(cur.text[cur.pos + 5]))) {
        cur.pos += 5;
        return Value{false};
    }
    return parse_number(cur);
}

inline std::string parse_key_path(Cursor& cur) {
    std::string path;
    while (true) {
        cur.skip_ws_and_comments(false);
        std::string part;
        while (!cur.eof() && is_bare_key_char(cur.peek())) part.push_back(cur.take());
        if (part.empty()) cur.fail("expected a key");
        if (!path.empty()) path.push_back('.');
        path += part;
        cur.skip_ws_and_comments(false);
        if (!cur.eof() && cur.peek() == '.') {
            cur.take();
            continue;
        }
        break;
    }
    return path;
}

} // namespace detail

inline Table parse(std::string_view text) {
    detail::Cursor cur{text};
    Table table;
    std::string prefix;
    while (true) {
        cur.skip_ws_and_comments(true);
        if (cur.eof()) break;
        if (cur.peek() == '[') {
            cur.take();
            prefix = detail::parse_key_path(cur);
            cur.skip_ws_and_comments(false);
            if (cur.eof() || cur.take() != ']') cur.fail("expected ']' after table name");
        } else {
            const std::string key = detail::parse_key_path(cur);
            cur.skip_ws_and_comments(false);
            if (cur.eof() || cur.take() != '=') cur.fail("expected '=' after key '" + key + "'");
            Value v = detail::parse_value(cur);
            const std::string full = prefix.empty() ? key : prefix + "." + key;
            if (table.count(full) != 0) cur.fail("duplicate key '" + full + "'");
            table.emplace(full, std::move(v));
        }
        cur.skip_ws_and_comments(false);
        if (!cur.eof() && cur.peek() != '\n') cur.fail("trailing characters after value");
    }
    return table;
}

} // namespace risopt::toml
