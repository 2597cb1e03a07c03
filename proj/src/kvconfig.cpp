#include "tiltwing/kvconfig.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>

namespace tiltwing::kv {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

bool valid_key(const std::string& k) {
    if (k.empty()) {
        return false;
    }
    for (char c : k) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) {
            return false;
        }
    }
    return true;
}

// Drops a '#' comment that is not inside a string.
std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') {
            in_str = !in_str;
        } else if (line[i] == '#' && !in_str) {
            return line.substr(0, i);
        }
    }
    return line;
}

double parse_number(const std::string& text, const std::string& where) {
    std::string t = text;
    std::erase(t, '_');  // TOML digit separators
    if (!t.empty() && t[0] == '+') {
        t.erase(0, 1);
    }
    double v = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || t.empty()) {
        throw ParseError(where + ": cannot parse '" + text + "' as a value");
    }
    return v;
}

Value parse_value(const std::string& text, const std::string& where) {
    if (text.empty()) {
        throw ParseError(where + ": missing value");
    }
    if (text.front() == '"') {
        if (text.size() < 2 || text.back() != '"') {
            throw ParseError(where + ": unterminated string");
        }
        return text.substr(1, text.size() - 2);
    }
    if (text == "true") {
        return true;
    }
    if (text == "false") {
        return false;
    }
    if (text.front() == '[') {
        if (text.back() != ']') {
            throw ParseError(where + ": arrays must close on the same line");
        }
        std::vector<double> out;
        const std::string body = trim(std::string_view(text).substr(1, text.size() - 2));
        std::size_t pos = 0;
        while (pos < body.size()) {
            auto comma = body.find(',', pos);
            if (comma == std::string::npos) {
                comma = body.size();
            }
            const std::string item = trim(std::string_view(body).substr(pos, comma - pos));
            if (!item.empty()) {
                out.push_back(parse_number(item, where));
            } else if (comma != body.size()) {
                throw ParseError(where + ": empty array element");
            }
            pos = comma + 1;
        }
        return out;
    }
    return parse_number(text, where);
}

const char* type_name(const Value& v) {
    switch (v.index()) {
        case 0: return "number";
        case 1: return "boolean";
        case 2: return "string";
        default: return "array";
    }
}

}  // namespace

void Table::set(const std::string& key, Value value, int line) {
    if (entries_.count(key)) {
        throw ParseError(source_ + ":" + std::to_string(line) + ": duplicate key '" + key + "'");
    }
    entries_[key] = Entry{std::move(value), line};
}

const Entry* Table::find(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        return nullptr;
    }
    used_.insert(key);
    return &it->second;
}

void Table::fail(const std::string& key, const std::string& what) const {
    const auto it = entries_.find(key);
    const int line = it != entries_.end() ? it->second.line : line_;
    std::string where = source_ + ":" + std::to_string(line) + ": ";
    if (!name_.empty()) {
        where += "[" + name_ + "] ";
    }
    throw ParseError(where + "'" + key + "' " + what);
}

std::optional<double> Table::number(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) {
        return std::nullopt;
    }
    if (const double* d = std::get_if<double>(&e->value)) {
        return *d;
    }
    fail(key, std::string("must be a number, got ") + type_name(e->value));
}

double Table::number(const std::string& key, double fallback) const {
    return number(key).value_or(fallback);
}

bool Table::boolean(const std::string& key, bool fallback) const {
    const Entry* e = find(key);
    if (!e) {
        return fallback;
    }
    if (const bool* b = std::get_if<bool>(&e->value)) {
        return *b;
    }
    fail(key, std::string("must be true or false, got ") + type_name(e->value));
}

std::optional<std::string> Table::string(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) {
        return std::nullopt;
    }
    if (const std::string* s = std::get_if<std::string>(&e->value)) {
        return *s;
    }
    fail(key, std::string("must be a string, got ") + type_name(e->value));
}

std::string Table::string(const std::string& key, const std::string& fallback) const {
    return string(key).value_or(fallback);
}

std::optional<std::vector<double>> Table::array(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) {
        return std::nullopt;
    }
    if (const auto* a = std::get_if<std::vector<double>>(&e->value)) {
        return *a;
    }
    fail(key, std::string("must be an array, got ") + type_name(e->value));
}

Vec3 Table::vec3(const std::string& key, const Vec3& fallback) const {
    const auto a = array(key);
    if (!a) {
        return fallback;
    }
    if (a->size() != 3) {
        fail(key, "must have exactly 3 elements");
    }
    return {(*a)[0], (*a)[1], (*a)[2]};
}

void Table::expect_consumed() const {
    for (const auto& [key, entry] : entries_) {
        if (!used_.count(key)) {
            fail(key, "is not a recognised key");
        }
    }
}

const Table& Document::section(const std::string& name) const {
    static const Table empty;
    const auto it = sections.find(name);
    return it == sections.end() ? empty : it->second;
}

const std::vector<Table>& Document::array(const std::string& name) const {
    static const std::vector<Table> empty;
    const auto it = arrays.find(name);
    return it == arrays.end() ? empty : it->second;
}

void Document::expect_consumed(const std::set<std::string>& known_sections,
                               const std::set<std::string>& known_arrays) const {
    for (const auto& [name, table] : sections) {
        if (!known_sections.count(name)) {
            throw ParseError(source + ":" + std::to_string(table.line()) + ": unknown section [" +
                             name + "]");
        }
    }
    for (const auto& [name, tables] : arrays) {
        if (!known_arrays.count(name)) {
            throw ParseError(source + ":" + std::to_string(tables.front().line()) +
                             ": unknown table array [[" + name + "]]");
        }
    }
    root.expect_consumed();
    for (const auto& [name, table] : sections) {
        table.expect_consumed();
    }
    for (const auto& [name, tables] : arrays) {
        for (const auto& t : tables) {
            t.expect_consumed();
        }
    }
}

Document parse(std::istream& in, const std::string& source) {
    Document doc;
    doc.source = source;
    doc.root = Table("", source, 0);
    Table* current = &doc.root;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string where = source + ":" + std::to_string(lineno);
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) {
            continue;
        }
        if (line.starts_with("[[")) {
            if (!line.ends_with("]]")) {
                throw ParseError(where + ": malformed table array header");
            }
            const std::string name = trim(std::string_view(line).substr(2, line.size() - 4));
            if (!valid_key(name) || doc.sections.count(name)) {
                throw ParseError(where + ": bad table array name '" + name + "'");
            }
            auto& vec = doc.arrays[name];
            vec.emplace_back(name + "#" + std::to_string(vec.size() + 1), source, lineno);
            current = &vec.back();
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ParseError(where + ": malformed section header");
            }
            const std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!valid_key(name) || doc.arrays.count(name)) {
                throw ParseError(where + ": bad section name '" + name + "'");
            }
            if (doc.sections.count(name)) {
                throw ParseError(where + ": section [" + name + "] appears twice");
            }
            current = &doc.sections.emplace(name, Table(name, source, lineno)).first->second;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(where + ": expected key = value");
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        if (!valid_key(key)) {
            throw ParseError(where + ": bad key '" + key + "'");
        }
        current->set(key, parse_value(trim(std::string_view(line).substr(eq + 1)), where),
                     lineno);
    }
    return doc;
}

Document parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    return parse(in, path);
}

}  // namespace tiltwing::kv
