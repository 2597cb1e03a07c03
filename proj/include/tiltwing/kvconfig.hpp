#pragma once

// Small TOML subset used for scenario and grid files:
//   key = value          number, true/false, "string" or [n, n, ...]
//   [section]            one level, dotted names allowed as plain text
//   [[array]]            repeated tables (e.g. timeline knots)
//   # comment            anywhere outside a string
// Keys carry their unit in the name (chi_deg, servo_rate_deg_s). Every key a
// reader does not consume is reported by expect_consumed(), so typos fail
// loudly instead of silently keeping a default.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "tiltwing/mathcore.hpp"

namespace tiltwing::kv {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Value = std::variant<double, bool, std::string, std::vector<double>>;

struct Entry {
    Value value;
    int line = 0;
};

class Table {
public:
    Table() = default;
    Table(std::string name, std::string source, int line)
        : name_(std::move(name)), source_(std::move(source)), line_(line) {}

    const std::string& name() const { return name_; }
    int line() const { return line_; }
    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    bool empty() const { return entries_.empty(); }

    // Throws ParseError on a duplicate key.
    void set(const std::string& key, Value value, int line);

    // Typed getters mark the key as consumed and throw ParseError on a type
    // mismatch. The fallback is returned when the key is absent.
    std::optional<double> number(const std::string& key) const;
    double number(const std::string& key, double fallback) const;
    bool boolean(const std::string& key, bool fallback) const;
    std::optional<std::string> string(const std::string& key) const;
    std::string string(const std::string& key, const std::string& fallback) const;
    std::optional<std::vector<double>> array(const std::string& key) const;
    Vec3 vec3(const std::string& key, const Vec3& fallback) const;

    // Throws ParseError naming the first key nobody asked for.
    void expect_consumed() const;

private:
    const Entry* find(const std::string& key) const;
    [[noreturn]] void fail(const std::string& key, const std::string& what) const;

    std::string name_;
    std::string source_;
    int line_ = 0;
    std::map<std::string, Entry> entries_;
    mutable std::set<std::string> used_;
};

struct Document {
    std::string source;
    Table root;
    std::map<std::string, Table> sections;
    std::map<std::string, std::vector<Table>> arrays;

    // Empty table when the section is absent.
    const Table& section(const std::string& name) const;
    const std::vector<Table>& array(const std::string& name) const;

    // Checks that only the listed section / array names appear, then calls
    // expect_consumed() on every table.
    void expect_consumed(const std::set<std::string>& known_sections,
                         const std::set<std::string>& known_arrays) const;
};

Document parse(std::istream& in, const std::string& source = "<input>");
// Throws std::runtime_error when the file cannot be opened.
Document parse_file(const std::string& path);

}  // namespace tiltwing::kv
