#pragma once

// RFC-4180 CSV: header row, quoted fields with "" escapes, CRLF or LF line
// ends, embedded newlines inside quotes. Doubles are written with
// std::to_chars (shortest form), which round-trips exactly and is
// locale-independent — benchmark artifacts must be byte-reproducible.

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "adbench/errors.hpp"

namespace adbench {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Full-string parse via from_chars (locale-independent, like the writer);
// tolerates surrounding spaces, rejects trailing junk.
inline bool parse_double(const std::string& s, double& out) {
    std::size_t lo = 0, hi = s.size();
    while (lo < hi && s[lo] == ' ') ++lo;
    while (hi > lo && s[hi - 1] == ' ') --hi;
    if (lo == hi) return false;
    const char* first = s.data() + lo;
    const char* last = s.data() + hi;
    if (*first == '+') ++first;  // from_chars rejects a leading plus
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

namespace detail {

inline std::vector<std::vector<std::string>> parse_csv_text(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool any_field = false;
    std::size_t i = 0;
    const std::size_t n = text.size();
    auto end_field = [&] {
        record.push_back(field);
        field.clear();
        any_field = true;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
        any_field = false;
    };
    while (i < n) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < n && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            ++i;
        } else if (c == '"') {
            in_quotes = true;
            ++i;
        } else if (c == ',') {
            end_field();
            ++i;
        } else if (c == '\r') {
            if (i + 1 < n && text[i + 1] == '\n') ++i;
            end_record();
            ++i;
        } else if (c == '\n') {
            end_record();
            ++i;
        } else {
            field += c;
            ++i;
        }
    }
    if (in_quotes) throw InvalidInputError("unterminated quoted CSV field");
    if (any_field || !field.empty()) end_record();
    return records;
}

}  // namespace detail

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInputError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    auto records = detail::parse_csv_text(ss.str());
    if (records.empty()) throw EmptyFileError("empty CSV file: " + path);
    CsvTable t;
    t.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != t.header.size())
            throw RaggedRowsError("row " + std::to_string(r) + " has " +
                                  std::to_string(records[r].size()) + " fields, header has " +
                                  std::to_string(t.header.size()) + ": " + path);
        t.rows.push_back(std::move(records[r]));
    }
    return t;
}

inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline void write_csv(const std::string& path, const CsvTable& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInputError("cannot write file: " + path);
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << csv_escape(row[i]);
        }
        out << '\n';
    };
    emit_row(t.header);
    for (const auto& row : t.rows) emit_row(row);
}

}  // namespace adbench
