#pragma once

#include <fstream>
#include <istream>
#include <string>
#include <vector>

#include "clickdet/error.hpp"

namespace clickdet::csv {

// RFC-4180-style records: comma separated, double-quote quoting, quotes
// escaped by doubling; quoted fields may span lines.
struct Record {
    std::vector<std::string> fields;
    std::size_t line = 0;  // 1-based line where the record starts
};

class Parser {
public:
    explicit Parser(std::istream& in, std::string source = "<csv>")
        : in_(in), source_(std::move(source)) {}

    bool next(Record& rec) {
        std::string line;
        if (!std::getline(in_, line)) return false;
        ++line_no_;
        rec.line = line_no_;
        rec.fields.clear();
        std::string field;
        bool in_quotes = false;
        std::size_t i = 0;
        while (true) {
            if (i >= line.size()) {
                if (in_quotes) {
                    if (!std::getline(in_, line)) {
                        throw_data(source_ + ":" + std::to_string(rec.line) + ": unterminated quoted field");
                    }
                    ++line_no_;
                    field.push_back('\n');
                    i = 0;
                    continue;
                }
                rec.fields.push_back(std::move(field));
                return true;
            }
            const char c = line[i];
            if (in_quotes) {
                if (c == '"') {
                    if (i + 1 < line.size() && line[i + 1] == '"') {
                        field.push_back('"');
                        i += 2;
                    } else {
                        in_quotes = false;
                        ++i;
                    }
                } else {
                    field.push_back(c);
                    ++i;
                }
            } else if (c == '"' && field.empty()) {
                in_quotes = true;
                ++i;
            } else if (c == ',') {
                rec.fields.push_back(std::move(field));
                field.clear();
                ++i;
            } else if (c == '\r' && i + 1 == line.size()) {
                ++i;  // trailing CR from CRLF files
            } else {
                field.push_back(c);
                ++i;
            }
        }
    }

private:
    std::istream& in_;
    std::string source_;
    std::size_t line_no_ = 0;
};

inline std::string escape(std::string_view field) {
    const bool needs_quotes =
        field.find_first_of(",\"\n\r") != std::string_view::npos;
    if (!needs_quotes) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace clickdet::csv
