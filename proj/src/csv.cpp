#include "rollup/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "rollup/error.hpp"

namespace rollup {

namespace {

struct RawField {
    std::string text;
    bool quoted = false;
};

using RawRecord = std::vector<RawField>;

// Splits the input into records. Handles quoted fields with embedded
// delimiters, doubled quotes, and newlines; accepts both \n and \r\n.
std::vector<RawRecord> split_records(std::string_view text, char delimiter) {
    std::vector<RawRecord> records;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        RawRecord record;
        bool at_record_end = false;
        while (!at_record_end) {
            RawField field;
            if (i < n && text[i] == '"') {
                field.quoted = true;
                ++i;
                bool closed = false;
                while (i < n) {
                    if (text[i] == '"') {
                        if (i + 1 < n && text[i + 1] == '"') {
                            field.text += '"';
                            i += 2;
                        } else {
                            ++i;
                            closed = true;
                            break;
                        }
                    } else {
                        field.text += text[i++];
                    }
                }
                if (!closed) {
                    throw CsvError("row " + std::to_string(records.size() + 1) +
                                   ": unterminated quoted field");
                }
                if (i < n && text[i] != delimiter && text[i] != '\n' && text[i] != '\r') {
                    throw CsvError("row " + std::to_string(records.size() + 1) +
                                   ": unexpected character after closing quote");
                }
            } else {
                while (i < n && text[i] != delimiter && text[i] != '\n' && text[i] != '\r') {
                    if (text[i] == '"') {
                        throw CsvError("row " + std::to_string(records.size() + 1) +
                                       ": stray quote inside unquoted field");
                    }
                    field.text += text[i++];
                }
            }
            record.push_back(std::move(field));
            if (i >= n) {
                at_record_end = true;
            } else if (text[i] == delimiter) {
                ++i;
            } else {  // \n or \r\n
                if (text[i] == '\r') ++i;
                if (i < n && text[i] == '\n') ++i;
                at_record_end = true;
            }
        }
        records.push_back(std::move(record));
    }
    return records;
}

bool parses_as_number(std::string_view token, double& out) {
    if (token.empty()) return false;
    // from_chars accepts "inf"/"nan" spellings; a leading alpha check rules
    // them out so such tokens stay text.
    char c = token.front();
    if (!(c == '+' || c == '-' || c == '.' || (c >= '0' && c <= '9'))) return false;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (c == '+') {  // from_chars rejects an explicit plus
        if (token.size() < 2 || token[1] == '+' || token[1] == '-') return false;
        ++first;
    }
    double v = 0.0;
    auto [end, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || end != last) return false;
    if (!std::isfinite(v)) return false;
    out = v;
    return true;
}

}  // namespace

Table read_csv(std::string_view text, const CsvReadOptions& options) {
    auto records = split_records(text, options.delimiter);
    // A trailing newline produces one empty single-field record; drop it.
    if (!records.empty() && records.back().size() == 1 &&
        !records.back()[0].quoted && records.back()[0].text.empty()) {
        records.pop_back();
    }
    if (records.empty()) throw CsvError("missing header row");

    const RawRecord& header = records[0];
    const std::size_t width = header.size();
    std::vector<std::string> names;
    names.reserve(width);
    for (const RawField& f : header) {
        if (!Table::is_identifier(f.text)) {
            throw SchemaError("invalid column name in header: '" + f.text + "'");
        }
        if (std::find(names.begin(), names.end(), f.text) != names.end()) {
            throw SchemaError("duplicate header name: '" + f.text + "'");
        }
        names.push_back(f.text);
    }

    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != width) {
            throw CsvError("row " + std::to_string(r + 1) + ": expected " +
                           std::to_string(width) + " fields, got " +
                           std::to_string(records[r].size()));
        }
    }

    auto is_na = [&](const RawField& f) {
        if (f.quoted) return false;
        return std::find(options.na_tokens.begin(), options.na_tokens.end(), f.text) !=
               options.na_tokens.end();
    };
    auto forced_textual = [&](const std::string& name) {
        return std::find(options.force_textual.begin(), options.force_textual.end(), name) !=
               options.force_textual.end();
    };

    const std::size_t nrows = records.size() - 1;
    std::vector<Column> columns;
    columns.reserve(width);
    for (std::size_t c = 0; c < width; ++c) {
        bool numeric = !forced_textual(names[c]);
        std::vector<double> numbers(nrows, 0.0);
        if (numeric) {
            for (std::size_t r = 0; r < nrows; ++r) {
                const RawField& f = records[r + 1][c];
                if (is_na(f)) continue;
                if (f.quoted || !parses_as_number(f.text, numbers[r])) {
                    numeric = false;
                    break;
                }
            }
        }
        std::vector<Value> cells(nrows);
        for (std::size_t r = 0; r < nrows; ++r) {
            const RawField& f = records[r + 1][c];
            if (is_na(f)) continue;
            cells[r] = numeric ? Value::number(numbers[r]) : Value::text(f.text);
        }
        columns.emplace_back(names[c], numeric ? ColumnKind::Numeric : ColumnKind::Textual,
                             std::move(cells));
    }
    return Table(std::move(columns));
}

Table read_csv(std::istream& source, const CsvReadOptions& options) {
    std::string text(std::istreambuf_iterator<char>(source), {});
    return read_csv(std::string_view(text), options);
}

void write_csv(const Table& table, std::ostream& sink, const CsvWriteOptions& options) {
    auto needs_quoting = [&](const std::string& s) {
        if (s == options.na_token || s.empty()) return true;
        double ignored;
        if (parses_as_number(s, ignored)) return true;
        return s.find(options.delimiter) != std::string::npos ||
               s.find('"') != std::string::npos || s.find('\n') != std::string::npos ||
               s.find('\r') != std::string::npos;
    };
    auto emit_text = [&](const std::string& s) {
        if (!needs_quoting(s)) {
            sink << s;
            return;
        }
        sink << '"';
        for (char c : s) {
            if (c == '"') sink << '"';
            sink << c;
        }
        sink << '"';
    };

    for (std::size_t c = 0; c < table.column_count(); ++c) {
        if (c > 0) sink << options.delimiter;
        sink << table.column(c).name();
    }
    sink << '\n';
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        for (std::size_t c = 0; c < table.column_count(); ++c) {
            if (c > 0) sink << options.delimiter;
            const Value& v = table.cell(r, c);
            if (v.is_null()) {
                sink << options.na_token;
            } else if (v.is_number()) {
                sink << format_number(v.as_number(), options.float_digits);
            } else {
                emit_text(v.as_text());
            }
        }
        sink << '\n';
    }
}

std::string write_csv(const Table& table, const CsvWriteOptions& options) {
    std::ostringstream out;
    write_csv(table, out, options);
    return out.str();
}

}  // namespace rollup
