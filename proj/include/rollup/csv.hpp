#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "rollup/table.hpp"

namespace rollup {

struct CsvReadOptions {
    /// Unquoted tokens matching any of these become Null.
    std::vector<std::string> na_tokens = {"", "NA"};
    char delimiter = ',';
    /// Columns read verbatim as text, bypassing numeric inference. Used for
    /// classification-code columns whose leading zeros must survive.
    std::vector<std::string> force_textual = {};
};

struct CsvWriteOptions {
    std::string na_token = "NA";
    char delimiter = ',';
    int float_digits = 7;
};

/// Parses RFC-4180-style delimited text with a mandatory header row.
///
/// A column is Numeric iff every non-NA token parses fully as a decimal
/// number; otherwise Textual. Quoted fields are taken literally: they are
/// never NA and force their column Textual, which is what lets a written
/// table read back unchanged.
Table read_csv(std::istream& source, const CsvReadOptions& options = {});
Table read_csv(std::string_view text, const CsvReadOptions& options = {});

void write_csv(const Table& table, std::ostream& sink, const CsvWriteOptions& options = {});
std::string write_csv(const Table& table, const CsvWriteOptions& options = {});

}  // namespace rollup
