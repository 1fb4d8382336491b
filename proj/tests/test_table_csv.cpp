#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "rollup/csv.hpp"
#include "rollup/error.hpp"
#include "rollup/table.hpp"
#include "testutil.hpp"

using namespace rollup;

TEST_CASE("value basics") {
    CHECK(Value{}.is_null());
    CHECK(Value::number(4.2).as_number() == 4.2);
    CHECK(Value::text("1-11").as_text() == "1-11");
    CHECK(Value::number(std::nan("")).is_null());
    CHECK(Value::number(HUGE_VAL).is_null());
    CHECK(Value::number(2.0) == Value::number(2.0));
    CHECK(Value::number(2.0) != Value::text("2"));
}

TEST_CASE("canonical keys render minimal digits") {
    CHECK(canonical_key(Value::number(11)) == "11");
    CHECK(canonical_key(Value::number(-3)) == "-3");
    CHECK(canonical_key(Value::number(1.5)) == "1.5");
    CHECK(canonical_key(Value::number(100000)) == "100000");
    CHECK(canonical_key(Value::text("0111")) == "0111");
    CHECK(canonical_key(Value{}) == "NA");
}

TEST_CASE("format_number uses up to 7 significant digits") {
    CHECK(format_number(30.0 / 7.0, 7) == "4.285714");
    CHECK(format_number(100.0 / 7.0, 7) == "14.28571");
    CHECK(format_number(5.0, 7) == "5");
    CHECK(format_number(12.0, 7) == "12");
}

TEST_CASE("read_csv infers kinds and missing cells") {
    Table t = read_csv(std::string_view("A,B,Y\n1,11,1\n"));
    CHECK(t.row_count() == 1);
    CHECK(t.column_count() == 3);
    for (std::size_t c = 0; c < 3; ++c) CHECK(t.column(c).kind() == ColumnKind::Numeric);

    Table u = read_csv(std::string_view("A,B,Y\n2,12,NA\n"));
    CHECK(u.cell(0, 2).is_null());
    CHECK(u.column(2).kind() == ColumnKind::Numeric);

    Table empty = read_csv(std::string_view("A,B,Y\n"));
    CHECK(empty.row_count() == 0);
    CHECK(empty.column_count() == 3);
}

TEST_CASE("read_csv textual inference and forced text") {
    Table t = read_csv(std::string_view("code,n\n0111,1\nx9,2\n"));
    CHECK(t.column("code").kind() == ColumnKind::Textual);
    CHECK(t.cell(0, 0).as_text() == "0111");

    CsvReadOptions forced;
    forced.force_textual = {"code"};
    Table u = read_csv(std::string_view("code\n0111\n0112\n"), forced);
    CHECK(u.column("code").kind() == ColumnKind::Textual);
    CHECK(u.cell(0, 0).as_text() == "0111");
}

TEST_CASE("read_csv structural and schema errors") {
    CHECK_THROWS_AS(read_csv(std::string_view("A,B\n1\n")), CsvError);
    CHECK_THROWS_AS(read_csv(std::string_view("A,A\n1,2\n")), SchemaError);
    CHECK_THROWS_AS(read_csv(std::string_view("A,2B\n1,2\n")), SchemaError);
    CHECK_THROWS_AS(read_csv(std::string_view("")), CsvError);
    CHECK_THROWS_WITH_AS(read_csv(std::string_view("A,B\n1,2\n3\n")),
                         doctest::Contains("row 3"), CsvError);
}

TEST_CASE("read_csv quoting") {
    Table t = read_csv(std::string_view("A,B\n\"x,y\",\"say \"\"hi\"\"\"\n"));
    CHECK(t.cell(0, 0).as_text() == "x,y");
    CHECK(t.cell(0, 1).as_text() == "say \"hi\"");

    // Quoted tokens are literal text: not NA, not numeric.
    Table u = read_csv(std::string_view("A,B\n\"NA\",\"123\"\n"));
    CHECK(u.cell(0, 0).as_text() == "NA");
    CHECK(u.column(1).kind() == ColumnKind::Textual);
}

TEST_CASE("write_csv serialization") {
    std::vector<Column> cols;
    cols.emplace_back("x", ColumnKind::Numeric,
                      std::vector<Value>{Value::number(30.0 / 7.0), Value{}});
    cols.emplace_back("k", ColumnKind::Textual,
                      std::vector<Value>{Value::text("1-11"), Value::text("NA literal")});
    std::string out = write_csv(Table(std::move(cols)));
    CHECK(out == "x,k\n4.285714,1-11\nNA,NA literal\n");
}

TEST_CASE("custom delimiter round trip") {
    CsvReadOptions read_opts;
    read_opts.delimiter = ';';
    Table t = read_csv(std::string_view("a;b\n1;x\n"), read_opts);
    CsvWriteOptions write_opts;
    write_opts.delimiter = ';';
    CHECK(write_csv(t, write_opts) == "a;b\n1;x\n");
}

TEST_CASE("subset views") {
    Table t = testutil::small_input();
    RowSubset s = subset(t, {0, 1, 2});
    CHECK(s.row_count() == 3);
    CHECK(s.cell(2, 3).as_number() == 3);  // Y of third row

    CHECK(subset(t, {}).row_count() == 0);
    CHECK(subset(t, {8}).row_count() == 1);
    CHECK_THROWS_AS(subset(t, {9}), BoundsError);
    CHECK_THROWS_AS(subset(t, {2, 1}), BoundsError);
    CHECK_THROWS_AS(subset(t, {1, 1}), BoundsError);

    // Full subset observationally equals the table.
    RowSubset all = RowSubset::all(t);
    REQUIRE(all.row_count() == t.row_count());
    for (std::size_t r = 0; r < t.row_count(); ++r) {
        for (std::size_t c = 0; c < t.column_count(); ++c) {
            CHECK(all.cell(r, c) == t.cell(r, c));
        }
    }
}

TEST_CASE("null_out_column") {
    Table t = testutil::small_input();
    Table nulled = null_out_column(t, "Y");
    CHECK(nulled.column("Y").kind() == ColumnKind::Numeric);
    for (std::size_t r = 0; r < nulled.row_count(); ++r) {
        CHECK(nulled.cell(r, nulled.column_index("Y")).is_null());
        CHECK(nulled.cell(r, 0) == t.cell(r, 0));
    }
    // Idempotent, and the original is untouched.
    Table again = null_out_column(nulled, "Y");
    CHECK(write_csv(again) == write_csv(nulled));
    CHECK(!t.cell(0, t.column_index("Y")).is_null());

    CHECK_THROWS_AS(null_out_column(t, "Z"), SchemaError);
}

TEST_CASE("table invariants") {
    std::vector<Column> ragged;
    ragged.emplace_back("a", ColumnKind::Numeric, std::vector<Value>{Value::number(1)});
    ragged.emplace_back("b", ColumnKind::Numeric, std::vector<Value>{});
    CHECK_THROWS_AS(Table(std::move(ragged)), SchemaError);

    CHECK_THROWS_AS(Column("a", ColumnKind::Numeric, {Value::text("x")}), SchemaError);
    CHECK(Table::is_identifier("Sepal.Length"));
    CHECK(Table::is_identifier("_x9"));
    CHECK(!Table::is_identifier("9x"));
    CHECK(!Table::is_identifier(""));
    CHECK(!Table::is_identifier("a b"));
}

namespace {

Table random_table(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> rows_dist(0, 20);
    std::uniform_int_distribution<int> cols_dist(1, 5);
    std::uniform_int_distribution<int> kind_dist(0, 1);
    std::uniform_real_distribution<double> num_dist(-1e6, 1e6);
    std::uniform_int_distribution<int> percent(0, 99);
    std::uniform_int_distribution<int> text_pick(0, 5);
    static const char* words[] = {"x", "NA", "1-11", "0111", "a,b", "say \"hi\""};

    std::size_t nrows = rows_dist(rng);
    int ncols = cols_dist(rng);
    std::vector<Column> columns;
    for (int c = 0; c < ncols; ++c) {
        ColumnKind kind = kind_dist(rng) ? ColumnKind::Numeric : ColumnKind::Textual;
        std::vector<Value> cells;
        for (std::size_t r = 0; r < nrows; ++r) {
            if (percent(rng) < 15) {
                cells.push_back(Value{});
            } else if (kind == ColumnKind::Numeric) {
                cells.push_back(Value::number(num_dist(rng)));
            } else {
                cells.push_back(Value::text(words[text_pick(rng)]));
            }
        }
        columns.emplace_back("c" + std::to_string(c), kind, std::move(cells));
    }
    return Table(std::move(columns));
}

}  // namespace

TEST_CASE("property: write/read round-trips any table up to float precision") {
    std::mt19937_64 rng(20260810);
    for (int iter = 0; iter < 200; ++iter) {
        Table t = random_table(rng);
        Table back = read_csv(std::string_view(write_csv(t)));
        REQUIRE(back.row_count() == t.row_count());
        REQUIRE(back.column_count() == t.column_count());
        for (std::size_t c = 0; c < t.column_count(); ++c) {
            CHECK(back.column(c).name() == t.column(c).name());
            for (std::size_t r = 0; r < t.row_count(); ++r) {
                const Value& a = t.cell(r, c);
                const Value& b = back.cell(r, c);
                if (a.is_number()) {
                    REQUIRE(b.is_number());
                    CHECK(format_number(a.as_number(), 7) == format_number(b.as_number(), 7));
                } else {
                    CHECK(a == b);
                }
            }
        }
    }
}

TEST_CASE("property: kind inference is deterministic") {
    std::mt19937_64 rng(7);
    for (int iter = 0; iter < 50; ++iter) {
        std::string csv = write_csv(random_table(rng));
        Table first = read_csv(std::string_view(csv));
        Table second = read_csv(std::string_view(csv));
        for (std::size_t c = 0; c < first.column_count(); ++c) {
            CHECK(first.column(c).kind() == second.column(c).kind());
        }
        CHECK(write_csv(first) == write_csv(second));
    }
}
