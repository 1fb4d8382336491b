#include <doctest.h>

#include <random>
#include <set>

#include "rollup/csv.hpp"
#include "rollup/error.hpp"
#include "rollup/scheme.hpp"
#include "testutil.hpp"

using namespace rollup;

namespace {

// Child-parent table from the worked example: AB collapses to AB1, then A.
Table example_csh() {
    return read_csv(std::string_view("AB,AB1,A\n"
                                     "1-11,1-1,1\n"
                                     "2-12,2-1,2\n"
                                     "2-13,2-1,2\n"
                                     "3-21,3-2,3\n"
                                     "3-22,3-2,3\n"
                                     "3-12,3-1,3\n"));
}

}  // namespace

TEST_CASE("scheme_from_formula on the worked example") {
    Table input = testutil::small_input();
    CollapseScheme scheme =
        scheme_from_formula(input, dsl::parse_formula("A * B ~ A * B1 + A"));

    CHECK(scheme.depth() == 2);
    REQUIRE(scheme.labels().size() == 6);
    const char* expected[] = {"1-11", "2-12", "2-13", "3-21", "3-22", "3-12"};
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(scheme.labels()[i].display() == expected[i]);
    }
    // Level-2 keys are the A values.
    CHECK(scheme.level_key(0, 2) == "1");
    CHECK(scheme.level_key(3, 2) == "3");
    // Level-1 keys pair A with B1.
    CHECK(scheme.level_key(1, 1) == scheme.level_key(2, 1));  // (2,12), (2,13)
    CHECK(scheme.level_key(1, 1) != scheme.level_key(0, 1));

    CollapseScheme shallow = scheme_from_formula(input, dsl::parse_formula("A*B ~ A"));
    CHECK(shallow.depth() == 1);
}

TEST_CASE("identity coarsening is injective over labels") {
    Table input = testutil::small_input();
    CollapseScheme scheme =
        scheme_from_formula(input, dsl::parse_formula("A * B ~ A * B"));
    std::set<std::string> keys;
    for (std::size_t i = 0; i < scheme.labels().size(); ++i) {
        keys.insert(scheme.level_key(i, 1));
    }
    CHECK(keys.size() == scheme.labels().size());
}

TEST_CASE("scheme_from_formula errors") {
    Table input = testutil::small_input();
    CHECK_THROWS_AS(scheme_from_formula(input, dsl::parse_formula("A * Z ~ A")),
                    SchemaError);

    // Label (1,"x") sees two different C values: not a function of the label.
    Table bad = read_csv(std::string_view("A,B,C\n1,x,1\n1,x,2\n"));
    CHECK_THROWS_WITH_AS(scheme_from_formula(bad, dsl::parse_formula("A * B ~ C")),
                         doctest::Contains("disagree on collapsing variable 'C'"),
                         SchemeError);

    // Levels that do not nest: equal level-1 keys diverge at level 2.
    Table skew = read_csv(std::string_view("A,L1,L2\n1,1,1\n2,1,2\n"));
    CHECK_THROWS_WITH_AS(scheme_from_formula(skew, dsl::parse_formula("A ~ L1 + L2")),
                         doctest::Contains("not a coarsening"), SchemeError);
}

TEST_CASE("scheme_from_table on the child-parent example") {
    CollapseScheme scheme = scheme_from_table(example_csh());
    CHECK(scheme.target_vars() == std::vector<std::string>{"AB"});
    CHECK(scheme.depth() == 2);
    REQUIRE(scheme.labels().size() == 6);
    CHECK(scheme.labels()[0].display() == "1-11");
    CHECK(scheme.level_key(1, 1) == "2-1");
    CHECK(scheme.level_key(5, 2) == "3");
}

TEST_CASE("scheme_from_table validation") {
    Table conflicting = read_csv(std::string_view("AB,AB1\n2-12,2-1\n2-12,9-9\n"));
    CHECK_THROWS_WITH_AS(scheme_from_table(conflicting),
                         doctest::Contains("maps to both"), SchemeError);

    Table with_null = read_csv(std::string_view("AB,AB1\n2-12,NA\n"));
    CHECK_THROWS_AS(scheme_from_table(with_null), SchemeError);

    Table narrow = read_csv(std::string_view("AB\n2-12\n"));
    CHECK_THROWS_AS(scheme_from_table(narrow), SchemeError);

    // Duplicated rows collapse to one label.
    Table dup = read_csv(std::string_view("A0,A1,A2\n0121,012,01\n0121,012,01\n"));
    CollapseScheme scheme = scheme_from_table(dup);
    CHECK(scheme.labels().size() == 1);
}

TEST_CASE("csh_from_digits balanced") {
    std::vector<std::string> nace = {"0111", "0112", "0113", "0121",
                                     "0121", "0122", "0123", "0124"};
    Table t = csh_from_digits(nace, 2);
    CHECK(write_csv(t) ==
          "A0,A1,A2\n"
          "\"0111\",\"011\",\"01\"\n"
          "\"0112\",\"011\",\"01\"\n"
          "\"0113\",\"011\",\"01\"\n"
          "\"0121\",\"012\",\"01\"\n"
          "\"0121\",\"012\",\"01\"\n"
          "\"0122\",\"012\",\"01\"\n"
          "\"0123\",\"012\",\"01\"\n"
          "\"0124\",\"012\",\"01\"\n");
}

TEST_CASE("csh_from_digits unbalanced copies short leaves") {
    std::vector<std::string> nace = {"0111", "0112", "0113", "0121",
                                     "0122", "0123", "01241", "01242"};
    Table t = csh_from_digits(nace, 3);
    REQUIRE(t.column_count() == 4);
    auto cell = [&](std::size_t r, std::size_t c) { return t.cell(r, c).as_text(); };
    CHECK(cell(0, 1) == "0111");  // leaf copied, not truncated
    CHECK(cell(6, 0) == "01241");
    CHECK(cell(6, 1) == "0124");
    CHECK(cell(6, 2) == "012");
    CHECK(cell(6, 3) == "01");
    CHECK(cell(0, 2) == "011");
    CHECK(cell(0, 3) == "01");
}

TEST_CASE("csh_from_digits edge cases") {
    Table single = csh_from_digits({"7"}, 1);
    CHECK(single.row_count() == 1);
    CHECK(single.cell(0, 1).as_text() == "7");

    CHECK_THROWS_AS(csh_from_digits({}, 1), SchemeError);
    CHECK_THROWS_AS(csh_from_digits({""}, 1), SchemeError);
    CHECK_THROWS_AS(csh_from_digits({"01"}, 0), SchemeError);
}

TEST_CASE("csh_from_digits output always passes scheme_from_table") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> len_dist(1, 6);
    std::uniform_int_distribution<int> digit(0, 2);
    std::uniform_int_distribution<int> count_dist(1, 12);
    std::uniform_int_distribution<std::size_t> levels_dist(1, 4);
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<std::string> codes;
        int n = count_dist(rng);
        for (int i = 0; i < n; ++i) {
            std::string code;
            int len = len_dist(rng);
            for (int j = 0; j < len; ++j) code += static_cast<char>('0' + digit(rng));
            codes.push_back(code);
        }
        Table t = csh_from_digits(codes, levels_dist(rng));
        CHECK_NOTHROW(scheme_from_table(t));
    }
}

TEST_CASE("render and rebuild is idempotent on deduplicated scheme tables") {
    CollapseScheme scheme = scheme_from_table(example_csh());
    Table rendered = scheme_to_table(scheme);
    CollapseScheme again = scheme_from_table(rendered);
    CHECK(again.labels() == scheme.labels());
    CHECK(again.depth() == scheme.depth());
    CHECK(write_csv(scheme_to_table(again)) == write_csv(rendered));
}

TEST_CASE("property: coarsening is monotone in group size") {
    std::mt19937_64 rng(20260810);
    for (int iter = 0; iter < 100; ++iter) {
        auto random = testutil::random_case(rng);
        CollapseScheme scheme = scheme_from_formula(random.table, random.formula);
        // For each label, the set of labels sharing its key grows with level.
        for (std::size_t lbl = 0; lbl < scheme.labels().size(); ++lbl) {
            std::set<std::size_t> prev{lbl};
            for (std::size_t level = 1; level <= scheme.depth(); ++level) {
                std::set<std::size_t> members;
                for (std::size_t other = 0; other < scheme.labels().size(); ++other) {
                    if (scheme.level_key(other, level) == scheme.level_key(lbl, level)) {
                        members.insert(other);
                    }
                }
                for (std::size_t p : prev) CHECK(members.count(p) == 1);
                prev = std::move(members);
            }
        }
    }
}
