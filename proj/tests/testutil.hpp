#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rollup/csv.hpp"
#include "rollup/engine.hpp"
#include "rollup/predicate.hpp"
#include "rollup/scheme.hpp"
#include "rollup/table.hpp"

namespace rollup::testutil {

// Nine-row dataset used throughout: three groups of A, hierarchical B with
// coarse digit B1, and two value columns.
inline Table small_input() {
    static const char* csv =
        "A,B,B1,Y,Y2\n"
        "1,11,1,1,11\n"
        "1,11,1,2,12\n"
        "1,11,1,3,13\n"
        "2,12,1,4,14\n"
        "2,12,1,5,15\n"
        "2,13,1,6,16\n"
        "3,21,2,7,17\n"
        "3,22,2,8,18\n"
        "3,12,1,9,19\n";
    return read_csv(std::string_view(csv));
}

inline TestPredicate always(bool pass) {
    return {pass ? "always pass" : "always fail", [pass](const RowSubset&) {
                return pass ? TestOutcome::pass() : TestOutcome::fail();
            }};
}

// ---------------------------------------------------------------------------
// Brute-force reference: recomputes every pullback with a linear scan and
// aggregates means directly. Shares no code with the engine's index.
// ---------------------------------------------------------------------------

struct NaiveConfig {
    std::size_t min_records = 1;    // predicate: at least this many rows
    bool always_pass = false;
};

inline ResultTable naive_saccg_mean(const Table& table, const CollapseScheme& scheme,
                                    const NaiveConfig& config,
                                    const std::optional<std::string>& key_column = {}) {
    std::vector<std::size_t> label_cols;
    if (key_column) {
        label_cols.push_back(table.column_index(*key_column));
    } else {
        for (const std::string& var : scheme.target_vars()) {
            label_cols.push_back(table.column_index(var));
        }
    }

    // Label index of every row, -1 when the key is unknown to the scheme.
    std::vector<std::ptrdiff_t> row_label(table.row_count(), -1);
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        TargetLabel label;
        for (std::size_t c : label_cols) {
            label.keys.push_back(canonical_key(table.cell(r, c)));
        }
        if (auto idx = scheme.label_index(label.internal())) {
            row_label[r] = static_cast<std::ptrdiff_t>(*idx);
        }
    }

    std::vector<std::string> grouping = scheme.used_vars();
    if (key_column) grouping.push_back(*key_column);
    std::vector<std::size_t> value_cols;
    std::vector<std::string> value_names;
    for (std::size_t c = 0; c < table.column_count(); ++c) {
        const std::string& name = table.column(c).name();
        bool is_grouping = false;
        for (const std::string& g : grouping) is_grouping = is_grouping || g == name;
        if (!is_grouping) {
            value_cols.push_back(c);
            value_names.push_back(name);
        }
    }

    auto rows_at_level = [&](std::size_t lbl, std::size_t level) {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < table.row_count(); ++r) {
            if (row_label[r] < 0) continue;
            auto rl = static_cast<std::size_t>(row_label[r]);
            bool member = level == 0
                              ? rl == lbl
                              : scheme.level_key(rl, level) == scheme.level_key(lbl, level);
            if (member) rows.push_back(r);
        }
        return rows;
    };

    ResultTable result;
    result.target_vars =
        key_column ? std::vector<std::string>{*key_column} : scheme.target_vars();
    result.value_names = value_names;
    for (std::size_t lbl = 0; lbl < scheme.labels().size(); ++lbl) {
        ResultRow out;
        out.label = scheme.labels()[lbl];
        std::size_t level = 0;
        std::vector<std::size_t> rows = rows_at_level(lbl, 0);
        auto passes = [&](const std::vector<std::size_t>& rs) {
            return config.always_pass || rs.size() >= config.min_records;
        };
        bool ok = passes(rows);
        while (!ok && level < scheme.depth()) {
            ++level;
            rows = rows_at_level(lbl, level);
            ok = passes(rows);
        }
        if (ok) {
            out.level = level;
            for (std::size_t i = 0; i < value_cols.size(); ++i) {
                double sum = 0.0;
                std::size_t n = 0;
                bool saw_null = false;
                bool numeric = table.column(value_cols[i]).kind() == ColumnKind::Numeric;
                for (std::size_t r : rows) {
                    const Value& v = table.cell(r, value_cols[i]);
                    if (v.is_number()) {
                        sum += v.as_number();
                        ++n;
                    } else {
                        saw_null = true;
                    }
                }
                Value mean;
                if (numeric && !saw_null && n > 0) mean = Value::number(sum / n);
                out.values.push_back({value_names[i], mean});
            }
        } else {
            for (const std::string& name : value_names) out.values.push_back({name, Value{}});
        }
        result.rows.push_back(std::move(out));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Random corpus: tables of <= 50 rows with grouping variables A, B of <= 4
// values, a tower of coarse columns L1..Ln derived per label, and a value
// column Y with some missing cells.
// ---------------------------------------------------------------------------

struct RandomCase {
    Table table;
    dsl::CollapseFormula formula;
    std::size_t depth;
};

inline RandomCase random_case(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> row_dist(1, 50);
    std::uniform_int_distribution<std::size_t> depth_dist(1, 3);
    std::uniform_int_distribution<int> group_dist(1, 4);
    std::uniform_real_distribution<double> y_dist(-10.0, 10.0);
    std::uniform_int_distribution<int> percent(0, 99);

    const std::size_t nrows = row_dist(rng);
    const std::size_t depth = depth_dist(rng);

    std::vector<Value> a_cells, b_cells, y_cells;
    std::vector<std::pair<int, int>> row_keys;
    for (std::size_t r = 0; r < nrows; ++r) {
        int a = group_dist(rng), b = group_dist(rng);
        row_keys.emplace_back(a, b);
        a_cells.push_back(Value::number(a));
        b_cells.push_back(Value::number(b));
        y_cells.push_back(percent(rng) < 20 ? Value{} : Value::number(y_dist(rng)));
    }

    // Coarse keys per label: level i+1 is a random function of level i, so
    // the columns always form a tower of coarsenings.
    std::vector<Column> columns;
    columns.emplace_back("A", ColumnKind::Numeric, a_cells);
    columns.emplace_back("B", ColumnKind::Numeric, b_cells);

    std::map<std::pair<int, int>, int> level_map;
    for (const auto& key : row_keys) {
        if (!level_map.count(key)) level_map[key] = group_dist(rng);
    }
    std::vector<int> prev(nrows);
    for (std::size_t r = 0; r < nrows; ++r) prev[r] = level_map[row_keys[r]];

    dsl::CollapseFormula formula;
    formula.target = {"A", "B"};
    for (std::size_t level = 1; level <= depth; ++level) {
        std::string name = "L" + std::to_string(level);
        std::vector<Value> cells(nrows);
        for (std::size_t r = 0; r < nrows; ++r) {
            cells[r] = Value::number(prev[r]);
        }
        columns.emplace_back(name, ColumnKind::Numeric, std::move(cells));
        formula.alternatives.push_back({name});
        if (level < depth) {
            std::map<int, int> coarser;
            for (std::size_t r = 0; r < nrows; ++r) {
                if (!coarser.count(prev[r])) coarser[prev[r]] = group_dist(rng);
            }
            for (std::size_t r = 0; r < nrows; ++r) prev[r] = coarser[prev[r]];
        }
    }
    columns.emplace_back("Y", ColumnKind::Numeric, y_cells);

    return {Table(std::move(columns)), std::move(formula), depth};
}

}  // namespace rollup::testutil
