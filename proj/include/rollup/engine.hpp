#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rollup/aggregate.hpp"
#include "rollup/predicate.hpp"
#include "rollup/scheme.hpp"
#include "rollup/table.hpp"

namespace rollup {

/// Precomputed pullbacks: row positions per target label, and for each
/// collapse level the set of labels sharing a coarse key (the level's
/// fibers). Built once, read-only during a run.
struct GroupIndex {
    /// Aligned with scheme.labels(): sorted row positions per label.
    std::vector<std::vector<std::size_t>> rows_by_label;
    /// fibers[i-1][coarse key] = label indices mapping to that key at level i.
    std::vector<std::unordered_map<std::string, std::vector<std::size_t>>> fibers;
    /// Rows whose key did not match any scheme label (table-path schemes);
    /// they are excluded from every group.
    std::size_t unmatched_rows = 0;
};

/// Single pass over the data for level 0; level maps come from the scheme.
/// `key_column` overrides the data column holding the finest label for
/// single-variable (table-path) schemes.
GroupIndex build_index(const Table& table, const CollapseScheme& scheme,
                       const std::optional<std::string>& key_column = {});

struct ResultRow {
    TargetLabel label;
    std::optional<std::size_t> level;  // empty: scheme exhausted, values Null
    std::vector<NamedValue> values;

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

/// One row per target label, in scheme label order.
struct ResultTable {
    std::vector<std::string> target_vars;
    std::vector<std::string> value_names;
    std::vector<ResultRow> rows;

    /// Materializes label columns, the `level` column, and value columns.
    Table to_table() const;

    friend bool operator==(const ResultTable&, const ResultTable&) = default;
};

struct RunOptions {
    std::uint64_t seed = 0;
    unsigned threads = 0;  // 0: hardware concurrency
    std::optional<std::string> key_column;
};

struct RunStats {
    std::size_t predicate_calls = 0;
    std::size_t unmatched_rows = 0;
};

/// Split-apply-combine with collapsing groups. Per label, the collapse level
/// is raised until the predicate passes or the scheme is exhausted; exhausted
/// labels are emitted with a Null level and Null aggregates. Indeterminate or
/// Error predicate outcomes abort with a PredicateError.
ResultTable saccg(const Table& table, const CollapseScheme& scheme,
                  const TestPredicate& predicate, const AggregationPlan& plan,
                  const RunOptions& options = {}, RunStats* stats = nullptr);

/// Plain split-apply-combine: one aggregate per label over its own rows,
/// level column all zero.
ResultTable sac(const Table& table, const CollapseScheme& scheme,
                const AggregationPlan& plan, const RunOptions& options = {},
                RunStats* stats = nullptr);

}  // namespace rollup
