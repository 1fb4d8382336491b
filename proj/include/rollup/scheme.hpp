#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rollup/dsl.hpp"
#include "rollup/table.hpp"

namespace rollup {

/// One target group: the canonical key of each target grouping variable.
struct TargetLabel {
    std::vector<std::string> keys;

    /// Joins keys with an unprintable separator; used for indexing.
    std::string internal() const;
    /// Joins keys with '-'; used in output and diagnostics.
    std::string display() const;

    friend bool operator==(const TargetLabel&, const TargetLabel&) = default;
};

/// A collapsing scheme: the target partition plus an ordered sequence of
/// coarsenings. Labels are kept in first-occurrence order; every label has
/// exactly one coarse key per level, and each level is a function of the
/// previous one, so group subsets can only grow as the level increases.
class CollapseScheme {
public:
    const std::vector<std::string>& target_vars() const { return target_vars_; }
    const std::vector<std::string>& level_names() const { return level_names_; }

    /// Columns consumed by scheme construction; the engine's all-columns
    /// plan skips these.
    const std::vector<std::string>& used_vars() const { return used_vars_; }

    std::size_t depth() const { return level_names_.size(); }
    const std::vector<TargetLabel>& labels() const { return labels_; }

    std::optional<std::size_t> label_index(std::string_view internal_key) const;

    /// Coarse key of a label at `level` (1-based, <= depth()).
    const std::string& level_key(std::size_t label_index, std::size_t level) const {
        return level_keys_[label_index][level - 1];
    }

private:
    CollapseScheme() = default;
    void finalize();  // index labels, verify the coarsening tower

    std::vector<std::string> target_vars_;
    std::vector<std::string> level_names_;
    std::vector<std::string> used_vars_;
    std::vector<TargetLabel> labels_;
    std::vector<std::vector<std::string>> level_keys_;
    std::unordered_map<std::string, std::size_t> index_;

    friend CollapseScheme scheme_from_formula(const Table&, const dsl::CollapseFormula&);
    friend CollapseScheme scheme_from_table(const Table&);
};

/// Builds a scheme from data: labels are the distinct target-variable
/// combinations in first-occurrence row order; the level-i key of a label is
/// the canonical concatenation of the i-th alternative's values. Rows of the
/// same label must agree on every alternative variable.
CollapseScheme scheme_from_formula(const Table& table, const dsl::CollapseFormula& formula);

/// Builds a scheme from a child-parent table: the first column holds the
/// finest labels, each following column one coarsening step. Duplicate rows
/// are allowed and deduplicated; a child with two distinct parents is an
/// error, as is any Null cell.
CollapseScheme scheme_from_table(const Table& scheme_table);

/// Derives a scheme table from hierarchical classification codes: column A0
/// holds the codes verbatim, and column Ai truncates to max_len - i
/// characters, where codes already at or below that length are copied
/// unchanged so that shallow leaves survive every level.
Table csh_from_digits(const std::vector<std::string>& codes, std::size_t levels);

/// Renders a scheme back to child-parent tabular form.
Table scheme_to_table(const CollapseScheme& scheme);

}  // namespace rollup
