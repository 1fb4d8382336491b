#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rollup/dsl.hpp"
#include "rollup/table.hpp"

namespace rollup {

/// Aggregators available in apply-to-all-columns mode.
enum class ColumnAggregator { Mean, Sum, Min, Max, Median, Count };

std::optional<ColumnAggregator> parse_aggregator(std::string_view name);
const char* aggregator_name(ColumnAggregator agg);

/// Either one aggregator applied to every non-grouping column, or a list of
/// named expressions.
class AggregationPlan {
public:
    static AggregationPlan all_columns(ColumnAggregator aggregator, bool na_rm = false);
    static AggregationPlan named(dsl::AggExprList exprs);

    bool is_all_columns() const { return all_columns_; }
    ColumnAggregator aggregator() const { return aggregator_; }
    bool na_rm() const { return na_rm_; }
    const dsl::AggExprList& exprs() const { return exprs_; }

private:
    AggregationPlan() = default;

    bool all_columns_ = false;
    ColumnAggregator aggregator_ = ColumnAggregator::Mean;
    bool na_rm_ = false;
    dsl::AggExprList exprs_;
};

struct NamedValue {
    std::string name;
    Value value;

    friend bool operator==(const NamedValue&, const NamedValue&) = default;
};

/// Output column names of a plan, in emission order. All-columns plans name
/// outputs after the aggregated columns; named plans use the expression
/// names, with `ols` expanding to `<name>_intercept` and `<name>_slope`.
std::vector<std::string> agg_output_names(const AggregationPlan& plan, const Table& table,
                                          const std::vector<std::string>& grouping_vars);

/// Evaluates a plan over one group subset. A numeric aggregate of a textual
/// column yields Null, as does an aggregate over zero usable values.
std::vector<NamedValue> eval_agg(const AggregationPlan& plan, const RowSubset& subset,
                                 const std::vector<std::string>& grouping_vars,
                                 std::uint64_t group_seed);

/// Settings for scalar group-expression evaluation.
struct GroupEvalOptions {
    std::uint64_t group_seed = 0;
    /// sum() over zero usable values: aggregation outputs want Null, the
    /// rule DSL wants 0 so count-style tests fail cleanly instead of
    /// poisoning the predicate.
    bool sum_empty_is_null = true;
};

/// Evaluates a scalar group-level expression under three-valued logic:
/// booleans are 1/0/Null, arithmetic on Null and division by zero give Null.
/// Throws SchemaError for unknown columns; ols is handled by eval_agg only.
Value eval_group_expr(const dsl::Expr& expr, const RowSubset& subset,
                      const GroupEvalOptions& options);

/// Uniform draw over the non-Null values using a counter-based generator;
/// Null when no such value exists. `stream` separates draws of multiple
/// sample() call sites under the same group seed.
Value sample_value(const std::vector<Value>& cells, std::uint64_t group_seed,
                   std::uint64_t stream = 0);

struct OlsCoefficients {
    Value intercept;
    Value slope;
};

/// Ordinary least squares y = b0 + b1*x. Pairs with a Null on either side
/// are dropped; fewer than two complete pairs or zero variance in x give
/// Null coefficients.
OlsCoefficients ols_fit(const std::vector<Value>& y, const std::vector<Value>& x);

/// Stable per-group seed: a fixed 64-bit mix of the global seed and the
/// label key, independent of evaluation order and thread schedule.
std::uint64_t derive_group_seed(std::uint64_t global_seed, std::string_view label_key);

}  // namespace rollup
