#include "rollup/aggregate.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "rollup/error.hpp"

namespace rollup {

namespace {

// -------------------------------------------------------------------------
// Deterministic RNG (splitmix64), stable across platforms and runs.
// -------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Unbiased bounded draw from a counter-based stream.
std::size_t uniform_index(std::uint64_t seed, std::uint64_t stream, std::size_t n) {
    std::uint64_t state = splitmix64(seed ^ splitmix64(stream ^ 0x5851f42d4c957f2dULL));
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    for (std::uint64_t counter = 0;; ++counter) {
        std::uint64_t r = splitmix64(state + counter);
        if (r < limit) return static_cast<std::size_t>(r % bound);
    }
}

// -------------------------------------------------------------------------
// Scalar aggregation over a stream of cell values
// -------------------------------------------------------------------------

// Collects the numeric inputs of an aggregate: Null stays Null, text is not
// a number and degrades to Null as well.
struct NumericPool {
    std::vector<double> usable;
    bool saw_null = false;

    void add(const Value& v) {
        if (v.is_number()) {
            usable.push_back(v.as_number());
        } else {
            saw_null = true;
        }
    }
};

Value aggregate_pool(ColumnAggregator agg, NumericPool& pool, bool na_rm,
                     bool sum_empty_is_null) {
    if (!na_rm && pool.saw_null) return Value{};
    std::vector<double>& xs = pool.usable;
    if (xs.empty()) {
        if (agg == ColumnAggregator::Sum && !sum_empty_is_null) return Value::number(0.0);
        return Value{};
    }
    switch (agg) {
        case ColumnAggregator::Sum: {
            double s = 0.0;
            for (double x : xs) s += x;
            return Value::number(s);
        }
        case ColumnAggregator::Mean: {
            double s = 0.0;
            for (double x : xs) s += x;
            return Value::number(s / static_cast<double>(xs.size()));
        }
        case ColumnAggregator::Min:
            return Value::number(*std::min_element(xs.begin(), xs.end()));
        case ColumnAggregator::Max:
            return Value::number(*std::max_element(xs.begin(), xs.end()));
        case ColumnAggregator::Median: {
            std::sort(xs.begin(), xs.end());
            std::size_t mid = xs.size() / 2;
            if (xs.size() % 2 == 1) return Value::number(xs[mid]);
            return Value::number((xs[mid - 1] + xs[mid]) / 2.0);
        }
        case ColumnAggregator::Count:
            break;  // handled by the caller; counts are not numeric pools
    }
    return Value{};
}

ColumnAggregator to_aggregator(dsl::CallFn fn) {
    switch (fn) {
        case dsl::CallFn::Sum: return ColumnAggregator::Sum;
        case dsl::CallFn::Mean: return ColumnAggregator::Mean;
        case dsl::CallFn::Min: return ColumnAggregator::Min;
        case dsl::CallFn::Max: return ColumnAggregator::Max;
        case dsl::CallFn::Median: return ColumnAggregator::Median;
        default: assert(false); return ColumnAggregator::Sum;
    }
}

// -------------------------------------------------------------------------
// Row-level expression evaluation (inside group-function arguments)
// -------------------------------------------------------------------------

Value eval_row_expr(const dsl::Expr& e, const RowSubset& subset, std::size_t row) {
    using K = dsl::Expr::Kind;
    switch (e.kind) {
        case K::Number:
            return Value::number(e.number);
        case K::ColumnRef:
            return subset.cell(row, subset.base().column_index(e.column));
        case K::Negate: {
            Value v = eval_row_expr(*e.operand, subset, row);
            if (!v.is_number()) return Value{};
            return Value::number(-v.as_number());
        }
        case K::Binary: {
            Value l = eval_row_expr(*e.lhs, subset, row);
            Value r = eval_row_expr(*e.rhs, subset, row);
            if (!l.is_number() || !r.is_number()) return Value{};
            double a = l.as_number(), b = r.as_number();
            using Op = dsl::BinaryOp;
            switch (e.op) {
                case Op::Add: return Value::number(a + b);
                case Op::Sub: return Value::number(a - b);
                case Op::Mul: return Value::number(a * b);
                case Op::Div: return b == 0.0 ? Value{} : Value::number(a / b);
                case Op::Lt: return Value::number(a < b ? 1.0 : 0.0);
                case Op::Le: return Value::number(a <= b ? 1.0 : 0.0);
                case Op::Gt: return Value::number(a > b ? 1.0 : 0.0);
                case Op::Ge: return Value::number(a >= b ? 1.0 : 0.0);
                case Op::Eq: return Value::number(a == b ? 1.0 : 0.0);
                case Op::Ne: return Value::number(a != b ? 1.0 : 0.0);
                default: return Value{};  // no boolean connectives at row level
            }
        }
        default:
            assert(false);
            return Value{};
    }
}

struct EvalState {
    const GroupEvalOptions& options;
    std::uint64_t sample_ordinal = 0;
};

Value eval_call(const dsl::Expr& e, const RowSubset& subset, EvalState& state) {
    using Fn = dsl::CallFn;
    switch (e.fn) {
        case Fn::NRow:
            return Value::number(static_cast<double>(subset.row_count()));
        case Fn::CountComplete: {
            std::vector<std::size_t> cols;
            for (const dsl::ExprPtr& arg : e.args) {
                cols.push_back(subset.base().column_index(arg->column));
            }
            std::size_t complete = 0;
            for (std::size_t r = 0; r < subset.row_count(); ++r) {
                bool ok = true;
                for (std::size_t c : cols) ok = ok && !subset.cell(r, c).is_null();
                complete += ok;
            }
            return Value::number(static_cast<double>(complete));
        }
        case Fn::Sample: {
            std::size_t col = subset.base().column_index(e.args[0]->column);
            std::vector<Value> cells;
            cells.reserve(subset.row_count());
            for (std::size_t r = 0; r < subset.row_count(); ++r) {
                cells.push_back(subset.cell(r, col));
            }
            return sample_value(cells, state.options.group_seed, state.sample_ordinal++);
        }
        case Fn::Sum:
        case Fn::Mean:
        case Fn::Min:
        case Fn::Max:
        case Fn::Median: {
            NumericPool pool;
            for (std::size_t r = 0; r < subset.row_count(); ++r) {
                pool.add(eval_row_expr(*e.args[0], subset, r));
            }
            return aggregate_pool(to_aggregator(e.fn), pool, e.na_rm,
                                  state.options.sum_empty_is_null);
        }
        case Fn::Ols:
            throw Error("ols is only valid as a whole named expression");
    }
    return Value{};
}

Value eval_group(const dsl::Expr& e, const RowSubset& subset, EvalState& state) {
    using K = dsl::Expr::Kind;
    switch (e.kind) {
        case K::Number:
            return Value::number(e.number);
        case K::Call:
            return eval_call(e, subset, state);
        case K::Negate: {
            Value v = eval_group(*e.operand, subset, state);
            if (!v.is_number()) return Value{};
            return Value::number(-v.as_number());
        }
        case K::Not: {
            Value v = eval_group(*e.operand, subset, state);
            if (!v.is_number()) return Value{};
            return Value::number(v.as_number() != 0.0 ? 0.0 : 1.0);
        }
        case K::Binary: {
            using Op = dsl::BinaryOp;
            if (e.op == Op::And || e.op == Op::Or) {
                // Kleene logic; short-circuit only on a decisive left side.
                Value l = eval_group(*e.lhs, subset, state);
                bool l_true = l.is_number() && l.as_number() != 0.0;
                bool l_false = l.is_number() && l.as_number() == 0.0;
                if (e.op == Op::And && l_false) return Value::number(0.0);
                if (e.op == Op::Or && l_true) return Value::number(1.0);
                Value r = eval_group(*e.rhs, subset, state);
                bool r_true = r.is_number() && r.as_number() != 0.0;
                bool r_false = r.is_number() && r.as_number() == 0.0;
                if (e.op == Op::And) {
                    if (r_false) return Value::number(0.0);
                    if (l_true && r_true) return Value::number(1.0);
                    return Value{};
                }
                if (r_true) return Value::number(1.0);
                if (l_false && r_false) return Value::number(0.0);
                return Value{};
            }
            Value l = eval_group(*e.lhs, subset, state);
            Value r = eval_group(*e.rhs, subset, state);
            if (!l.is_number() || !r.is_number()) return Value{};
            double a = l.as_number(), b = r.as_number();
            switch (e.op) {
                case Op::Add: return Value::number(a + b);
                case Op::Sub: return Value::number(a - b);
                case Op::Mul: return Value::number(a * b);
                case Op::Div: return b == 0.0 ? Value{} : Value::number(a / b);
                case Op::Lt: return Value::number(a < b ? 1.0 : 0.0);
                case Op::Le: return Value::number(a <= b ? 1.0 : 0.0);
                case Op::Gt: return Value::number(a > b ? 1.0 : 0.0);
                case Op::Ge: return Value::number(a >= b ? 1.0 : 0.0);
                case Op::Eq: return Value::number(a == b ? 1.0 : 0.0);
                case Op::Ne: return Value::number(a != b ? 1.0 : 0.0);
                default: return Value{};
            }
        }
        case K::ColumnRef:
            throw SchemaError("column '" + e.column +
                              "' referenced outside an aggregation function");
    }
    return Value{};
}

bool is_grouping(const std::string& name, const std::vector<std::string>& grouping_vars) {
    return std::find(grouping_vars.begin(), grouping_vars.end(), name) !=
           grouping_vars.end();
}

}  // namespace

// -------------------------------------------------------------------------
// Public surface
// -------------------------------------------------------------------------

std::optional<ColumnAggregator> parse_aggregator(std::string_view name) {
    if (name == "mean") return ColumnAggregator::Mean;
    if (name == "sum") return ColumnAggregator::Sum;
    if (name == "min") return ColumnAggregator::Min;
    if (name == "max") return ColumnAggregator::Max;
    if (name == "median") return ColumnAggregator::Median;
    if (name == "count") return ColumnAggregator::Count;
    return std::nullopt;
}

const char* aggregator_name(ColumnAggregator agg) {
    switch (agg) {
        case ColumnAggregator::Mean: return "mean";
        case ColumnAggregator::Sum: return "sum";
        case ColumnAggregator::Min: return "min";
        case ColumnAggregator::Max: return "max";
        case ColumnAggregator::Median: return "median";
        case ColumnAggregator::Count: return "count";
    }
    return "?";
}

AggregationPlan AggregationPlan::all_columns(ColumnAggregator aggregator, bool na_rm) {
    AggregationPlan plan;
    plan.all_columns_ = true;
    plan.aggregator_ = aggregator;
    plan.na_rm_ = na_rm;
    return plan;
}

AggregationPlan AggregationPlan::named(dsl::AggExprList exprs) {
    AggregationPlan plan;
    plan.exprs_ = std::move(exprs);
    return plan;
}

std::vector<std::string> agg_output_names(const AggregationPlan& plan, const Table& table,
                                          const std::vector<std::string>& grouping_vars) {
    std::vector<std::string> names;
    if (plan.is_all_columns()) {
        for (std::size_t c = 0; c < table.column_count(); ++c) {
            const std::string& name = table.column(c).name();
            if (!is_grouping(name, grouping_vars)) names.push_back(name);
        }
        return names;
    }
    for (const dsl::AggExpr& item : plan.exprs().items) {
        if (item.expr->kind == dsl::Expr::Kind::Call && item.expr->fn == dsl::CallFn::Ols) {
            names.push_back(item.name + "_intercept");
            names.push_back(item.name + "_slope");
        } else {
            names.push_back(item.name);
        }
    }
    return names;
}

Value eval_group_expr(const dsl::Expr& expr, const RowSubset& subset,
                      const GroupEvalOptions& options) {
    EvalState state{options};
    return eval_group(expr, subset, state);
}

std::vector<NamedValue> eval_agg(const AggregationPlan& plan, const RowSubset& subset,
                                 const std::vector<std::string>& grouping_vars,
                                 std::uint64_t group_seed) {
    std::vector<NamedValue> out;
    const Table& table = subset.base();

    if (plan.is_all_columns()) {
        for (std::size_t c = 0; c < table.column_count(); ++c) {
            const Column& col = table.column(c);
            if (is_grouping(col.name(), grouping_vars)) continue;
            Value result;
            if (subset.row_count() > 0) {
                if (plan.aggregator() == ColumnAggregator::Count) {
                    std::size_t n = 0;
                    for (std::size_t r = 0; r < subset.row_count(); ++r) {
                        n += !subset.cell(r, c).is_null();
                    }
                    result = Value::number(static_cast<double>(n));
                } else {
                    NumericPool pool;
                    for (std::size_t r = 0; r < subset.row_count(); ++r) {
                        pool.add(subset.cell(r, c));
                    }
                    result = aggregate_pool(plan.aggregator(), pool, plan.na_rm(),
                                            /*sum_empty_is_null=*/true);
                }
            }
            out.push_back({col.name(), std::move(result)});
        }
        return out;
    }

    GroupEvalOptions options;
    options.group_seed = group_seed;
    options.sum_empty_is_null = true;
    EvalState state{options};
    for (const dsl::AggExpr& item : plan.exprs().items) {
        if (item.expr->kind == dsl::Expr::Kind::Call && item.expr->fn == dsl::CallFn::Ols) {
            std::vector<Value> ys, xs;
            ys.reserve(subset.row_count());
            xs.reserve(subset.row_count());
            for (std::size_t r = 0; r < subset.row_count(); ++r) {
                ys.push_back(eval_row_expr(*item.expr->args[0], subset, r));
                xs.push_back(eval_row_expr(*item.expr->args[1], subset, r));
            }
            OlsCoefficients fit = ols_fit(ys, xs);
            out.push_back({item.name + "_intercept", std::move(fit.intercept)});
            out.push_back({item.name + "_slope", std::move(fit.slope)});
        } else {
            out.push_back({item.name, eval_group(*item.expr, subset, state)});
        }
    }
    return out;
}

Value sample_value(const std::vector<Value>& cells, std::uint64_t group_seed,
                   std::uint64_t stream) {
    std::vector<const Value*> pool;
    pool.reserve(cells.size());
    for (const Value& v : cells) {
        if (!v.is_null()) pool.push_back(&v);
    }
    if (pool.empty()) return Value{};
    return *pool[uniform_index(group_seed, stream, pool.size())];
}

OlsCoefficients ols_fit(const std::vector<Value>& y, const std::vector<Value>& x) {
    std::vector<double> ys, xs;
    const std::size_t n = std::min(y.size(), x.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (y[i].is_number() && x[i].is_number()) {
            ys.push_back(y[i].as_number());
            xs.push_back(x[i].as_number());
        }
    }
    if (xs.size() < 2) return {};
    const double m = static_cast<double>(xs.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= m;
    mean_y /= m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
        sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
    }
    if (sxx == 0.0) return {};
    double slope = sxy / sxx;
    return {Value::number(mean_y - slope * mean_x), Value::number(slope)};
}

std::uint64_t derive_group_seed(std::uint64_t global_seed, std::string_view label_key) {
    return splitmix64(splitmix64(global_seed) ^ fnv1a64(label_key));
}

}  // namespace rollup
