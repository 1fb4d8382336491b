#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace rollup::dsl {

/// Parsed collapsing-scheme formula: `target ~ alt1 + alt2 + ... + altN`
/// where each side is a `*`-separated list of column identifiers.
struct CollapseFormula {
    std::vector<std::string> target;
    std::vector<std::vector<std::string>> alternatives;
};

CollapseFormula parse_formula(std::string_view text);
std::string to_string(const CollapseFormula& formula);

enum class BinaryOp { Add, Sub, Mul, Div, Lt, Le, Gt, Ge, Eq, Ne, And, Or };

enum class CallFn { NRow, Sum, Mean, Min, Max, Median, CountComplete, Sample, Ols };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Expression node shared by the rule DSL and the aggregation DSL.
/// Group-level calls take row-level argument expressions; everything outside
/// a call is group-level.
struct Expr {
    enum class Kind { Number, ColumnRef, Binary, Not, Negate, Call };

    Kind kind;
    std::size_t offset = 0;  // byte offset in the source text

    double number = 0.0;             // Kind::Number
    std::string column;              // Kind::ColumnRef
    BinaryOp op = BinaryOp::Add;     // Kind::Binary
    ExprPtr lhs, rhs;                // Kind::Binary
    ExprPtr operand;                 // Kind::Not / Kind::Negate
    CallFn fn = CallFn::NRow;        // Kind::Call
    std::vector<ExprPtr> args;       // Kind::Call
    bool na_rm = false;              // Kind::Call, trailing `na_rm` flag
};

bool equal(const Expr& a, const Expr& b);
std::string to_string(const Expr& expr);

/// Group-quality rules: boolean expressions separated by `;` or newline.
/// `nrow(.)` is accepted as an alias for `nrow()`.
std::vector<ExprPtr> parse_rules(std::string_view text);

/// One named aggregation output.
struct AggExpr {
    std::string name;
    ExprPtr expr;
};

struct AggExprList {
    std::vector<AggExpr> items;
};

/// Named aggregation expressions: `name = expr` assignments separated by
/// `;` or newline. `ols(y, x)` may only appear as a whole right-hand side.
AggExprList parse_agg_exprs(std::string_view text);
std::string to_string(const AggExprList& exprs);

const char* fn_name(CallFn fn);

}  // namespace rollup::dsl
