#include "rollup/dsl.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

#include "rollup/error.hpp"
#include "rollup/table.hpp"
#include "rollup/value.hpp"

namespace rollup::dsl {

namespace {

enum class Tok {
    End, Newline, Ident, Number,
    Tilde, Star, Plus, Minus, Slash,
    LParen, RParen, Comma, Semicolon, Assign, Dot,
    Lt, Le, Gt, Ge, Eq, Ne, And, Or, Not,
};

struct Token {
    Tok kind;
    std::size_t offset;
    std::string text;   // Ident
    double number = 0;  // Number
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    // Newlines inside parentheses are plain whitespace; at depth zero they
    // become separator tokens.
    std::vector<Token> run() {
        std::vector<Token> out;
        int paren_depth = 0;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ' ' || c == '\t' || c == '\r') {
                ++pos_;
                continue;
            }
            if (c == '\n') {
                if (paren_depth == 0) out.push_back({Tok::Newline, pos_, {}, 0});
                ++pos_;
                continue;
            }
            if (is_ident_head(c)) {
                std::size_t start = pos_;
                while (pos_ < text_.size() && is_ident_tail(text_[pos_])) ++pos_;
                out.push_back({Tok::Ident, start, std::string(text_.substr(start, pos_ - start)), 0});
                continue;
            }
            if ((c >= '0' && c <= '9') || (c == '.' && pos_ + 1 < text_.size() &&
                                           text_[pos_ + 1] >= '0' && text_[pos_ + 1] <= '9')) {
                out.push_back(lex_number());
                continue;
            }
            std::size_t start = pos_;
            auto two = [&](char a, char b) {
                return c == a && pos_ + 1 < text_.size() && text_[pos_ + 1] == b;
            };
            Tok kind;
            std::size_t len = 1;
            if (two('<', '=')) { kind = Tok::Le; len = 2; }
            else if (two('>', '=')) { kind = Tok::Ge; len = 2; }
            else if (two('=', '=')) { kind = Tok::Eq; len = 2; }
            else if (two('!', '=')) { kind = Tok::Ne; len = 2; }
            else if (two('&', '&')) { kind = Tok::And; len = 2; }
            else if (two('|', '|')) { kind = Tok::Or; len = 2; }
            else switch (c) {
                case '<': kind = Tok::Lt; break;
                case '>': kind = Tok::Gt; break;
                case '!': kind = Tok::Not; break;
                case '~': kind = Tok::Tilde; break;
                case '*': kind = Tok::Star; break;
                case '+': kind = Tok::Plus; break;
                case '-': kind = Tok::Minus; break;
                case '/': kind = Tok::Slash; break;
                case '(': kind = Tok::LParen; ++paren_depth; break;
                case ')': kind = Tok::RParen; paren_depth = std::max(0, paren_depth - 1); break;
                case ',': kind = Tok::Comma; break;
                case ';': kind = Tok::Semicolon; break;
                case '=': kind = Tok::Assign; break;
                case '.': kind = Tok::Dot; break;
                default:
                    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
            }
            pos_ += len;
            out.push_back({kind, start, {}, 0});
        }
        out.push_back({Tok::End, text_.size(), {}, 0});
        return out;
    }

private:
    static bool is_ident_head(char c) {
        return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
    }
    static bool is_ident_tail(char c) {
        return is_ident_head(c) || (c >= '0' && c <= '9') || c == '.';
    }

    Token lex_number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
                while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
            } else {
                pos_ = mark;  // "3e" is the number 3 followed by ident "e"
            }
        }
        std::string_view token = text_.substr(start, pos_ - start);
        double v = 0.0;
        auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
        if (ec != std::errc{} || end != token.data() + token.size()) {
            throw ParseError("malformed number", start);
        }
        return {Tok::Number, start, {}, v};
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

const std::map<std::string, CallFn, std::less<>> kRuleFns = {
    {"nrow", CallFn::NRow},   {"sum", CallFn::Sum},
    {"mean", CallFn::Mean},   {"min", CallFn::Min},
    {"max", CallFn::Max},     {"count_complete", CallFn::CountComplete},
};

const std::map<std::string, CallFn, std::less<>> kAggFns = {
    {"nrow", CallFn::NRow},     {"sum", CallFn::Sum},
    {"mean", CallFn::Mean},     {"min", CallFn::Min},
    {"max", CallFn::Max},       {"count_complete", CallFn::CountComplete},
    {"median", CallFn::Median}, {"sample", CallFn::Sample},
    {"ols", CallFn::Ols},
};

bool accepts_na_rm(CallFn fn) {
    switch (fn) {
        case CallFn::Sum:
        case CallFn::Mean:
        case CallFn::Min:
        case CallFn::Max:
        case CallFn::Median:
            return true;
        default:
            return false;
    }
}

class Parser {
public:
    Parser(std::string_view text, const std::map<std::string, CallFn, std::less<>>& fns)
        : tokens_(Lexer(text).run()), fns_(fns) {}

    const Token& peek() const { return tokens_[pos_]; }
    const Token& next() { return tokens_[pos_++]; }
    bool at(Tok kind) const { return peek().kind == kind; }

    bool accept(Tok kind) {
        if (!at(kind)) return false;
        ++pos_;
        return true;
    }

    Token expect(Tok kind, const char* what) {
        if (!at(kind)) throw ParseError(std::string("expected ") + what, peek().offset);
        return next();
    }

    void skip_separators() {
        while (at(Tok::Newline) || at(Tok::Semicolon)) ++pos_;
    }

    static ExprPtr binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, std::size_t offset) {
        auto node = std::make_shared<Expr>();
        node->kind = Expr::Kind::Binary;
        node->offset = offset;
        node->op = op;
        node->lhs = std::move(lhs);
        node->rhs = std::move(rhs);
        return node;
    }

    std::optional<BinaryOp> comparison_op() const {
        switch (peek().kind) {
            case Tok::Lt: return BinaryOp::Lt;
            case Tok::Le: return BinaryOp::Le;
            case Tok::Gt: return BinaryOp::Gt;
            case Tok::Ge: return BinaryOp::Ge;
            case Tok::Eq: return BinaryOp::Eq;
            case Tok::Ne: return BinaryOp::Ne;
            default: return std::nullopt;
        }
    }

    // expr := or_expr
    ExprPtr parse_expr() { return parse_or(); }

    ExprPtr parse_or() {
        ExprPtr lhs = parse_and();
        while (at(Tok::Or)) {
            std::size_t off = next().offset;
            lhs = binary(BinaryOp::Or, lhs, parse_and(), off);
        }
        return lhs;
    }

    ExprPtr parse_and() {
        ExprPtr lhs = parse_not();
        while (at(Tok::And)) {
            std::size_t off = next().offset;
            lhs = binary(BinaryOp::And, lhs, parse_not(), off);
        }
        return lhs;
    }

    ExprPtr parse_not() {
        if (at(Tok::Not)) {
            std::size_t off = next().offset;
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::Not;
            node->offset = off;
            node->operand = parse_not();
            return node;
        }
        return parse_comparison();
    }

    ExprPtr parse_comparison() {
        ExprPtr lhs = parse_additive();
        auto op = comparison_op();
        if (!op) return lhs;
        std::size_t off = next().offset;
        ExprPtr rhs = parse_additive();
        if (comparison_op()) {
            throw ParseError("comparisons do not chain", peek().offset);
        }
        return binary(*op, lhs, rhs, off);
    }

    ExprPtr parse_additive() {
        ExprPtr lhs = parse_multiplicative();
        while (at(Tok::Plus) || at(Tok::Minus)) {
            BinaryOp op = at(Tok::Plus) ? BinaryOp::Add : BinaryOp::Sub;
            std::size_t off = next().offset;
            lhs = binary(op, lhs, parse_multiplicative(), off);
        }
        return lhs;
    }

    ExprPtr parse_multiplicative() {
        ExprPtr lhs = parse_unary();
        while (at(Tok::Star) || at(Tok::Slash)) {
            BinaryOp op = at(Tok::Star) ? BinaryOp::Mul : BinaryOp::Div;
            std::size_t off = next().offset;
            lhs = binary(op, lhs, parse_unary(), off);
        }
        return lhs;
    }

    ExprPtr parse_unary() {
        if (at(Tok::Minus)) {
            std::size_t off = next().offset;
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::Negate;
            node->offset = off;
            node->operand = parse_unary();
            return node;
        }
        return parse_primary();
    }

    ExprPtr parse_primary() {
        if (at(Tok::Number)) {
            Token t = next();
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::Number;
            node->offset = t.offset;
            node->number = t.number;
            return node;
        }
        if (accept(Tok::LParen)) {
            ExprPtr inner = parse_expr();
            expect(Tok::RParen, "')'");
            return inner;
        }
        if (at(Tok::Ident)) {
            Token t = next();
            if (at(Tok::LParen)) return parse_call(t);
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::ColumnRef;
            node->offset = t.offset;
            node->column = t.text;
            return node;
        }
        throw ParseError("expected expression", peek().offset);
    }

    ExprPtr parse_call(const Token& name) {
        auto it = fns_.find(name.text);
        if (it == fns_.end()) {
            throw ParseError("unknown function '" + name.text + "'", name.offset);
        }
        auto node = std::make_shared<Expr>();
        node->kind = Expr::Kind::Call;
        node->offset = name.offset;
        node->fn = it->second;
        expect(Tok::LParen, "'('");
        if (node->fn == CallFn::NRow && at(Tok::Dot)) {
            next();  // nrow(.) alias
            expect(Tok::RParen, "')'");
            return node;
        }
        if (!accept(Tok::RParen)) {
            while (true) {
                if (at(Tok::Ident) && peek().text == "na_rm") {
                    std::size_t off = next().offset;
                    if (!accepts_na_rm(node->fn)) {
                        throw ParseError("na_rm is not supported by " +
                                         std::string(fn_name(node->fn)), off);
                    }
                    if (node->na_rm) throw ParseError("duplicate na_rm flag", off);
                    node->na_rm = true;
                    if (!accept(Tok::Comma)) break;
                    continue;
                }
                if (node->na_rm) {
                    throw ParseError("na_rm must be the last argument", peek().offset);
                }
                node->args.push_back(parse_expr());
                if (!accept(Tok::Comma)) break;
            }
            expect(Tok::RParen, "')'");
        }
        check_arity(*node, name.offset);
        return node;
    }

    void check_arity(const Expr& call, std::size_t offset) {
        std::size_t n = call.args.size();
        switch (call.fn) {
            case CallFn::NRow:
                if (n != 0) throw ParseError("nrow takes no arguments", offset);
                break;
            case CallFn::Sum:
            case CallFn::Mean:
            case CallFn::Min:
            case CallFn::Max:
            case CallFn::Median:
                if (n != 1) {
                    throw ParseError(std::string(fn_name(call.fn)) +
                                     " takes exactly one argument", offset);
                }
                break;
            case CallFn::CountComplete:
                if (n == 0) {
                    throw ParseError("count_complete needs at least one variable", offset);
                }
                for (const ExprPtr& a : call.args) {
                    if (a->kind != Expr::Kind::ColumnRef) {
                        throw ParseError("count_complete arguments must be column names",
                                         a->offset);
                    }
                }
                break;
            case CallFn::Sample:
                if (n != 1 || call.args[0]->kind != Expr::Kind::ColumnRef) {
                    throw ParseError("sample takes exactly one column name", offset);
                }
                break;
            case CallFn::Ols:
                if (n != 2) throw ParseError("ols takes exactly two arguments", offset);
                break;
        }
    }

    const std::vector<Token> tokens_;
    const std::map<std::string, CallFn, std::less<>>& fns_;
    std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Type checking
// ---------------------------------------------------------------------------

enum class ExprType { Num, Bool, Multi };

// Checks well-typedness and that row-level constructs (column references)
// appear only inside group-function arguments.
ExprType type_of(const Expr& e, bool inside_call) {
    switch (e.kind) {
        case Expr::Kind::Number:
            return ExprType::Num;
        case Expr::Kind::ColumnRef:
            if (!inside_call) {
                throw ParseError("column '" + e.column +
                                 "' referenced outside an aggregation function", e.offset);
            }
            return ExprType::Num;
        case Expr::Kind::Negate: {
            if (type_of(*e.operand, inside_call) != ExprType::Num) {
                throw ParseError("unary '-' needs a numeric operand", e.offset);
            }
            return ExprType::Num;
        }
        case Expr::Kind::Not: {
            if (type_of(*e.operand, inside_call) != ExprType::Bool) {
                throw ParseError("'!' needs a boolean operand", e.offset);
            }
            return ExprType::Bool;
        }
        case Expr::Kind::Binary: {
            ExprType l = type_of(*e.lhs, inside_call);
            ExprType r = type_of(*e.rhs, inside_call);
            switch (e.op) {
                case BinaryOp::Add:
                case BinaryOp::Sub:
                case BinaryOp::Mul:
                case BinaryOp::Div:
                    if (l != ExprType::Num || r != ExprType::Num) {
                        throw ParseError("arithmetic needs numeric operands", e.offset);
                    }
                    return ExprType::Num;
                case BinaryOp::Lt:
                case BinaryOp::Le:
                case BinaryOp::Gt:
                case BinaryOp::Ge:
                case BinaryOp::Eq:
                case BinaryOp::Ne:
                    if (l != ExprType::Num || r != ExprType::Num) {
                        throw ParseError("comparison needs numeric operands", e.offset);
                    }
                    return ExprType::Bool;
                case BinaryOp::And:
                case BinaryOp::Or:
                    if (l != ExprType::Bool || r != ExprType::Bool) {
                        throw ParseError("'&&'/'||' need boolean operands", e.offset);
                    }
                    return ExprType::Bool;
            }
            return ExprType::Num;  // unreachable
        }
        case Expr::Kind::Call: {
            if (inside_call) {
                throw ParseError("aggregation functions do not nest", e.offset);
            }
            switch (e.fn) {
                case CallFn::NRow:
                case CallFn::CountComplete:
                    return ExprType::Num;
                case CallFn::Sum:
                case CallFn::Mean:
                case CallFn::Min:
                case CallFn::Max:
                case CallFn::Median: {
                    // A row-level boolean argument coerces to 1/0/Null.
                    type_of(*e.args[0], true);
                    return ExprType::Num;
                }
                case CallFn::Sample:
                    return ExprType::Num;
                case CallFn::Ols:
                    if (type_of(*e.args[0], true) != ExprType::Num ||
                        type_of(*e.args[1], true) != ExprType::Num) {
                        throw ParseError("ols arguments must be numeric", e.offset);
                    }
                    return ExprType::Multi;
            }
            return ExprType::Num;  // unreachable
        }
    }
    return ExprType::Num;  // unreachable
}

}  // namespace

// ---------------------------------------------------------------------------
// Formula
// ---------------------------------------------------------------------------

CollapseFormula parse_formula(std::string_view text) {
    Parser p(text, kRuleFns);
    p.skip_separators();

    auto parse_vars = [&](const char* side) {
        std::vector<std::string> vars;
        while (true) {
            Token t = p.expect(Tok::Ident, "variable name");
            if (std::find(vars.begin(), vars.end(), t.text) != vars.end()) {
                throw ParseError("duplicate variable '" + t.text + "' in " + side, t.offset);
            }
            vars.push_back(t.text);
            if (!p.accept(Tok::Star)) break;
        }
        return vars;
    };

    CollapseFormula formula;
    formula.target = parse_vars("target grouping");
    p.expect(Tok::Tilde, "'~'");
    formula.alternatives.push_back(parse_vars("collapsing term"));
    while (p.accept(Tok::Plus)) {
        formula.alternatives.push_back(parse_vars("collapsing term"));
    }
    p.skip_separators();
    if (!p.at(Tok::End)) {
        throw ParseError("unexpected trailing input", p.peek().offset);
    }
    return formula;
}

std::string to_string(const CollapseFormula& formula) {
    std::ostringstream out;
    auto join = [&](const std::vector<std::string>& vars) {
        for (std::size_t i = 0; i < vars.size(); ++i) {
            if (i > 0) out << " * ";
            out << vars[i];
        }
    };
    join(formula.target);
    out << " ~ ";
    for (std::size_t i = 0; i < formula.alternatives.size(); ++i) {
        if (i > 0) out << " + ";
        join(formula.alternatives[i]);
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Rules
// ---------------------------------------------------------------------------

std::vector<ExprPtr> parse_rules(std::string_view text) {
    Parser p(text, kRuleFns);
    std::vector<ExprPtr> rules;
    p.skip_separators();
    while (!p.at(Tok::End)) {
        ExprPtr rule = p.parse_expr();
        if (type_of(*rule, false) != ExprType::Bool) {
            throw ParseError("a rule must be a boolean expression", rule->offset);
        }
        rules.push_back(std::move(rule));
        if (!p.at(Tok::End) && !p.at(Tok::Newline) && !p.at(Tok::Semicolon)) {
            throw ParseError("expected ';' or newline between rules", p.peek().offset);
        }
        p.skip_separators();
    }
    if (rules.empty()) throw ParseError("no rules given", 0);
    return rules;
}

// ---------------------------------------------------------------------------
// Aggregation expressions
// ---------------------------------------------------------------------------

AggExprList parse_agg_exprs(std::string_view text) {
    Parser p(text, kAggFns);
    AggExprList exprs;
    p.skip_separators();
    while (!p.at(Tok::End)) {
        Token name = p.expect(Tok::Ident, "output name");
        if (!Table::is_identifier(name.text)) {
            throw ParseError("invalid output name '" + name.text + "'", name.offset);
        }
        for (const AggExpr& prior : exprs.items) {
            if (prior.name == name.text) {
                throw ParseError("duplicate output name '" + name.text + "'", name.offset);
            }
        }
        p.expect(Tok::Assign, "'='");
        ExprPtr expr = p.parse_expr();
        ExprType type = type_of(*expr, false);
        if (type == ExprType::Bool) {
            throw ParseError("aggregation expression must be numeric", expr->offset);
        }
        if (type == ExprType::Multi && expr->kind != Expr::Kind::Call) {
            throw ParseError("ols cannot be combined with arithmetic", expr->offset);
        }
        exprs.items.push_back({name.text, std::move(expr)});
        if (!p.at(Tok::End) && !p.at(Tok::Newline) && !p.at(Tok::Semicolon)) {
            throw ParseError("expected ';' or newline between expressions", p.peek().offset);
        }
        p.skip_separators();
    }
    if (exprs.items.empty()) throw ParseError("no aggregation expressions given", 0);
    return exprs;
}

// ---------------------------------------------------------------------------
// Printing and equality
// ---------------------------------------------------------------------------

const char* fn_name(CallFn fn) {
    switch (fn) {
        case CallFn::NRow: return "nrow";
        case CallFn::Sum: return "sum";
        case CallFn::Mean: return "mean";
        case CallFn::Min: return "min";
        case CallFn::Max: return "max";
        case CallFn::Median: return "median";
        case CallFn::CountComplete: return "count_complete";
        case CallFn::Sample: return "sample";
        case CallFn::Ols: return "ols";
    }
    return "?";
}

namespace {

// Higher binds tighter. Used to print with minimal parentheses.
int precedence(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Binary:
            switch (e.op) {
                case BinaryOp::Or: return 1;
                case BinaryOp::And: return 2;
                case BinaryOp::Lt:
                case BinaryOp::Le:
                case BinaryOp::Gt:
                case BinaryOp::Ge:
                case BinaryOp::Eq:
                case BinaryOp::Ne: return 4;
                case BinaryOp::Add:
                case BinaryOp::Sub: return 5;
                case BinaryOp::Mul:
                case BinaryOp::Div: return 6;
            }
            return 0;
        case Expr::Kind::Not: return 3;
        case Expr::Kind::Negate: return 7;
        default: return 8;
    }
}

const char* op_text(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::Lt: return "<";
        case BinaryOp::Le: return "<=";
        case BinaryOp::Gt: return ">";
        case BinaryOp::Ge: return ">=";
        case BinaryOp::Eq: return "==";
        case BinaryOp::Ne: return "!=";
        case BinaryOp::And: return "&&";
        case BinaryOp::Or: return "||";
    }
    return "?";
}

void print(const Expr& e, std::ostream& out, int parent_prec) {
    int prec = precedence(e);
    bool parens = prec < parent_prec;
    if (parens) out << '(';
    switch (e.kind) {
        case Expr::Kind::Number:
            out << canonical_number(e.number);
            break;
        case Expr::Kind::ColumnRef:
            out << e.column;
            break;
        case Expr::Kind::Negate:
            out << '-';
            print(*e.operand, out, prec + 1);
            break;
        case Expr::Kind::Not:
            out << '!';
            print(*e.operand, out, prec + 1);
            break;
        case Expr::Kind::Binary:
            // Left-associative: the right child needs parens at equal precedence.
            print(*e.lhs, out, prec);
            out << ' ' << op_text(e.op) << ' ';
            print(*e.rhs, out, prec + 1);
            break;
        case Expr::Kind::Call: {
            out << fn_name(e.fn) << '(';
            for (std::size_t i = 0; i < e.args.size(); ++i) {
                if (i > 0) out << ", ";
                print(*e.args[i], out, 0);
            }
            if (e.na_rm) {
                if (!e.args.empty()) out << ", ";
                out << "na_rm";
            }
            out << ')';
            break;
        }
    }
    if (parens) out << ')';
}

}  // namespace

std::string to_string(const Expr& expr) {
    std::ostringstream out;
    print(expr, out, 0);
    return out.str();
}

std::string to_string(const AggExprList& exprs) {
    std::ostringstream out;
    for (std::size_t i = 0; i < exprs.items.size(); ++i) {
        if (i > 0) out << "; ";
        out << exprs.items[i].name << " = " << to_string(*exprs.items[i].expr);
    }
    return out.str();
}

bool equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Expr::Kind::Number:
            return a.number == b.number;
        case Expr::Kind::ColumnRef:
            return a.column == b.column;
        case Expr::Kind::Negate:
        case Expr::Kind::Not:
            return equal(*a.operand, *b.operand);
        case Expr::Kind::Binary:
            return a.op == b.op && equal(*a.lhs, *b.lhs) && equal(*a.rhs, *b.rhs);
        case Expr::Kind::Call: {
            if (a.fn != b.fn || a.na_rm != b.na_rm || a.args.size() != b.args.size()) {
                return false;
            }
            for (std::size_t i = 0; i < a.args.size(); ++i) {
                if (!equal(*a.args[i], *b.args[i])) return false;
            }
            return true;
        }
    }
    return false;
}

}  // namespace rollup::dsl
