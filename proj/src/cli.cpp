#include "rollup/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

#include "rollup/aggregate.hpp"
#include "rollup/csv.hpp"
#include "rollup/engine.hpp"
#include "rollup/error.hpp"
#include "rollup/predicate.hpp"
#include "rollup/scheme.hpp"

namespace rollup::cli {

namespace {

constexpr const char* kFormulaGrammar =
    "Collapse formula grammar:\n"
    "  formula := vars '~' vars ('+' vars)*\n"
    "  vars    := identifier ('*' identifier)*\n"
    "The left side is the target grouping, the right side the ordered\n"
    "collapsing sequence, e.g. \"A * B ~ A * B1 + A\".";

constexpr const char* kTestGrammar =
    "Test specification (--test / --test-file):\n"
    "  Built-ins: min_records(N), min_complete(N, v1, ...),\n"
    "             frac_complete(R, v1, ...)\n"
    "  Anything else is a rule set: boolean expressions separated by ';'\n"
    "  or newline, e.g. \"nrow() >= 3; sum(Y >= 2, na_rm) >= 3\".\n"
    "  rule   := bool ('&&' | '||') bool | '!' bool | num CMP num\n"
    "  num    := number | gfun | num ('+'|'-'|'*'|'/') num\n"
    "  gfun   := nrow() | nrow(.) | sum(e[, na_rm]) | mean(e[, na_rm])\n"
    "          | min(e[, na_rm]) | max(e[, na_rm]) | count_complete(v1, ...)\n"
    "  e      := row-level expression over columns, numbers, arithmetic\n"
    "            and comparisons (booleans count as 1/0, NA propagates)\n"
    "  CMP    := '<' | '<=' | '>' | '>=' | '==' | '!='";

constexpr const char* kExprGrammar =
    "Aggregation expressions (--expr / --expr-file):\n"
    "  assignments 'name = expr' separated by ';' or newline.\n"
    "  expr := gfun | number | expr ('+'|'-'|'*'|'/') expr\n"
    "  gfun := nrow() | sum(e[, na_rm]) | mean(e[, na_rm]) | min(e[, na_rm])\n"
    "        | max(e[, na_rm]) | median(e[, na_rm]) | count_complete(v1, ...)\n"
    "        | sample(v) | ols(y, x)\n"
    "  ols expands to <name>_intercept and <name>_slope; sample(v) draws one\n"
    "  non-missing value of v per group, deterministically from --seed.";

struct CommonArgs {
    std::string input = "-";
    std::string output = "-";
    std::string na_token = "NA";
    char delimiter = ',';
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::vector<std::string> text_columns;
};

struct SchemeArgs {
    std::string formula;
    std::string scheme_path;
    std::string key_column;
};

struct TestArgs {
    std::string spec;
    std::string file;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_seed) {
    cmd->add_option("--in", args.input, "Input CSV path ('-' for stdin)")
        ->capture_default_str();
    cmd->add_option("--out", args.output, "Output path ('-' for stdout)")
        ->capture_default_str();
    cmd->add_option("--na", args.na_token, "Missing-value token")->capture_default_str();
    cmd->add_option("--delim", args.delimiter, "Field delimiter")->capture_default_str();
    if (with_seed) {
        cmd->add_option("--seed", args.seed, "Seed for sampling aggregates")
            ->capture_default_str();
        cmd->add_option("--threads", args.threads,
                        "Worker threads (0 = available parallelism)")
            ->envname("ROLLUP_THREADS")
            ->capture_default_str();
        cmd->add_option("--text", args.text_columns,
                        "Read a column as text, keeping leading zeros of "
                        "classification codes (repeatable)");
    }
}

void add_scheme(CLI::App* cmd, SchemeArgs& args) {
    auto* collapse =
        cmd->add_option("--collapse", args.formula, "Collapsing scheme as a formula");
    auto* scheme = cmd->add_option("--scheme", args.scheme_path,
                                   "Collapsing scheme as a child-parent CSV");
    cmd->add_option("--key", args.key_column,
                    "Data column holding the finest group label (with --scheme)")
        ->needs(scheme);
    collapse->excludes(scheme);
    scheme->excludes(collapse);
}

void add_test(CLI::App* cmd, TestArgs& args) {
    auto* spec = cmd->add_option("--test", args.spec, "Group-quality test");
    auto* file = cmd->add_option("--test-file", args.file, "Group-quality test from a file");
    spec->excludes(file);
    file->excludes(spec);
}

CsvReadOptions read_options(const CommonArgs& args) {
    CsvReadOptions options;
    options.delimiter = args.delimiter;
    if (args.na_token != "NA" && !args.na_token.empty()) {
        options.na_tokens.push_back(args.na_token);
    }
    options.force_textual = args.text_columns;
    return options;
}

CsvWriteOptions write_options(const CommonArgs& args) {
    CsvWriteOptions options;
    options.delimiter = args.delimiter;
    options.na_token = args.na_token;
    return options;
}

Table read_input(const CommonArgs& args, const Streams& streams,
                 const CsvReadOptions& options) {
    if (args.input == "-") return read_csv(streams.in, options);
    std::ifstream file(args.input, std::ios::binary);
    if (!file) throw Error("cannot open input file: " + args.input);
    return read_csv(file, options);
}

void write_output(const Table& table, const CommonArgs& args, const Streams& streams) {
    if (args.output == "-") {
        write_csv(table, streams.out, write_options(args));
        return;
    }
    std::ofstream file(args.output, std::ios::binary);
    if (!file) throw Error("cannot open output file: " + args.output);
    write_csv(table, file, write_options(args));
}

std::string read_file(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw Error("cannot open file: " + path);
    std::ostringstream buf;
    buf << file.rdbuf();
    return buf.str();
}

// ---------------------------------------------------------------------------
// Built-in test mini-syntax. Built-in names are reserved: a spec starting
// with one must parse as a built-in, everything else is rule DSL.
// ---------------------------------------------------------------------------

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\n' ||
                          s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n' ||
                          s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string> split_args(std::string_view inside) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= inside.size(); ++i) {
        if (i == inside.size() || inside[i] == ',') {
            parts.emplace_back(trim(inside.substr(start, i - start)));
            start = i + 1;
        }
    }
    return parts;
}

std::optional<TestPredicate> parse_builtin_test(std::string_view text) {
    text = trim(text);
    static const std::vector<std::string> names = {"min_records", "min_complete",
                                                   "frac_complete"};
    const std::string* which = nullptr;
    for (const std::string& name : names) {
        if (text.substr(0, name.size()) != name) continue;
        std::string_view rest = trim(text.substr(name.size()));
        if (!rest.empty() && rest.front() == '(') {
            which = &name;
            break;
        }
    }
    if (!which) return std::nullopt;

    std::string_view rest = trim(text.substr(which->size()));
    if (rest.empty() || rest.front() != '(' || rest.back() != ')') {
        throw ParseError("malformed " + *which + " test", 0);
    }
    std::vector<std::string> args = split_args(rest.substr(1, rest.size() - 2));
    if (args.empty() || args[0].empty()) {
        throw ParseError(*which + " needs a numeric first argument", 0);
    }
    double threshold = 0.0;
    auto [end, ec] =
        std::from_chars(args[0].data(), args[0].data() + args[0].size(), threshold);
    if (ec != std::errc{} || end != args[0].data() + args[0].size()) {
        throw ParseError(*which + ": '" + args[0] + "' is not a number", 0);
    }
    std::vector<std::string> vars(args.begin() + 1, args.end());
    for (const std::string& v : vars) {
        if (!Table::is_identifier(v)) {
            throw ParseError(*which + ": '" + v + "' is not a column name", 0);
        }
    }

    if (*which == "min_records") {
        if (!vars.empty()) throw ParseError("min_records takes a single count", 0);
        if (threshold < 1 || threshold != static_cast<std::size_t>(threshold)) {
            throw ParseError("min_records needs a positive integer", 0);
        }
        return min_records(static_cast<std::size_t>(threshold));
    }
    if (vars.empty()) throw ParseError(*which + " needs at least one variable", 0);
    if (*which == "min_complete") {
        if (threshold < 1 || threshold != static_cast<std::size_t>(threshold)) {
            throw ParseError("min_complete needs a positive integer", 0);
        }
        return min_complete(static_cast<std::size_t>(threshold), std::move(vars));
    }
    if (threshold < 0.0 || threshold > 1.0) {
        throw ParseError("frac_complete needs a fraction in [0, 1]", 0);
    }
    return frac_complete(threshold, std::move(vars));
}

TestPredicate build_test(const TestArgs& args) {
    std::string text = args.file.empty() ? args.spec : read_file(args.file);
    if (trim(text).empty()) throw ParseError("empty test specification", 0);
    if (auto builtin = parse_builtin_test(text)) return std::move(*builtin);
    return from_rules(dsl::parse_rules(text));
}

CollapseScheme build_scheme(const SchemeArgs& args, const Table& data,
                            const CsvReadOptions& read_opts) {
    if (!args.formula.empty()) {
        return scheme_from_formula(data, dsl::parse_formula(args.formula));
    }
    std::ifstream file(args.scheme_path, std::ios::binary);
    if (!file) throw Error("cannot open scheme file: " + args.scheme_path);
    return scheme_from_table(read_csv(file, read_opts));
}

// The engine reports label/level in PredicateError; the spec's fixed `level`
// output column must not already exist in the input.
void reject_level_column(const Table& table) {
    if (table.has_column("level")) {
        throw SchemaError("the input already has a 'level' column, which is "
                          "reserved for the collapse level");
    }
}

int run_engine(const CommonArgs& common, const SchemeArgs& scheme_args,
               const TestArgs& test_args, const AggregationPlan& plan,
               const Streams& streams) {
    CsvReadOptions read_opts = read_options(common);
    Table data = read_input(common, streams, read_opts);
    reject_level_column(data);
    CollapseScheme scheme = build_scheme(scheme_args, data, read_opts);
    TestPredicate predicate = build_test(test_args);

    RunOptions options;
    options.seed = common.seed;
    options.threads = common.threads;
    if (!scheme_args.key_column.empty()) options.key_column = scheme_args.key_column;

    RunStats stats;
    ResultTable result = saccg(data, scheme, predicate, plan, options, &stats);
    if (stats.unmatched_rows > 0) {
        streams.err << "note: " << stats.unmatched_rows
                    << " row(s) matched no group label and were ignored\n";
    }
    write_output(result.to_table(), common, streams);
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, const Streams& streams) {
    CLI::App app{"Grouped aggregation with dynamically collapsing groups"};
    app.require_subcommand(1);

    CommonArgs common;
    SchemeArgs scheme_args;
    TestArgs test_args;

    // aggregate
    auto* aggregate_cmd = app.add_subcommand(
        "aggregate", "Apply one aggregator to every non-grouping column");
    std::string fun;
    bool na_rm = false;
    add_common(aggregate_cmd, common, /*with_seed=*/true);
    add_scheme(aggregate_cmd, scheme_args);
    add_test(aggregate_cmd, test_args);
    aggregate_cmd->add_option("--fun", fun, "Aggregator: mean|sum|min|max|median|count")
        ->required();
    aggregate_cmd->add_flag("--na-rm", na_rm, "Drop missing values before aggregating");
    aggregate_cmd->footer(std::string(kFormulaGrammar) + "\n\n" + kTestGrammar);

    // summarise
    auto* summarise_cmd =
        app.add_subcommand("summarise", "Compute named aggregation expressions");
    std::string expr_text, expr_file;
    add_common(summarise_cmd, common, /*with_seed=*/true);
    add_scheme(summarise_cmd, scheme_args);
    add_test(summarise_cmd, test_args);
    auto* expr_opt =
        summarise_cmd->add_option("--expr", expr_text, "name = expression pairs");
    auto* expr_file_opt = summarise_cmd->add_option("--expr-file", expr_file,
                                                    "Expressions read from a file");
    expr_opt->excludes(expr_file_opt);
    expr_file_opt->excludes(expr_opt);
    summarise_cmd->footer(std::string(kFormulaGrammar) + "\n\n" + kTestGrammar + "\n\n" +
                          kExprGrammar);

    // scheme-digits
    auto* digits_cmd = app.add_subcommand(
        "scheme-digits", "Derive a collapsing scheme from hierarchical codes");
    std::string codes_column;
    unsigned levels = 0;
    add_common(digits_cmd, common, /*with_seed=*/false);
    digits_cmd->add_option("--codes", codes_column, "Column holding the codes")->required();
    digits_cmd->add_option("--levels", levels, "Number of collapsing levels (>= 1)")
        ->required()
        ->check(CLI::PositiveNumber);
    digits_cmd->footer("Writes columns A0..A<levels>: A0 holds the codes, each next\n"
                       "column cuts one trailing character, copying codes that are\n"
                       "already short enough.");

    // smoke-test
    auto* smoke_cmd = app.add_subcommand(
        "smoke-test", "Check a test against edge cases of the input");
    add_common(smoke_cmd, common, /*with_seed=*/false);
    add_test(smoke_cmd, test_args);
    smoke_cmd->footer(kTestGrammar);

    try {
        std::vector<const char*> argv;
        argv.reserve(args.size() + 1);
        argv.push_back("rollup");
        for (const std::string& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        streams.out << app.help();  // delegates to the selected subcommand
        return 0;
    } catch (const CLI::ParseError& e) {
        streams.err << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (app.got_subcommand(aggregate_cmd)) {
            if (scheme_args.formula.empty() && scheme_args.scheme_path.empty()) {
                throw CLI::RequiredError("--collapse or --scheme");
            }
            if (test_args.spec.empty() && test_args.file.empty()) {
                throw CLI::RequiredError("--test or --test-file");
            }
            auto aggregator = parse_aggregator(fun);
            if (!aggregator) {
                streams.err << "usage error: unknown aggregator '" << fun << "'\n";
                return 2;
            }
            return run_engine(common, scheme_args, test_args,
                              AggregationPlan::all_columns(*aggregator, na_rm), streams);
        }
        if (app.got_subcommand(summarise_cmd)) {
            if (scheme_args.formula.empty() && scheme_args.scheme_path.empty()) {
                throw CLI::RequiredError("--collapse or --scheme");
            }
            if (test_args.spec.empty() && test_args.file.empty()) {
                throw CLI::RequiredError("--test or --test-file");
            }
            if (expr_text.empty() && expr_file.empty()) {
                throw CLI::RequiredError("--expr or --expr-file");
            }
            std::string text = expr_file.empty() ? expr_text : read_file(expr_file);
            AggregationPlan plan = AggregationPlan::named(dsl::parse_agg_exprs(text));
            return run_engine(common, scheme_args, test_args, plan, streams);
        }
        if (app.got_subcommand(digits_cmd)) {
            CsvReadOptions read_opts = read_options(common);
            read_opts.force_textual.push_back(codes_column);
            Table data = read_input(common, streams, read_opts);
            const Column& col = data.column(codes_column);
            std::vector<std::string> codes;
            codes.reserve(col.size());
            for (const Value& v : col.cells()) {
                if (v.is_null()) {
                    throw SchemeError("column '" + codes_column +
                                      "' has a missing code");
                }
                codes.push_back(v.as_text());
            }
            write_output(csh_from_digits(codes, levels), common, streams);
            return 0;
        }
        // smoke-test
        if (test_args.spec.empty() && test_args.file.empty()) {
            throw CLI::RequiredError("--test or --test-file");
        }
        Table data = read_input(common, streams, read_options(common));
        TestPredicate predicate = build_test(test_args);
        SmokeReport report = smoke_test(data, predicate);
        if (report.has_issues()) {
            streams.out << render_issues(report);
            streams.err << "smoke test found " << report.issue_count() << " issue(s)\n";
            return 3;
        }
        streams.out << "no issues found\n";
        return 0;
    } catch (const CLI::RequiredError& e) {
        streams.err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        streams.err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        streams.err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        streams.err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace rollup::cli
