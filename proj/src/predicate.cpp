#include "rollup/predicate.hpp"

#include <sstream>

#include "rollup/aggregate.hpp"
#include "rollup/error.hpp"

namespace rollup {

namespace {

constexpr const char* kNaDetected = "NA detected in output (must be TRUE or FALSE)";

std::size_t count_complete_rows(const RowSubset& subset,
                                const std::vector<std::string>& vars) {
    std::vector<std::size_t> cols;
    cols.reserve(vars.size());
    for (const std::string& v : vars) cols.push_back(subset.base().column_index(v));
    std::size_t complete = 0;
    for (std::size_t r = 0; r < subset.row_count(); ++r) {
        bool ok = true;
        for (std::size_t c : cols) ok = ok && !subset.cell(r, c).is_null();
        complete += ok;
    }
    return complete;
}

std::string join_vars(const std::vector<std::string>& vars) {
    std::string out;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (i > 0) out += ", ";
        out += vars[i];
    }
    return out;
}

}  // namespace

TestPredicate min_records(std::size_t n) {
    return {"min_records(" + std::to_string(n) + ")",
            [n](const RowSubset& subset) {
                return subset.row_count() >= n ? TestOutcome::pass() : TestOutcome::fail();
            }};
}

TestPredicate min_complete(std::size_t n, std::vector<std::string> vars) {
    std::string description = "min_complete(" + std::to_string(n) + ", " + join_vars(vars) + ")";
    return {std::move(description),
            [n, vars = std::move(vars)](const RowSubset& subset) {
                try {
                    return count_complete_rows(subset, vars) >= n ? TestOutcome::pass()
                                                                  : TestOutcome::fail();
                } catch (const SchemaError& e) {
                    return TestOutcome::error(e.what());
                }
            }};
}

TestPredicate frac_complete(double r, std::vector<std::string> vars) {
    std::string description = "frac_complete(" + canonical_number(r) + ", " + join_vars(vars) + ")";
    return {std::move(description),
            [r, vars = std::move(vars)](const RowSubset& subset) {
                if (subset.row_count() == 0) return TestOutcome::fail();
                try {
                    double frac = static_cast<double>(count_complete_rows(subset, vars)) /
                                  static_cast<double>(subset.row_count());
                    return frac >= r ? TestOutcome::pass() : TestOutcome::fail();
                } catch (const SchemaError& e) {
                    return TestOutcome::error(e.what());
                }
            }};
}

TestPredicate from_rules(std::vector<dsl::ExprPtr> rules) {
    std::string description;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        if (i > 0) description += "; ";
        description += dsl::to_string(*rules[i]);
    }
    return {std::move(description),
            [rules = std::move(rules)](const RowSubset& subset) {
                GroupEvalOptions options;
                options.sum_empty_is_null = false;
                bool saw_null = false;
                for (const dsl::ExprPtr& rule : rules) {
                    Value v;
                    try {
                        v = eval_group_expr(*rule, subset, options);
                    } catch (const SchemaError& e) {
                        return TestOutcome::error(e.what());
                    }
                    if (v.is_null()) {
                        saw_null = true;  // a later rule may still fail decisively
                    } else if (v.as_number() == 0.0) {
                        return TestOutcome::fail();
                    }
                }
                return saw_null ? TestOutcome::indeterminate(kNaDetected)
                                : TestOutcome::pass();
            }};
}

bool SmokeReport::has_issues() const { return issue_count() > 0; }

std::size_t SmokeReport::issue_count() const {
    std::size_t n = 0;
    for (const SmokeEntry& e : entries) n += e.issue;
    return n;
}

SmokeReport smoke_test(const Table& table, const TestPredicate& predicate) {
    SmokeReport report;
    auto run = [&](std::string scenario, const RowSubset& subset) {
        TestOutcome outcome;
        try {
            outcome = predicate(subset);
        } catch (const std::exception& e) {
            outcome = TestOutcome::error(e.what());
        }
        bool issue = outcome.kind == OutcomeKind::Indeterminate ||
                     outcome.kind == OutcomeKind::Error;
        report.entries.push_back({std::move(scenario), std::move(outcome), issue});
    };

    run("full dataset", RowSubset::all(table));
    run("empty dataset", RowSubset(table, {}));
    for (std::size_t c = 0; c < table.column_count(); ++c) {
        const std::string& name = table.column(c).name();
        Table nulled = null_out_column(table, name);
        run("full dataset and " + name + " is NA for all records", RowSubset::all(nulled));
    }
    return report;
}

std::string render_issues(const SmokeReport& report) {
    std::ostringstream out;
    for (const SmokeEntry& e : report.entries) {
        if (!e.issue) continue;
        out << "Test with " << e.scenario << " raised issues.\n\n";
        out << "   " << (e.outcome.detail.empty() ? "test did not return TRUE or FALSE"
                                                  : e.outcome.detail)
            << "\n";
    }
    return out.str();
}

}  // namespace rollup
