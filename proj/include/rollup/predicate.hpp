#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "rollup/dsl.hpp"
#include "rollup/table.hpp"

namespace rollup {

enum class OutcomeKind { Pass, Fail, Indeterminate, Error };

/// Result of a group-quality check. Only Pass counts as success; the engine
/// aborts on Indeterminate or Error.
struct TestOutcome {
    OutcomeKind kind = OutcomeKind::Fail;
    std::string detail;  // Indeterminate reason / Error message

    static TestOutcome pass() { return {OutcomeKind::Pass, {}}; }
    static TestOutcome fail() { return {OutcomeKind::Fail, {}}; }
    static TestOutcome indeterminate(std::string reason) {
        return {OutcomeKind::Indeterminate, std::move(reason)};
    }
    static TestOutcome error(std::string message) {
        return {OutcomeKind::Error, std::move(message)};
    }

    bool passed() const { return kind == OutcomeKind::Pass; }
};

/// A quality predicate over record subsets. Must accept any subset of the
/// input table, including one with zero rows.
struct TestPredicate {
    std::string description;
    std::function<TestOutcome(const RowSubset&)> eval;

    TestOutcome operator()(const RowSubset& subset) const { return eval(subset); }
};

/// Pass iff the subset has at least n rows.
TestPredicate min_records(std::size_t n);

/// Pass iff at least n rows are complete (non-Null) for all of `vars`.
TestPredicate min_complete(std::size_t n, std::vector<std::string> vars);

/// Pass iff the fraction of complete rows is at least r. An empty subset
/// fails: a fraction of nothing cannot support estimation.
TestPredicate frac_complete(double r, std::vector<std::string> vars);

/// Conjunction of parsed rules under three-valued logic. A definitely false
/// rule fails immediately; a Null rule makes the outcome Indeterminate.
TestPredicate from_rules(std::vector<dsl::ExprPtr> rules);

struct SmokeEntry {
    std::string scenario;
    TestOutcome outcome;
    bool issue = false;  // set iff outcome is Indeterminate or Error
};

struct SmokeReport {
    std::vector<SmokeEntry> entries;

    bool has_issues() const;
    std::size_t issue_count() const;
};

/// Checks a predicate against the edge cases it must survive: the full
/// dataset, a zero-row subset, and the full dataset with each column nulled
/// out in turn.
SmokeReport smoke_test(const Table& table, const TestPredicate& predicate);

/// One block per issue, naming the scenario and the reason. Empty when clean.
std::string render_issues(const SmokeReport& report);

}  // namespace rollup
