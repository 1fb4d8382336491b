#include "rollup/engine.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "rollup/error.hpp"

namespace rollup {

namespace {

std::vector<std::string> label_columns(const CollapseScheme& scheme,
                                       const std::optional<std::string>& key_column) {
    if (key_column) {
        if (scheme.target_vars().size() != 1) {
            throw SchemaError("a key column override needs a single-variable scheme");
        }
        return {*key_column};
    }
    return scheme.target_vars();
}

void check_output_names(const std::vector<std::string>& value_names,
                        const std::vector<std::string>& target_vars) {
    for (const std::string& name : value_names) {
        if (name == "level") {
            throw SchemaError("output name 'level' collides with the collapse-level column");
        }
        if (std::find(target_vars.begin(), target_vars.end(), name) != target_vars.end()) {
            throw SchemaError("output name '" + name + "' collides with a grouping variable");
        }
    }
}

}  // namespace

GroupIndex build_index(const Table& table, const CollapseScheme& scheme,
                       const std::optional<std::string>& key_column) {
    std::vector<std::size_t> cols;
    for (const std::string& name : label_columns(scheme, key_column)) {
        cols.push_back(table.column_index(name));
    }

    GroupIndex index;
    index.rows_by_label.resize(scheme.labels().size());
    for (std::size_t row = 0; row < table.row_count(); ++row) {
        TargetLabel label;
        label.keys.reserve(cols.size());
        for (std::size_t c : cols) label.keys.push_back(canonical_key(table.cell(row, c)));
        if (auto idx = scheme.label_index(label.internal())) {
            index.rows_by_label[*idx].push_back(row);
        } else {
            ++index.unmatched_rows;
        }
    }

    index.fibers.resize(scheme.depth());
    for (std::size_t level = 1; level <= scheme.depth(); ++level) {
        auto& fiber = index.fibers[level - 1];
        for (std::size_t i = 0; i < scheme.labels().size(); ++i) {
            fiber[scheme.level_key(i, level)].push_back(i);
        }
    }
    return index;
}

namespace {

struct Runner {
    const Table& table;
    const CollapseScheme& scheme;
    const TestPredicate* predicate;  // null: plain split-apply-combine
    const AggregationPlan& plan;
    const RunOptions& options;
    const GroupIndex& index;
    const std::vector<std::string>& grouping_vars;
    const std::vector<std::string>& value_names;

    ResultRow run_label(std::size_t lbl, std::size_t& predicate_calls) const {
        const TargetLabel& label = scheme.labels()[lbl];
        std::vector<std::size_t> current = index.rows_by_label[lbl];
        std::size_t level = 0;

        bool ok = true;
        if (predicate) {
            auto evaluate = [&](const std::vector<std::size_t>& rows) {
                TestOutcome outcome = (*predicate)(subset(table, rows));
                ++predicate_calls;
                if (outcome.kind == OutcomeKind::Indeterminate ||
                    outcome.kind == OutcomeKind::Error) {
                    std::string what =
                        std::string(outcome.kind == OutcomeKind::Error
                                        ? "test function failed"
                                        : "test function did not return a definite result") +
                        " for group '" + label.display() + "' at collapse level " +
                        std::to_string(level) +
                        (outcome.detail.empty() ? "" : ": " + outcome.detail) +
                        "; run the smoke test against this test function";
                    throw PredicateError(what, label.display(), level);
                }
                return outcome.passed();
            };

            ok = evaluate(current);
            while (!ok && level < scheme.depth()) {
                ++level;
                const auto& fiber =
                    index.fibers[level - 1].at(scheme.level_key(lbl, level));
                current.clear();
                for (std::size_t member : fiber) {
                    const auto& rows = index.rows_by_label[member];
                    current.insert(current.end(), rows.begin(), rows.end());
                }
                std::sort(current.begin(), current.end());
                ok = evaluate(current);
            }
        }

        ResultRow row;
        row.label = label;
        if (ok) {
            row.level = level;
            row.values = eval_agg(plan, subset(table, current), grouping_vars,
                                  derive_group_seed(options.seed, label.internal()));
        } else {
            row.values.reserve(value_names.size());
            for (const std::string& name : value_names) row.values.push_back({name, Value{}});
        }
        return row;
    }
};

ResultTable run(const Table& table, const CollapseScheme& scheme,
                const TestPredicate* predicate, const AggregationPlan& plan,
                const RunOptions& options, RunStats* stats) {
    GroupIndex index = build_index(table, scheme, options.key_column);

    // Grouping columns never appear among the aggregates: the scheme's own
    // variables plus the data key column when it overrides the scheme name.
    std::vector<std::string> grouping_vars = scheme.used_vars();
    if (options.key_column &&
        std::find(grouping_vars.begin(), grouping_vars.end(), *options.key_column) ==
            grouping_vars.end()) {
        grouping_vars.push_back(*options.key_column);
    }

    ResultTable result;
    result.target_vars = options.key_column ? std::vector<std::string>{*options.key_column}
                                            : scheme.target_vars();
    result.value_names = agg_output_names(plan, table, grouping_vars);
    check_output_names(result.value_names, result.target_vars);
    result.rows.resize(scheme.labels().size());

    Runner runner{table,   scheme,        predicate,         plan,
                  options, index,         grouping_vars,     result.value_names};

    const std::size_t n_labels = scheme.labels().size();
    unsigned threads = options.threads != 0 ? options.threads
                                            : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(
        std::min<std::size_t>(threads, std::max<std::size_t>(n_labels, 1)));

    std::size_t total_calls = 0;
    if (threads <= 1) {
        for (std::size_t i = 0; i < n_labels; ++i) {
            result.rows[i] = runner.run_label(i, total_calls);
        }
    } else {
        // Labels are independent; shared state is read-only. Workers claim
        // labels from a shared counter and record the first failure by the
        // lowest label index so reruns diagnose identically.
        std::atomic<std::size_t> next{0};
        std::atomic<bool> stop{false};
        std::vector<std::size_t> worker_calls(threads, 0);
        std::vector<std::pair<std::size_t, std::exception_ptr>> worker_errors(
            threads, {n_labels, nullptr});
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                while (!stop.load(std::memory_order_relaxed)) {
                    std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
                    if (i >= n_labels) break;
                    try {
                        result.rows[i] = runner.run_label(i, worker_calls[w]);
                    } catch (...) {
                        if (i < worker_errors[w].first) {
                            worker_errors[w] = {i, std::current_exception()};
                        }
                        stop.store(true, std::memory_order_relaxed);
                    }
                }
            });
        }
        for (std::thread& t : pool) t.join();
        std::pair<std::size_t, std::exception_ptr> first{n_labels, nullptr};
        for (const auto& e : worker_errors) {
            if (e.second && e.first < first.first) first = e;
        }
        if (first.second) std::rethrow_exception(first.second);
        for (std::size_t calls : worker_calls) total_calls += calls;
    }

    if (stats) {
        stats->predicate_calls = total_calls;
        stats->unmatched_rows = index.unmatched_rows;
    }
    return result;
}

}  // namespace

ResultTable saccg(const Table& table, const CollapseScheme& scheme,
                  const TestPredicate& predicate, const AggregationPlan& plan,
                  const RunOptions& options, RunStats* stats) {
    return run(table, scheme, &predicate, plan, options, stats);
}

ResultTable sac(const Table& table, const CollapseScheme& scheme, const AggregationPlan& plan,
                const RunOptions& options, RunStats* stats) {
    return run(table, scheme, nullptr, plan, options, stats);
}

Table ResultTable::to_table() const {
    std::vector<Column> columns;
    for (std::size_t v = 0; v < target_vars.size(); ++v) {
        // A label column whose every key is a canonical number (no leading
        // zeros to protect) is emitted numerically and serializes unquoted.
        bool numeric = true;
        std::vector<double> parsed(rows.size());
        for (std::size_t r = 0; r < rows.size() && numeric; ++r) {
            if (auto n = lossless_number(rows[r].label.keys[v])) {
                parsed[r] = *n;
            } else {
                numeric = false;
            }
        }
        std::vector<Value> cells;
        cells.reserve(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            cells.push_back(numeric ? Value::number(parsed[r])
                                    : Value::text(rows[r].label.keys[v]));
        }
        columns.emplace_back(target_vars[v],
                             numeric ? ColumnKind::Numeric : ColumnKind::Textual,
                             std::move(cells));
    }
    {
        std::vector<Value> cells;
        cells.reserve(rows.size());
        for (const ResultRow& row : rows) {
            cells.push_back(row.level ? Value::number(static_cast<double>(*row.level))
                                      : Value{});
        }
        columns.emplace_back("level", ColumnKind::Numeric, std::move(cells));
    }
    for (std::size_t v = 0; v < value_names.size(); ++v) {
        std::vector<Value> cells;
        bool textual = false;
        cells.reserve(rows.size());
        for (const ResultRow& row : rows) {
            const Value& val = row.values[v].value;
            textual = textual || val.is_text();
            cells.push_back(val);
        }
        columns.emplace_back(value_names[v],
                             textual ? ColumnKind::Textual : ColumnKind::Numeric,
                             std::move(cells));
    }
    return Table(std::move(columns));
}

}  // namespace rollup
