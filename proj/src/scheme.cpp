#include "rollup/scheme.hpp"

#include <algorithm>
#include <set>

#include "rollup/error.hpp"

namespace rollup {

namespace {

constexpr char kInternalSep = '\x1f';

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

// "A" stays "A"; a multi-variable target becomes "A.B" so the rendered
// table keeps a valid column identifier.
std::string join_identifier(const std::vector<std::string>& vars) {
    return join(vars, '.');
}

}  // namespace

std::string TargetLabel::internal() const { return join(keys, kInternalSep); }
std::string TargetLabel::display() const { return join(keys, '-'); }

std::optional<std::size_t> CollapseScheme::label_index(std::string_view internal_key) const {
    auto it = index_.find(std::string(internal_key));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void CollapseScheme::finalize() {
    index_.reserve(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (!index_.emplace(labels_[i].internal(), i).second) {
            throw SchemeError("duplicate target label '" + labels_[i].display() + "'");
        }
    }
    // Each coarsening must be a function of the previous level, otherwise
    // group subsets would not grow monotonically with the collapse level.
    for (std::size_t level = 1; level < depth(); ++level) {
        std::unordered_map<std::string, std::pair<std::string, std::size_t>> parent;
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            const std::string& from = level_keys_[i][level - 1];
            const std::string& to = level_keys_[i][level];
            auto [it, inserted] = parent.emplace(from, std::make_pair(to, i));
            if (!inserted && it->second.first != to) {
                throw SchemeError(
                    "collapsing level " + std::to_string(level + 1) +
                    " is not a coarsening of level " + std::to_string(level) +
                    ": labels '" + labels_[it->second.second].display() + "' and '" +
                    labels_[i].display() + "' share a level-" + std::to_string(level) +
                    " group but diverge afterwards");
            }
        }
    }
}

CollapseScheme scheme_from_formula(const Table& table, const dsl::CollapseFormula& formula) {
    std::vector<std::size_t> target_cols;
    for (const std::string& var : formula.target) {
        target_cols.push_back(table.column_index(var));
    }
    std::vector<std::vector<std::size_t>> alt_cols;
    for (const auto& alt : formula.alternatives) {
        std::vector<std::size_t> cols;
        for (const std::string& var : alt) cols.push_back(table.column_index(var));
        alt_cols.push_back(std::move(cols));
    }

    CollapseScheme scheme;
    scheme.target_vars_ = formula.target;
    for (const auto& alt : formula.alternatives) {
        scheme.level_names_.push_back(join(alt, '.'));
    }
    std::set<std::string> used(formula.target.begin(), formula.target.end());
    for (const auto& alt : formula.alternatives) used.insert(alt.begin(), alt.end());
    scheme.used_vars_.assign(used.begin(), used.end());

    std::unordered_map<std::string, std::size_t> seen;
    std::vector<std::size_t> first_row;  // per label
    for (std::size_t row = 0; row < table.row_count(); ++row) {
        TargetLabel label;
        for (std::size_t c : target_cols) {
            label.keys.push_back(canonical_key(table.cell(row, c)));
        }
        std::vector<std::string> keys;
        keys.reserve(alt_cols.size());
        for (const auto& cols : alt_cols) {
            std::vector<std::string> parts;
            parts.reserve(cols.size());
            for (std::size_t c : cols) parts.push_back(canonical_key(table.cell(row, c)));
            keys.push_back(join(parts, kInternalSep));
        }
        auto [it, inserted] = seen.emplace(label.internal(), scheme.labels_.size());
        if (inserted) {
            scheme.labels_.push_back(std::move(label));
            scheme.level_keys_.push_back(std::move(keys));
            first_row.push_back(row);
            continue;
        }
        // The coarse keys are read off the first row bearing the label; any
        // later row must agree, otherwise the coarsening is not a function
        // of the label. Name the first variable that differs.
        const std::vector<std::string>& expected = scheme.level_keys_[it->second];
        for (std::size_t a = 0; a < keys.size(); ++a) {
            if (keys[a] == expected[a]) continue;
            std::size_t base_row = first_row[it->second];
            for (std::size_t v = 0; v < alt_cols[a].size(); ++v) {
                std::string got = canonical_key(table.cell(row, alt_cols[a][v]));
                std::string want = canonical_key(table.cell(base_row, alt_cols[a][v]));
                if (got != want) {
                    throw SchemeError("rows of target group '" + label.display() +
                                      "' disagree on collapsing variable '" +
                                      formula.alternatives[a][v] + "' ('" + want +
                                      "' vs '" + got + "')");
                }
            }
        }
    }
    scheme.finalize();
    return scheme;
}

CollapseScheme scheme_from_table(const Table& scheme_table) {
    if (scheme_table.column_count() < 2) {
        throw SchemeError("a scheme table needs at least two columns");
    }
    const std::size_t width = scheme_table.column_count();

    std::vector<std::vector<std::string>> rows;
    std::set<std::vector<std::string>> seen;
    for (std::size_t r = 0; r < scheme_table.row_count(); ++r) {
        std::vector<std::string> row;
        row.reserve(width);
        for (std::size_t c = 0; c < width; ++c) {
            const Value& v = scheme_table.cell(r, c);
            if (v.is_null()) {
                throw SchemeError("scheme table has a missing value (row " +
                                  std::to_string(r + 1) + ", column '" +
                                  scheme_table.column(c).name() + "')");
            }
            row.push_back(canonical_key(v));
        }
        if (seen.insert(row).second) rows.push_back(std::move(row));
    }

    for (std::size_t c = 0; c + 1 < width; ++c) {
        std::unordered_map<std::string, std::string> parent;
        for (const auto& row : rows) {
            auto [it, inserted] = parent.emplace(row[c], row[c + 1]);
            if (!inserted && it->second != row[c + 1]) {
                throw SchemeError("'" + row[c] + "' maps to both '" + it->second +
                                  "' and '" + row[c + 1] + "' (columns '" +
                                  scheme_table.column(c).name() + "' -> '" +
                                  scheme_table.column(c + 1).name() + "')");
            }
        }
    }

    CollapseScheme scheme;
    scheme.target_vars_ = {scheme_table.column(0).name()};
    for (std::size_t c = 1; c < width; ++c) {
        scheme.level_names_.push_back(scheme_table.column(c).name());
    }
    scheme.used_vars_ = scheme.target_vars_;
    for (const auto& row : rows) {
        scheme.labels_.push_back(TargetLabel{{row[0]}});
        scheme.level_keys_.emplace_back(row.begin() + 1, row.end());
    }
    scheme.finalize();
    return scheme;
}

Table csh_from_digits(const std::vector<std::string>& codes, std::size_t levels) {
    if (codes.empty()) throw SchemeError("no classification codes given");
    if (levels < 1) throw SchemeError("levels must be at least 1");
    std::size_t max_len = 0;
    for (const std::string& code : codes) {
        if (code.empty()) throw SchemeError("classification codes must be non-empty");
        max_len = std::max(max_len, code.size());
    }

    std::vector<Column> columns;
    columns.reserve(levels + 1);
    std::vector<Value> base;
    base.reserve(codes.size());
    for (const std::string& code : codes) base.push_back(Value::text(code));
    columns.emplace_back("A0", ColumnKind::Textual, std::move(base));

    for (std::size_t i = 1; i <= levels; ++i) {
        // Never truncate below one character; a code shorter than the cut
        // is a leaf copied through to the next level.
        std::size_t cut = max_len > i ? max_len - i : 1;
        std::vector<Value> cells;
        cells.reserve(codes.size());
        for (const std::string& code : codes) {
            cells.push_back(Value::text(code.size() > cut ? code.substr(0, cut) : code));
        }
        columns.emplace_back("A" + std::to_string(i), ColumnKind::Textual, std::move(cells));
    }

    Table result(std::move(columns));
    scheme_from_table(result);  // child-parent validation
    return result;
}

Table scheme_to_table(const CollapseScheme& scheme) {
    std::vector<Column> columns;
    std::vector<Value> target_cells;
    target_cells.reserve(scheme.labels().size());
    for (const TargetLabel& label : scheme.labels()) {
        target_cells.push_back(Value::text(label.display()));
    }
    columns.emplace_back(join_identifier(scheme.target_vars()), ColumnKind::Textual,
                         std::move(target_cells));
    for (std::size_t level = 1; level <= scheme.depth(); ++level) {
        std::vector<Value> cells;
        cells.reserve(scheme.labels().size());
        for (std::size_t i = 0; i < scheme.labels().size(); ++i) {
            std::string key = scheme.level_key(i, level);
            std::replace(key.begin(), key.end(), kInternalSep, '-');
            cells.push_back(Value::text(std::move(key)));
        }
        columns.emplace_back(scheme.level_names()[level - 1], ColumnKind::Textual,
                             std::move(cells));
    }
    return Table(std::move(columns));
}

}  // namespace rollup
