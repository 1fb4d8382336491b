#include "rollup/table.hpp"

#include <algorithm>

#include "rollup/error.hpp"

namespace rollup {

Column::Column(std::string name, ColumnKind kind, std::vector<Value> cells)
    : name_(std::move(name)), kind_(kind), cells_(std::move(cells)) {
    if (!Table::is_identifier(name_)) {
        throw SchemaError("invalid column name: '" + name_ + "'");
    }
    for (const Value& v : cells_) {
        if (v.is_null()) continue;
        if (kind_ == ColumnKind::Numeric ? !v.is_number() : !v.is_text()) {
            throw SchemaError("column '" + name_ + "': cell does not match declared kind");
        }
    }
}

bool Table::is_identifier(std::string_view name) {
    if (name.empty()) return false;
    auto head = [](char c) {
        return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
    };
    auto tail = [&](char c) { return head(c) || (c >= '0' && c <= '9') || c == '.'; };
    if (!head(name[0])) return false;
    return std::all_of(name.begin() + 1, name.end(), tail);
}

Table::Table(std::vector<Column> columns) {
    columns_.reserve(columns.size());
    for (Column& c : columns) {
        columns_.push_back(std::make_shared<const Column>(std::move(c)));
    }
    if (!columns_.empty()) row_count_ = columns_[0]->size();
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        const auto& col = *columns_[i];
        if (col.size() != row_count_) {
            throw SchemaError("column '" + col.name() + "' has " +
                              std::to_string(col.size()) + " rows, expected " +
                              std::to_string(row_count_));
        }
        if (!by_name_.emplace(col.name(), i).second) {
            throw SchemaError("duplicate column name: '" + col.name() + "'");
        }
    }
}

bool Table::has_column(std::string_view name) const {
    return by_name_.find(std::string(name)) != by_name_.end();
}

std::size_t Table::column_index(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) {
        throw SchemaError("unknown column: '" + std::string(name) + "'");
    }
    return it->second;
}

const Column& Table::column(std::string_view name) const {
    return *columns_[column_index(name)];
}

std::vector<std::string> Table::column_names() const {
    std::vector<std::string> names;
    names.reserve(columns_.size());
    for (const auto& c : columns_) names.push_back(c->name());
    return names;
}

RowSubset::RowSubset(const Table& base, std::vector<std::size_t> indices)
    : base_(&base), indices_(std::move(indices)) {
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        if (indices_[i] >= base.row_count()) {
            throw BoundsError("row index " + std::to_string(indices_[i]) +
                              " out of range (table has " +
                              std::to_string(base.row_count()) + " rows)");
        }
        if (i > 0 && indices_[i] <= indices_[i - 1]) {
            throw BoundsError("subset indices must be strictly increasing");
        }
    }
}

RowSubset RowSubset::all(const Table& base) {
    std::vector<std::size_t> idx(base.row_count());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return RowSubset(base, std::move(idx));
}

RowSubset subset(const Table& table, std::vector<std::size_t> indices) {
    return RowSubset(table, std::move(indices));
}

Table null_out_column(const Table& table, std::string_view name) {
    std::size_t target = table.column_index(name);
    Table out;
    out.columns_ = table.columns_;
    out.by_name_ = table.by_name_;
    out.row_count_ = table.row_count_;
    const Column& old = table.column(target);
    out.columns_[target] = std::make_shared<const Column>(
        old.name(), old.kind(), std::vector<Value>(old.size()));
    return out;
}

}  // namespace rollup
