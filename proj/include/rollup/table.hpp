#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rollup/value.hpp"

namespace rollup {

/// A named, typed column. All non-Null cells match the declared kind.
class Column {
public:
    Column(std::string name, ColumnKind kind, std::vector<Value> cells);

    const std::string& name() const { return name_; }
    ColumnKind kind() const { return kind_; }
    const std::vector<Value>& cells() const { return cells_; }
    std::size_t size() const { return cells_.size(); }
    const Value& cell(std::size_t row) const { return cells_[row]; }

private:
    std::string name_;
    ColumnKind kind_;
    std::vector<Value> cells_;
};

/// Immutable record set: equal-length columns with unique identifier names.
/// Columns are shared between derived tables, so copies are cheap.
class Table {
public:
    Table() = default;
    explicit Table(std::vector<Column> columns);

    std::size_t row_count() const { return row_count_; }
    std::size_t column_count() const { return columns_.size(); }

    bool has_column(std::string_view name) const;
    std::size_t column_index(std::string_view name) const;  // SchemaError if absent
    const Column& column(std::size_t index) const { return *columns_[index]; }
    const Column& column(std::string_view name) const;

    const Value& cell(std::size_t row, std::size_t column) const {
        return columns_[column]->cell(row);
    }

    std::vector<std::string> column_names() const;

    static bool is_identifier(std::string_view name);

private:
    std::vector<std::shared_ptr<const Column>> columns_;
    std::unordered_map<std::string, std::size_t> by_name_;
    std::size_t row_count_ = 0;

    friend Table null_out_column(const Table&, std::string_view);
};

/// A read-only view of selected rows of a table. Never copies cell data.
/// Indices are strictly increasing positions into the base table.
class RowSubset {
public:
    RowSubset(const Table& base, std::vector<std::size_t> indices);

    static RowSubset all(const Table& base);

    const Table& base() const { return *base_; }
    std::size_t row_count() const { return indices_.size(); }
    const std::vector<std::size_t>& indices() const { return indices_; }
    std::size_t base_row(std::size_t i) const { return indices_[i]; }

    const Value& cell(std::size_t row, std::size_t column) const {
        return base_->cell(indices_[row], column);
    }

private:
    const Table* base_;
    std::vector<std::size_t> indices_;
};

/// View of the given rows, in base order. BoundsError on a bad index.
RowSubset subset(const Table& table, std::vector<std::size_t> indices);

/// New table identical to `table` except every cell of `name` is Null.
/// Column kind is preserved. SchemaError if the column does not exist.
Table null_out_column(const Table& table, std::string_view name);

}  // namespace rollup
