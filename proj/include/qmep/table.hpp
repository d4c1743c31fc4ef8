#pragma once

// Typed result tables and their CSV / JSON encodings.
//
// CSV: metadata lines "# key: value" (the last one, "# columns:", carries the
// column types), then the header row and one record per row. Records end in
// CRLF and fields are quoted per RFC 4180 when needed. Complex columns expand
// to "<name>_re" and "<name>_im". Reals use the shortest decimal that reads
// back to the same double.
//
// JSON: {"metadata": {...}, "columns": [{"name", "type"}], "rows": [{...}]}.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "qmep/config.hpp"
#include "qmep/linalg.hpp"

namespace qmep {

enum class ColumnType { Integer, Real, Complex };

struct Column {
    std::string name;
    ColumnType type;
};

using Cell = std::variant<std::int64_t, double, Complex>;

class ResultTable {
public:
    /// Throws ConfigError on an empty or duplicated column name.
    explicit ResultTable(std::vector<Column> columns);

    const std::vector<Column>& columns() const { return columns_; }
    const std::vector<std::vector<Cell>>& rows() const { return rows_; }
    std::size_t row_count() const { return rows_.size(); }

    /// Throws InvariantError when the row is short, long or mistyped.
    void add_row(std::vector<Cell> row);

    /// Ordered key/value pairs; set() replaces an existing key in place.
    const std::vector<std::pair<std::string, std::string>>& metadata() const { return metadata_; }
    void set_metadata(std::string key, std::string value);
    const std::string* find_metadata(std::string_view key) const;

private:
    std::vector<Column> columns_;
    std::vector<std::vector<Cell>> rows_;
    std::vector<std::pair<std::string, std::string>> metadata_;
};

std::string_view to_string(ColumnType t);

/// Shortest round-trip decimal.
std::string format_real(double x);

std::string emit(const ResultTable& table, TableFormat format);

/// Inverse of emit. Throws ConfigError on malformed input.
ResultTable parse_table(std::string_view text, TableFormat format);

/// Throws IoError when the file cannot be written.
void write_table(const ResultTable& table, TableFormat format, const std::string& path);

}  // namespace qmep
