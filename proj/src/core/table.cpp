#include "qmep/table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

#include "qmep/error.hpp"

namespace qmep {

using ordered_json = nlohmann::ordered_json;

ResultTable::ResultTable(std::vector<Column> columns) : columns_(std::move(columns)) {
    std::set<std::string> names;
    for (const Column& c : columns_) {
        if (c.name.empty()) throw ConfigError("ResultTable: empty column name");
        if (!names.insert(c.name).second) throw ConfigError("ResultTable: duplicated column '" + c.name + "'");
    }
}

void ResultTable::add_row(std::vector<Cell> row) {
    if (row.size() != columns_.size()) {
        throw InvariantError("ResultTable: row has " + std::to_string(row.size()) + " cells, expected " +
                             std::to_string(columns_.size()));
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (row[i].index() != static_cast<std::size_t>(columns_[i].type)) {
            throw InvariantError("ResultTable: cell type mismatch in column '" + columns_[i].name + "'");
        }
    }
    rows_.push_back(std::move(row));
}

void ResultTable::set_metadata(std::string key, std::string value) {
    if (key.find_first_of(":\r\n") != std::string::npos || value.find_first_of("\r\n") != std::string::npos) {
        throw ConfigError("ResultTable: metadata must be single-line and keys may not contain ':'");
    }
    for (auto& [k, v] : metadata_) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    metadata_.emplace_back(std::move(key), std::move(value));
}

const std::string* ResultTable::find_metadata(std::string_view key) const {
    for (const auto& [k, v] : metadata_) {
        if (k == key) return &v;
    }
    return nullptr;
}

std::string_view to_string(ColumnType t) {
    switch (t) {
        case ColumnType::Integer: return "integer";
        case ColumnType::Real: return "real";
        case ColumnType::Complex: return "complex";
    }
    return "?";
}

namespace {

ColumnType column_type(std::string_view s) {
    if (s == "integer") return ColumnType::Integer;
    if (s == "real") return ColumnType::Real;
    if (s == "complex") return ColumnType::Complex;
    throw ConfigError("table: unknown column type '" + std::string(s) + "'");
}

std::vector<std::string> flat_names(const std::vector<Column>& columns) {
    std::vector<std::string> out;
    for (const Column& c : columns) {
        if (c.type == ColumnType::Complex) {
            out.push_back(c.name + "_re");
            out.push_back(c.name + "_im");
        } else {
            out.push_back(c.name);
        }
    }
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

double parse_real(std::string_view s) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError("table: '" + std::string(s) + "' is not a real number");
    }
    return x;
}

std::int64_t parse_integer(std::string_view s) {
    std::int64_t x = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError("table: '" + std::string(s) + "' is not an integer");
    }
    return x;
}

// RFC 4180 records; accepts CRLF or LF line ends.
std::vector<std::vector<std::string>> csv_records(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            record.push_back(std::move(field));
            field.clear();
            records.push_back(std::move(record));
            record.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted) throw ConfigError("table: unterminated quoted field");
    if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    return records;
}

std::string emit_csv(const ResultTable& table) {
    std::string out;
    for (const auto& [k, v] : table.metadata()) out += "# " + k + ": " + v + "\r\n";
    out += "# columns: ";
    for (std::size_t i = 0; i < table.columns().size(); ++i) {
        if (i) out += ',';
        out += table.columns()[i].name + ":" + std::string(to_string(table.columns()[i].type));
    }
    out += "\r\n";

    const auto names = flat_names(table.columns());
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += ',';
        out += csv_field(names[i]);
    }
    out += "\r\n";
    for (const auto& row : table.rows()) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            if (const auto* n = std::get_if<std::int64_t>(&row[i])) {
                out += std::to_string(*n);
            } else if (const auto* x = std::get_if<double>(&row[i])) {
                out += format_real(*x);
            } else {
                const Complex z = std::get<Complex>(row[i]);
                out += format_real(z.real()) + "," + format_real(z.imag());
            }
        }
        out += "\r\n";
    }
    return out;
}

ResultTable parse_csv(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<Column> columns;
    bool have_columns = false;
    while (!text.empty() && text.front() == '#') {
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        const auto colon = line.find(": ");
        if (line.substr(0, 2) != "# " || colon == std::string_view::npos) {
            throw ConfigError("table: malformed metadata line '" + std::string(line) + "'");
        }
        const std::string key(line.substr(2, colon - 2));
        const std::string value(line.substr(colon + 2));
        if (key != "columns") {
            meta.emplace_back(key, value);
            continue;
        }
        have_columns = true;
        std::string_view rest = value;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const std::string_view item = rest.substr(0, comma);
            const auto sep = item.rfind(':');
            if (sep == std::string_view::npos) throw ConfigError("table: malformed column spec");
            columns.push_back({std::string(item.substr(0, sep)), column_type(item.substr(sep + 1))});
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        }
    }
    if (!have_columns) throw ConfigError("table: missing '# columns:' line");

    ResultTable table(std::move(columns));
    for (auto& [k, v] : meta) table.set_metadata(k, v);

    const auto records = csv_records(text);
    const auto names = flat_names(table.columns());
    if (records.empty() || records.front() != names) throw ConfigError("table: header does not match column types");
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() != names.size()) {
            throw ConfigError("table: record " + std::to_string(r) + " has " + std::to_string(rec.size()) +
                              " fields, expected " + std::to_string(names.size()));
        }
        std::vector<Cell> row;
        std::size_t f = 0;
        for (const Column& c : table.columns()) {
            switch (c.type) {
                case ColumnType::Integer: row.emplace_back(parse_integer(rec[f++])); break;
                case ColumnType::Real: row.emplace_back(parse_real(rec[f++])); break;
                case ColumnType::Complex: {
                    const double re = parse_real(rec[f++]);
                    row.emplace_back(Complex(re, parse_real(rec[f++])));
                    break;
                }
            }
        }
        table.add_row(std::move(row));
    }
    return table;
}

ordered_json json_real(double x) {
    if (std::isfinite(x)) return x;
    return format_real(x);  // "nan", "inf", "-inf"
}

double json_to_real(const ordered_json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_real(v.get<std::string>());
    throw ConfigError("table: expected a real number in JSON row");
}

std::string emit_json(const ResultTable& table) {
    ordered_json doc;
    doc["metadata"] = ordered_json::object();
    for (const auto& [k, v] : table.metadata()) doc["metadata"][k] = v;
    doc["columns"] = ordered_json::array();
    for (const Column& c : table.columns()) {
        doc["columns"].push_back({{"name", c.name}, {"type", std::string(to_string(c.type))}});
    }
    doc["rows"] = ordered_json::array();
    for (const auto& row : table.rows()) {
        ordered_json obj = ordered_json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            const std::string& name = table.columns()[i].name;
            if (const auto* n = std::get_if<std::int64_t>(&row[i])) {
                obj[name] = *n;
            } else if (const auto* x = std::get_if<double>(&row[i])) {
                obj[name] = json_real(*x);
            } else {
                const Complex z = std::get<Complex>(row[i]);
                obj[name + "_re"] = json_real(z.real());
                obj[name + "_im"] = json_real(z.imag());
            }
        }
        doc["rows"].push_back(std::move(obj));
    }
    return doc.dump(2) + "\n";
}

ResultTable parse_json(std::string_view text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
        std::vector<Column> columns;
        for (const auto& c : doc.at("columns")) {
            columns.push_back({c.at("name").get<std::string>(), column_type(c.at("type").get<std::string>())});
        }
        ResultTable table(std::move(columns));
        for (const auto& [k, v] : doc.at("metadata").items()) table.set_metadata(k, v.get<std::string>());
        for (const auto& obj : doc.at("rows")) {
            std::vector<Cell> row;
            for (const Column& c : table.columns()) {
                switch (c.type) {
                    case ColumnType::Integer: row.emplace_back(obj.at(c.name).get<std::int64_t>()); break;
                    case ColumnType::Real: row.emplace_back(json_to_real(obj.at(c.name))); break;
                    case ColumnType::Complex:
                        row.emplace_back(Complex(json_to_real(obj.at(c.name + "_re")), json_to_real(obj.at(c.name + "_im"))));
                        break;
                }
            }
            table.add_row(std::move(row));
        }
        return table;
    } catch (const ordered_json::exception& e) {
        throw ConfigError(std::string("table: ") + e.what());
    }
}

}  // namespace

std::string format_real(double x) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

std::string emit(const ResultTable& table, TableFormat format) {
    return format == TableFormat::Csv ? emit_csv(table) : emit_json(table);
}

ResultTable parse_table(std::string_view text, TableFormat format) {
    return format == TableFormat::Csv ? parse_csv(text) : parse_json(text);
}

void write_table(const ResultTable& table, TableFormat format, const std::string& path) {
    const std::string bytes = emit(table, format);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace qmep
