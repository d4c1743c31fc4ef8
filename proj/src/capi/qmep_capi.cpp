#include "qmep/qmep.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <string>

#include "qmep/config.hpp"
#include "qmep/decoherence.hpp"
#include "qmep/error.hpp"
#include "qmep/experiments.hpp"
#include "qmep/table.hpp"

struct qmep_config {
    qmep::ExperimentConfig value;
};

struct qmep_table {
    qmep::ResultTable value;
};

namespace {

thread_local std::string g_last_error;

qmep_status fail(qmep_status status, std::string message) {
    g_last_error = std::move(message);
    return status;
}

template <class F>
qmep_status guarded(F&& f) {
    g_last_error.clear();
    try {
        f();
        return QMEP_OK;
    } catch (const qmep::ConfigError& e) {
        return fail(QMEP_ERR_CONFIG, e.what());
    } catch (const qmep::IoError& e) {
        return fail(QMEP_ERR_IO, e.what());
    } catch (const qmep::InvariantError& e) {
        return fail(QMEP_ERR_INVARIANT, e.what());
    } catch (const qmep::DimensionError& e) {
        return fail(QMEP_ERR_DIMENSION, e.what());
    } catch (const std::bad_alloc&) {
        return fail(QMEP_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(QMEP_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(QMEP_ERR_INTERNAL, "unknown error");
    }
}

std::optional<qmep::TableFormat> to_format(qmep_format f) {
    if (f == QMEP_FORMAT_CSV) return qmep::TableFormat::Csv;
    if (f == QMEP_FORMAT_JSON) return qmep::TableFormat::Json;
    return std::nullopt;
}

}  // namespace

extern "C" {

const char* qmep_version(void) {
    static const std::string v = qmep::tool_version();
    return v.c_str();
}

long long qmep_dimension_budget(void) { return static_cast<long long>(qmep::kDimensionBudget); }

const char* qmep_last_error(void) { return g_last_error.c_str(); }

qmep_status qmep_config_load(const char* path, qmep_config** out) {
    if (!path || !out) return fail(QMEP_ERR_ARGUMENT, "qmep_config_load: null argument");
    *out = nullptr;
    return guarded([&] { *out = new qmep_config{qmep::load_config(path)}; });
}

qmep_status qmep_config_load_string(const char* text, size_t length, qmep_config** out) {
    if (!text || !out) return fail(QMEP_ERR_ARGUMENT, "qmep_config_load_string: null argument");
    *out = nullptr;
    return guarded([&] { *out = new qmep_config{qmep::parse_config(std::string_view(text, length))}; });
}

void qmep_config_free(qmep_config* config) { delete config; }

qmep_status qmep_config_output(const qmep_config* config, const char** path, qmep_format* format) {
    if (!config || !path || !format) return fail(QMEP_ERR_ARGUMENT, "qmep_config_output: null argument");
    g_last_error.clear();
    const auto& out = config->value.output;
    *path = out && !out->path.empty() ? out->path.c_str() : nullptr;
    *format = out && out->format == qmep::TableFormat::Json ? QMEP_FORMAT_JSON : QMEP_FORMAT_CSV;
    return QMEP_OK;
}

qmep_status qmep_run(const qmep_config* config, unsigned threads, qmep_table** out) {
    if (!config || !out) return fail(QMEP_ERR_ARGUMENT, "qmep_run: null argument");
    *out = nullptr;
    return guarded([&] { *out = new qmep_table{qmep::run(config->value, qmep::RunOptions{threads})}; });
}

void qmep_table_free(qmep_table* table) { delete table; }

qmep_status qmep_table_row_count(const qmep_table* table, size_t* rows) {
    if (!table || !rows) return fail(QMEP_ERR_ARGUMENT, "qmep_table_row_count: null argument");
    *rows = table->value.row_count();
    return QMEP_OK;
}

qmep_status qmep_table_column_count(const qmep_table* table, size_t* columns) {
    if (!table || !columns) return fail(QMEP_ERR_ARGUMENT, "qmep_table_column_count: null argument");
    *columns = table->value.columns().size();
    return QMEP_OK;
}

qmep_status qmep_table_emit(const qmep_table* table, qmep_format format, char** out, size_t* length) {
    if (!table || !out || !length) return fail(QMEP_ERR_ARGUMENT, "qmep_table_emit: null argument");
    const auto fmt = to_format(format);
    if (!fmt) return fail(QMEP_ERR_ARGUMENT, "qmep_table_emit: unknown format");
    *out = nullptr;
    *length = 0;
    return guarded([&] {
        const std::string bytes = qmep::emit(table->value, *fmt);
        char* buf = static_cast<char*>(std::malloc(bytes.size() + 1));
        if (!buf) throw std::bad_alloc();
        std::memcpy(buf, bytes.data(), bytes.size());
        buf[bytes.size()] = '\0';
        *out = buf;
        *length = bytes.size();
    });
}

qmep_status qmep_table_write(const qmep_table* table, qmep_format format, const char* path) {
    if (!table || !path) return fail(QMEP_ERR_ARGUMENT, "qmep_table_write: null argument");
    const auto fmt = to_format(format);
    if (!fmt) return fail(QMEP_ERR_ARGUMENT, "qmep_table_write: unknown format");
    return guarded([&] { qmep::write_table(table->value, *fmt, path); });
}

void qmep_string_free(char* s) { std::free(s); }

}  // extern "C"
