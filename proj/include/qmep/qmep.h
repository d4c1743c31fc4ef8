/* C interface to the qmep experiment library.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every call returns a qmep_status; on failure qmep_last_error() describes
 * the problem until the next call on the same thread.
 */
#ifndef QMEP_H
#define QMEP_H

#include <stddef.h>

#if defined(_WIN32)
#if defined(QMEP_BUILDING_LIBRARY)
#define QMEP_API __declspec(dllexport)
#else
#define QMEP_API __declspec(dllimport)
#endif
#else
#define QMEP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qmep_status {
    QMEP_OK = 0,
    QMEP_ERR_CONFIG = 1,    /* malformed or inconsistent configuration */
    QMEP_ERR_IO = 2,        /* file could not be read or written */
    QMEP_ERR_INVARIANT = 3, /* numerical invariant violated during a run */
    QMEP_ERR_DIMENSION = 4, /* incompatible shapes or dimension budget exceeded */
    QMEP_ERR_ARGUMENT = 5,  /* null handle or bad enum value */
    QMEP_ERR_INTERNAL = 6
} qmep_status;

typedef enum qmep_format { QMEP_FORMAT_CSV = 0, QMEP_FORMAT_JSON = 1 } qmep_format;

typedef struct qmep_config qmep_config;
typedef struct qmep_table qmep_table;

QMEP_API const char* qmep_version(void);
QMEP_API long long qmep_dimension_budget(void);
/* Message for the last failed call on this thread; "" when none. */
QMEP_API const char* qmep_last_error(void);

QMEP_API qmep_status qmep_config_load(const char* path, qmep_config** out);
QMEP_API qmep_status qmep_config_load_string(const char* text, size_t length, qmep_config** out);
QMEP_API void qmep_config_free(qmep_config* config);
/* Output path and format named in the config, if any. *path is NULL when the
 * config has no output path; it stays valid while the config is alive. */
QMEP_API qmep_status qmep_config_output(const qmep_config* config, const char** path, qmep_format* format);

/* threads = 0 uses every core; the table does not depend on it. */
QMEP_API qmep_status qmep_run(const qmep_config* config, unsigned threads, qmep_table** out);
QMEP_API void qmep_table_free(qmep_table* table);

QMEP_API qmep_status qmep_table_row_count(const qmep_table* table, size_t* rows);
QMEP_API qmep_status qmep_table_column_count(const qmep_table* table, size_t* columns);

/* Serialized table in a buffer released with qmep_string_free. */
QMEP_API qmep_status qmep_table_emit(const qmep_table* table, qmep_format format, char** out, size_t* length);
QMEP_API qmep_status qmep_table_write(const qmep_table* table, qmep_format format, const char* path);
QMEP_API void qmep_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* QMEP_H */
