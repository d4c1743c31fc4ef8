// qmep command-line driver. Talks to the library only through the C API.
//
// Exit codes: 0 success, 1 configuration / IO / usage error,
// 2 numerical invariant violation.

#include <cstdio>
#include <cstring>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qmep/qmep.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumeric = 2;

#ifndef QMEP_BUILD_TYPE
#define QMEP_BUILD_TYPE "unknown"
#endif

int exit_code(qmep_status s) {
    switch (s) {
        case QMEP_OK: return kExitOk;
        case QMEP_ERR_INVARIANT:
        case QMEP_ERR_DIMENSION:
        case QMEP_ERR_INTERNAL: return kExitNumeric;
        default: return kExitConfig;
    }
}

int report(qmep_status s) {
    std::cerr << "qmep: error: " << qmep_last_error() << "\n";
    return exit_code(s);
}

int cmd_info() {
    std::cout << "qmep " << qmep_version() << "\n"
              << "build: " << QMEP_BUILD_TYPE << "\n"
              << "dimension budget: " << qmep_dimension_budget() << "\n";
    return kExitOk;
}

int cmd_run(const std::string& config_path, const std::string& out_path, const std::string& format_name,
            unsigned threads) {
    qmep_config* cfg = nullptr;
    if (const qmep_status s = qmep_config_load(config_path.c_str(), &cfg); s != QMEP_OK) return report(s);

    const char* cfg_path = nullptr;
    qmep_format format = QMEP_FORMAT_CSV;
    qmep_config_output(cfg, &cfg_path, &format);
    if (format_name == "csv") format = QMEP_FORMAT_CSV;
    if (format_name == "json") format = QMEP_FORMAT_JSON;
    const std::string path = !out_path.empty() ? out_path : (cfg_path ? cfg_path : "");

    qmep_table* table = nullptr;
    qmep_status s = qmep_run(cfg, threads, &table);
    qmep_config_free(cfg);
    if (s != QMEP_OK) return report(s);

    if (!path.empty() && path != "-") {
        s = qmep_table_write(table, format, path.c_str());
    } else {
        char* bytes = nullptr;
        std::size_t len = 0;
        s = qmep_table_emit(table, format, &bytes, &len);
        if (s == QMEP_OK) {
            std::fwrite(bytes, 1, len, stdout);
            std::fflush(stdout);
            qmep_string_free(bytes);
        }
    }
    qmep_table_free(table);
    return s == QMEP_OK ? kExitOk : report(s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Measurement-emergence experiments on dense complex state spaces"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string format_name;
    unsigned threads = 1;
    auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--out", out_path, "Output path ('-' for stdout); overrides the config");
    run->add_option("--format", format_name, "Output format; overrides the config")
        ->check(CLI::IsMember({"csv", "json"}));
    run->add_option("--threads", threads, "Worker threads, 0 = all cores; output does not depend on it");

    auto* info = app.add_subcommand("info", "Print version, build type and dimension budget");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }
    if (*info) return cmd_info();
    return cmd_run(config_path, out_path, format_name, threads);
}
