#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "qmep/config.hpp"
#include "qmep/error.hpp"
#include "qmep/experiments.hpp"
#include "qmep/table.hpp"

using namespace qmep;

namespace {

std::string message_of(std::string_view text) {
    try {
        parse_config(text, "cfg.json");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

std::size_t column_index(const ResultTable& t, std::string_view name) {
    for (std::size_t i = 0; i < t.columns().size(); ++i) {
        if (t.columns()[i].name == name) return i;
    }
    throw std::out_of_range(std::string(name));
}

double real_at(const ResultTable& t, std::size_t row, std::string_view name) {
    return std::get<double>(t.rows()[row][column_index(t, name)]);
}

}  // namespace

TEST(Config, MinimalBornLoads) {
    const ExperimentConfig c = parse_config(R"({"experiment": "born", "born": {"dim": 2}})");
    EXPECT_EQ(c.experiment, Experiment::Born);
    EXPECT_FALSE(c.seed.has_value());
    const auto& p = std::get<BornParams>(c.params);
    EXPECT_EQ(p.dim, 2);
    EXPECT_EQ(p.trials, 1u);
}

TEST(Config, MissingSeedNamesField) {
    const std::string m = message_of(R"({"experiment": "born", "born": {"dim": 3, "psi_basis": "random"}})");
    EXPECT_NE(m.find("seed"), std::string::npos) << m;
    EXPECT_NE(message_of(R"({"experiment": "weak", "weak": {}})").find("seed"), std::string::npos);
}

TEST(Config, RejectsDuplicateAndUnknownKeys) {
    EXPECT_NE(message_of(R"({"experiment": "born", "born": {"dim": 2, "dim": 3}})").find("duplicated key"),
              std::string::npos);
    const std::string m = message_of(R"({"experiment": "born", "born": {"dimm": 2}})");
    EXPECT_NE(m.find("born.dimm"), std::string::npos) << m;
}

TEST(Config, ParseErrorsCarryLineAndColumn) {
    const std::string m = message_of("{\n  \"experiment\": \"born\",\n  oops\n}");
    EXPECT_NE(m.find("cfg.json:3:"), std::string::npos) << m;
}

TEST(Config, InlineObjectsAreValidated) {
    EXPECT_FALSE(message_of(R"({"experiment": "born", "born": {"dim": 2, "psi_basis": [[1, 0], [1, 0]]}})").empty());
    EXPECT_FALSE(message_of(R"({"experiment": "born", "born": {"dim": 2, "initial_state": [1, 1]}})").empty());
    EXPECT_FALSE(message_of(R"({"experiment": "born", "born": {"dim": 17}})").empty());
    EXPECT_FALSE(message_of(R"({"experiment": "weak", "seed": 1, "weak": {"mixing": [[1, 0.1], [0, 1]]}})").empty());
    EXPECT_FALSE(message_of(R"({"experiment": "decohere", "decohere": {"dim": 2, "h_system": [[0, 1], [0, 0]],
                                "times": [0]}})")
                     .empty());
    EXPECT_NO_THROW(parse_config(R"({"experiment": "born", "born": {"dim": 2, "psi_basis": [[0, 1], [1, 0]],
                                   "initial_state": [0.6, [0, 0.8]]}})"));
}

TEST(Config, DecohereBudget) {
    const std::string m = message_of(R"({"experiment": "decohere", "seed": 1,
        "decohere": {"dim": 4, "bath": {"n_spins": 9}, "times": [0]}})");
    EXPECT_NE(m.find("4096"), std::string::npos) << m;
}

TEST(Config, HashIgnoresFormatting) {
    const auto a = parse_config(R"({"experiment":"born","born":{"dim":2}})");
    const auto b = parse_config("{\n  \"born\": {\"dim\": 2},\n  \"experiment\": \"born\"\n}");
    EXPECT_EQ(a.config_hash, b.config_hash);
}

TEST(Table, EmptyTableHasHeaderOnly) {
    const ResultTable t({{"a", ColumnType::Integer}, {"b", ColumnType::Real}});
    const std::string csv = emit(t, TableFormat::Csv);
    EXPECT_NE(csv.find("# columns: a:integer,b:real\r\na,b\r\n"), std::string::npos) << csv;
    EXPECT_EQ(csv.substr(csv.size() - 5), "a,b\r\n");
}

TEST(Table, ComplexColumnsSplit) {
    ResultTable t({{"r", ColumnType::Complex}});
    t.add_row({Complex(0.5, -0.25)});
    const std::string csv = emit(t, TableFormat::Csv);
    EXPECT_NE(csv.find("r_re,r_im\r\n0.5,-0.25\r\n"), std::string::npos) << csv;
    EXPECT_THROW(t.add_row({1.0}), InvariantError);
}

TEST(Table, RoundTripIsFixedPoint) {
    ResultTable t({{"i", ColumnType::Integer}, {"x", ColumnType::Real}, {"z", ColumnType::Complex}});
    t.set_metadata("experiment", "demo, \"quoted\"");
    t.set_metadata("seed", "7");
    t.add_row({std::int64_t{-3}, 0.1, Complex(1e-300, 2.5)});
    t.add_row({std::int64_t{4}, 1.0 / 3.0, Complex(-0.0, 1e20)});
    t.add_row({std::int64_t{5}, std::nan(""), Complex(INFINITY, -INFINITY)});
    for (TableFormat f : {TableFormat::Csv, TableFormat::Json}) {
        const std::string once = emit(t, f);
        const std::string twice = emit(parse_table(once, f), f);
        EXPECT_EQ(once, twice) << to_string(f);
        const ResultTable back = parse_table(once, f);
        EXPECT_EQ(std::get<double>(back.rows()[1][1]), 1.0 / 3.0);
    }
}

TEST(Experiments, HadamardTableIsOneHalf) {
    const auto c = parse_config(R"({"experiment": "born", "born": {"dim": 2, "phi_basis": "hadamard"}})");
    const ResultTable t = run(c);
    ASSERT_EQ(t.row_count(), 4u);
    for (std::size_t r = 0; r < 4; ++r) {
        EXPECT_NEAR(real_at(t, r, "p_emergent"), 0.5, 1e-12);
        EXPECT_LE(real_at(t, r, "abs_error"), 1e-12);
    }
    EXPECT_EQ(*t.find_metadata("experiment"), "born");
    EXPECT_EQ(*t.find_metadata("seed"), "none");
}

TEST(Experiments, EmptyBathHasNoDecoherence) {
    const auto c = parse_config(R"({"experiment": "decohere", "decohere": {"dim": 2, "t0": 1, "bath": {"n_spins": 0},
        "times": {"start": 0, "stop": 4, "count": 5}}})");
    const ResultTable t = run(c);
    ASSERT_GT(t.row_count(), 0u);
    for (std::size_t r = 0; r < t.row_count(); ++r) EXPECT_NEAR(real_at(t, r, "r_abs"), 1.0, 1e-15);
}

TEST(Experiments, ErrorsArePrefixedAndTyped) {
    const auto c = parse_config(R"({"experiment": "born", "born": {"dim": 2, "initial_state": {"basis_index": 0}}})");
    try {
        run(c);
        FAIL() << "expected InvariantError";
    } catch (const InvariantError& e) {
        EXPECT_EQ(std::string(e.what()).rfind("born: ", 0), 0u) << e.what();
    }
}

TEST(Experiments, DeterministicAcrossThreads) {
    const auto c = parse_config(R"({"experiment": "weak", "seed": 5, "weak": {"dim": 3, "mixing": "random",
        "psi_basis": "random", "initial_state": "random", "steps": 20, "trajectories": 50}})");
    const std::string a = emit(run(c, {1}), TableFormat::Csv);
    const std::string b = emit(run(c, {4}), TableFormat::Csv);
    EXPECT_EQ(a, b);
    const auto e = parse_config(R"({"experiment": "entropy", "seed": 5, "entropy": {"dim": 4, "samples": 7}})");
    EXPECT_EQ(emit(run(e, {1}), TableFormat::Json), emit(run(e, {3}), TableFormat::Json));
}
