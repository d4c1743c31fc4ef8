#include "qmep/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qmep/decoherence.hpp"
#include "qmep/error.hpp"

namespace qmep {

using nlohmann::json;

std::string_view to_string(Experiment e) {
    switch (e) {
        case Experiment::Born: return "born";
        case Experiment::Decohere: return "decohere";
        case Experiment::Weak: return "weak";
        case Experiment::Entropy: return "entropy";
    }
    return "?";
}

std::string_view to_string(TableFormat f) { return f == TableFormat::Csv ? "csv" : "json"; }

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

namespace {

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown.
class Section {
public:
    Section(const json& j, std::string path, std::string_view source) : j_(j), path_(std::move(path)), source_(source) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    [[noreturn]] void fail(const std::string& where, const std::string& what) const {
        throw ConfigError(std::string(source_) + ": " + where + ": " + what);
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* find(const std::string& key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    const json& require(const std::string& key) {
        const json* v = find(key);
        if (!v) fail(key_path(key), "required key is missing");
        return *v;
    }

    std::int64_t integer(const std::string& key, std::int64_t fallback, std::int64_t lo, std::int64_t hi) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_number_integer()) fail(key_path(key), "expected an integer");
        const auto x = v->get<std::int64_t>();
        if (x < lo || x > hi) {
            fail(key_path(key), "value " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                                    std::to_string(hi) + "]");
        }
        return x;
    }

    double real(const std::string& key, double fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        return number(*v, key_path(key));
    }

    double number(const json& v, const std::string& where) const {
        if (!v.is_number()) fail(where, "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(where, "expected a finite number");
        return x;
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) fail(key_path(key), "unknown key");
        }
    }

    std::string_view source() const { return source_; }

private:
    const json& j_;
    std::string path_;
    std::string_view source_;
    std::set<std::string> seen_;
};

struct Reader {
    std::string_view source;

    [[noreturn]] void fail(const std::string& where, const std::string& what) const {
        throw ConfigError(std::string(source) + ": " + where + ": " + what);
    }

    double number(const json& v, const std::string& where) const {
        if (!v.is_number()) fail(where, "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(where, "expected a finite number");
        return x;
    }

    // A complex entry is a number or a [re, im] pair.
    Complex complex(const json& v, const std::string& where) const {
        if (v.is_number()) return {number(v, where), 0.0};
        if (v.is_array() && v.size() == 2) return {number(v[0], where + "[0]"), number(v[1], where + "[1]")};
        fail(where, "expected a number or a [re, im] pair");
    }

    Vector vector(const json& v, const std::string& where) const {
        if (!v.is_array() || v.empty()) fail(where, "expected a non-empty array");
        Vector out(static_cast<Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) {
            out(static_cast<Index>(i)) = complex(v[i], where + "[" + std::to_string(i) + "]");
        }
        return out;
    }

    // Array of equal-length arrays; `rows_are_columns` transposes (bases are
    // listed vector by vector).
    Matrix matrix(const json& v, const std::string& where, Index dim, bool rows_are_columns) const {
        if (!v.is_array() || static_cast<Index>(v.size()) != dim) {
            fail(where, "expected " + std::to_string(dim) + " rows");
        }
        Matrix m(dim, dim);
        for (Index r = 0; r < dim; ++r) {
            const std::string w = where + "[" + std::to_string(r) + "]";
            const Vector row = vector(v[static_cast<std::size_t>(r)], w);
            if (row.size() != dim) fail(w, "expected " + std::to_string(dim) + " entries");
            if (rows_are_columns) {
                m.col(r) = row;
            } else {
                m.row(r) = row.transpose();
            }
        }
        return m;
    }

    BasisSpec basis(const json* v, const std::string& where, Index dim, NamedBasis fallback) const {
        if (!v) return fallback;
        if (v->is_string()) {
            const auto s = v->get<std::string>();
            if (s == "computational") return NamedBasis::Computational;
            if (s == "fourier" || s == "hadamard") return NamedBasis::Fourier;
            if (s == "random") return NamedBasis::Random;
            fail(where, "unknown basis '" + s + "' (computational, fourier, hadamard, random)");
        }
        Matrix m = matrix(*v, where, dim, true);
        if (!is_orthonormal_basis(m)) fail(where, "basis vectors are not orthonormal");
        return m;
    }

    StateSpec state(const json* v, const std::string& where, Index dim) const {
        if (!v) return NamedState::Uniform;
        if (v->is_string()) {
            const auto s = v->get<std::string>();
            if (s == "uniform") return NamedState::Uniform;
            if (s == "random") return NamedState::Random;
            fail(where, "unknown state '" + s + "' (uniform, random)");
        }
        if (v->is_object()) {
            Section sec(*v, where, source);
            const auto k = sec.integer("basis_index", -1, 0, dim - 1);
            if (k < 0) fail(where, "expected key 'basis_index'");
            sec.finish();
            return BasisIndexState{static_cast<Index>(k)};
        }
        Vector amps = vector(*v, where);
        if (amps.size() != dim) fail(where, "expected " + std::to_string(dim) + " amplitudes");
        if (std::abs(amps.norm() - 1.0) > tol::norm) fail(where, "state is not normalized");
        return amps;
    }

    std::vector<double> reals(const json& v, const std::string& where) const {
        if (!v.is_array()) fail(where, "expected an array of numbers");
        std::vector<double> out;
        out.reserve(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
        return out;
    }
};

constexpr std::int64_t kMaxCount = 100'000'000;

BornParams parse_born(Section& s, const Reader& rd, bool& random) {
    BornParams p;
    // The S (x) A (x) B composite has d^3 states.
    p.dim = static_cast<Index>(s.integer("dim", 2, 1, 16));
    p.psi_basis = rd.basis(s.find("psi_basis"), s.key_path("psi_basis"), p.dim, NamedBasis::Computational);
    p.phi_basis = rd.basis(s.find("phi_basis"), s.key_path("phi_basis"), p.dim, NamedBasis::Fourier);
    p.initial_state = rd.state(s.find("initial_state"), s.key_path("initial_state"), p.dim);
    p.trials = static_cast<std::size_t>(s.integer("trials", 1, 1, kMaxCount));
    p.min_amplitude = s.real("min_amplitude", p.min_amplitude);
    p.random_min_amplitude = s.real("random_min_amplitude", p.random_min_amplitude);
    if (p.min_amplitude < 0.0) s.fail(s.key_path("min_amplitude"), "must be non-negative");
    if (p.random_min_amplitude < 0.0 || p.random_min_amplitude * std::sqrt(static_cast<double>(p.dim)) >= 1.0) {
        s.fail(s.key_path("random_min_amplitude"), "must lie in [0, 1/sqrt(dim))");
    }
    s.finish();
    random = std::holds_alternative<NamedBasis>(p.psi_basis) && std::get<NamedBasis>(p.psi_basis) == NamedBasis::Random;
    random |= std::holds_alternative<NamedBasis>(p.phi_basis) && std::get<NamedBasis>(p.phi_basis) == NamedBasis::Random;
    random |= std::holds_alternative<NamedState>(p.initial_state) &&
              std::get<NamedState>(p.initial_state) == NamedState::Random;
    return p;
}

DecohereParams parse_decohere(Section& s, const Reader& rd, bool& random) {
    DecohereParams p;
    p.dim = static_cast<Index>(s.integer("dim", 2, 1, 64));
    if (const json* h = s.find("h_system")) {
        Matrix m = rd.matrix(*h, s.key_path("h_system"), p.dim, false);
        if (!Operator(m).is_hermitian()) s.fail(s.key_path("h_system"), "matrix is not Hermitian");
        p.h_system = std::move(m);
    }
    p.entangler_basis =
        rd.basis(s.find("entangler_basis"), s.key_path("entangler_basis"), p.dim, NamedBasis::Computational);
    p.pointer_basis = rd.basis(s.find("pointer_basis"), s.key_path("pointer_basis"), p.dim, NamedBasis::Computational);
    if (const json* ev = s.find("pointer_eigenvalues")) {
        auto values = rd.reals(*ev, s.key_path("pointer_eigenvalues"));
        if (static_cast<Index>(values.size()) != p.dim) {
            s.fail(s.key_path("pointer_eigenvalues"), "expected " + std::to_string(p.dim) + " values");
        }
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            s.fail(s.key_path("pointer_eigenvalues"), "pointer eigenvalues must be distinct");
        }
        p.pointer_eigenvalues = std::move(values);
    }
    p.initial_state = rd.state(s.find("initial_state"), s.key_path("initial_state"), p.dim);
    p.t0 = s.real("t0", 0.0);

    Section bath(s.require("bath"), s.key_path("bath"), s.source());
    p.n_spins = static_cast<std::size_t>(bath.integer("n_spins", 0, 0, 12));
    if (const json* g = bath.find("couplings")) {
        if (g->is_array()) {
            auto values = rd.reals(*g, bath.key_path("couplings"));
            if (values.size() != p.n_spins) {
                bath.fail(bath.key_path("couplings"), "expected " + std::to_string(p.n_spins) + " couplings");
            }
            p.couplings = std::move(values);
        } else {
            Section u(*g, bath.key_path("couplings"), s.source());
            const auto range = rd.reals(u.require("uniform"), u.key_path("uniform"));
            if (range.size() != 2 || !(range[0] <= range[1])) u.fail(u.key_path("uniform"), "expected [lo, hi] with lo <= hi");
            u.finish();
            p.couplings = UniformRange{range[0], range[1]};
        }
    }
    if (const json* a = bath.find("amplitudes")) {
        const std::string where = bath.key_path("amplitudes");
        if (a->is_string()) {
            if (a->get<std::string>() != "half") bath.fail(where, "unknown amplitude preset (half)");
        } else {
            if (!a->is_array() || a->size() != p.n_spins) bath.fail(where, "expected one [a, b] pair per spin");
            std::vector<std::array<Complex, 2>> pairs;
            for (std::size_t i = 0; i < a->size(); ++i) {
                const std::string w = where + "[" + std::to_string(i) + "]";
                const Vector ab = rd.vector((*a)[i], w);
                if (ab.size() != 2) bath.fail(w, "expected an [a, b] pair");
                if (std::abs(ab.norm() - 1.0) > tol::norm) bath.fail(w, "amplitudes are not normalized");
                pairs.push_back({ab(0), ab(1)});
            }
            p.amplitudes = std::move(pairs);
        }
    }
    bath.finish();
    if (p.dim * p.dim * (Index{1} << p.n_spins) > kDimensionBudget) {
        s.fail(s.key_path("bath.n_spins"), "composite dimension dim^2 * 2^n_spins exceeds the budget of " +
                                               std::to_string(kDimensionBudget));
    }

    const json& t = s.require("times");
    const std::string where = s.key_path("times");
    if (t.is_array()) {
        p.times = rd.reals(t, where);
    } else {
        Section grid(t, where, s.source());
        const double start = grid.number(grid.require("start"), grid.key_path("start"));
        const double stop = grid.number(grid.require("stop"), grid.key_path("stop"));
        const auto count = grid.integer("count", 0, 1, 1'000'000);
        if (count < 1) grid.fail(grid.key_path("count"), "required key is missing");
        grid.finish();
        for (std::int64_t i = 0; i < count; ++i) {
            p.times.push_back(count == 1 ? start
                                         : start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1));
        }
    }
    if (p.times.empty()) s.fail(where, "at least one time is required");
    if (!std::is_sorted(p.times.begin(), p.times.end())) s.fail(where, "times must be sorted");
    s.finish();

    random = std::holds_alternative<UniformRange>(p.couplings) && p.n_spins > 0;
    for (const BasisSpec* b : {&p.entangler_basis, &p.pointer_basis}) {
        random |= std::holds_alternative<NamedBasis>(*b) && std::get<NamedBasis>(*b) == NamedBasis::Random;
    }
    random |= std::holds_alternative<NamedState>(p.initial_state) &&
              std::get<NamedState>(p.initial_state) == NamedState::Random;
    return p;
}

WeakParams parse_weak(Section& s, const Reader& rd, bool& random) {
    WeakParams p;
    p.dim = static_cast<Index>(s.integer("dim", 2, 1, 64));
    p.psi_basis = rd.basis(s.find("psi_basis"), s.key_path("psi_basis"), p.dim, NamedBasis::Computational);
    if (const json* m = s.find("mixing")) {
        const std::string where = s.key_path("mixing");
        if (m->is_string()) {
            const auto name = m->get<std::string>();
            if (name == "identity") {
                p.mixing = NamedMixing::Identity;
            } else if (name == "random") {
                p.mixing = NamedMixing::Random;
            } else {
                s.fail(where, "unknown mixing '" + name + "' (identity, random)");
            }
        } else if (m->is_object()) {
            Section rot(*m, where, s.source());
            const double angle = rot.number(rot.require("rotation"), rot.key_path("rotation"));
            rot.finish();
            if (p.dim < 2) s.fail(where, "rotation mixing needs dim >= 2");
            p.mixing = RotationMixing{angle};
        } else {
            Matrix u = rd.matrix(*m, where, p.dim, false);
            if (!Operator(u).is_unitary()) s.fail(where, "mixing matrix is not unitary");
            p.mixing = std::move(u);
        }
    }
    p.initial_state = rd.state(s.find("initial_state"), s.key_path("initial_state"), p.dim);
    p.steps = static_cast<std::size_t>(s.integer("steps", 500, 1, kMaxCount));
    p.trajectories = static_cast<std::size_t>(s.integer("trajectories", 1000, 1, kMaxCount));
    p.dominance_threshold = s.real("dominance_threshold", p.dominance_threshold);
    p.dominance_fraction = s.real("dominance_fraction", p.dominance_fraction);
    for (const char* key : {"dominance_threshold", "dominance_fraction"}) {
        const double v = std::string(key) == "dominance_threshold" ? p.dominance_threshold : p.dominance_fraction;
        if (v < 0.0 || v > 1.0) s.fail(s.key_path(key), "must lie in [0, 1]");
    }
    s.finish();
    random = true;  // outcome sampling
    return p;
}

EntropyParams parse_entropy(Section& s, const Reader& rd, bool& random) {
    EntropyParams p;
    p.dim = static_cast<Index>(s.integer("dim", 2, 1, 256));
    if (const json* d = s.find("density")) {
        const std::string where = s.key_path("density");
        if (d->is_string()) {
            const auto name = d->get<std::string>();
            if (name == "uniform") {
                p.density = NamedDensity::Uniform;
            } else if (name == "random") {
                p.density = NamedDensity::Random;
            } else if (name == "pure_random") {
                p.density = NamedDensity::PureRandom;
            } else {
                s.fail(where, "unknown density '" + name + "' (uniform, random, pure_random)");
            }
        } else {
            Matrix m = rd.matrix(*d, where, p.dim, false);
            try {
                DensityOperator check{Operator(m)};
            } catch (const Error& e) {
                s.fail(where, e.what());
            }
            p.density = std::move(m);
        }
    }
    p.dephasing_basis =
        rd.basis(s.find("dephasing_basis"), s.key_path("dephasing_basis"), p.dim, NamedBasis::Computational);
    p.samples = static_cast<std::size_t>(s.integer("samples", 1, 1, kMaxCount));
    s.finish();
    random = true;  // random unitary for the invariance column
    return p;
}

// Rejects duplicated keys while parsing; nlohmann keeps the last one otherwise.
class DuplicateKeyGuard {
public:
    explicit DuplicateKeyGuard(std::string_view source) : source_(source) {}

    bool operator()(int /*depth*/, json::parse_event_t event, json& parsed) {
        switch (event) {
            case json::parse_event_t::object_start: keys_.emplace_back(); break;
            case json::parse_event_t::object_end: keys_.pop_back(); break;
            case json::parse_event_t::key: {
                const auto key = parsed.get<std::string>();
                if (!keys_.back().insert(key).second) {
                    throw ConfigError(std::string(source_) + ": duplicated key '" + key + "'");
                }
                break;
            }
            default: break;
        }
        return true;
    }

private:
    std::string_view source_;
    std::vector<std::set<std::string>> keys_;
};

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end(), DuplicateKeyGuard(source), true, true);
    } catch (const json::parse_error& e) {
        // e.byte is one past the offending character.
        const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        std::string what = e.what();
        if (const auto pos = what.find("parse error"); pos != std::string::npos) what = what.substr(pos);
        throw ConfigError(std::string(source) + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
    }

    Reader rd{source};
    Section top(doc, "", source);
    ExperimentConfig cfg;

    const json& exp = top.require("experiment");
    if (!exp.is_string()) top.fail("experiment", "expected a string");
    const auto name = exp.get<std::string>();
    if (name == "born") {
        cfg.experiment = Experiment::Born;
    } else if (name == "decohere") {
        cfg.experiment = Experiment::Decohere;
    } else if (name == "weak") {
        cfg.experiment = Experiment::Weak;
    } else if (name == "entropy") {
        cfg.experiment = Experiment::Entropy;
    } else {
        top.fail("experiment", "unknown experiment '" + name + "' (born, decohere, weak, entropy)");
    }

    if (const json* seed = top.find("seed")) {
        if (!seed->is_number_unsigned()) top.fail("seed", "expected a non-negative 64-bit integer");
        cfg.seed = seed->get<std::uint64_t>();
    }

    if (const json* out = top.find("output")) {
        Section o(*out, "output", source);
        OutputSpec spec;
        if (const json* path = o.find("path")) {
            if (!path->is_string() || path->get<std::string>().empty()) o.fail("output.path", "expected a non-empty string");
            spec.path = path->get<std::string>();
        }
        if (const json* fmt = o.find("format")) {
            const std::string f = fmt->is_string() ? fmt->get<std::string>() : "";
            if (f == "csv") {
                spec.format = TableFormat::Csv;
            } else if (f == "json") {
                spec.format = TableFormat::Json;
            } else {
                o.fail("output.format", "expected \"csv\" or \"json\"");
            }
        }
        o.finish();
        cfg.output = std::move(spec);
    }

    const std::string section_name(to_string(cfg.experiment));
    const json* body = top.find(section_name);
    const json empty = json::object();
    Section s(body ? *body : empty, section_name, source);
    bool random = false;
    switch (cfg.experiment) {
        case Experiment::Born: cfg.params = parse_born(s, rd, random); break;
        case Experiment::Decohere:
            if (!body) top.fail(section_name, "required key is missing");
            cfg.params = parse_decohere(s, rd, random);
            break;
        case Experiment::Weak: cfg.params = parse_weak(s, rd, random); break;
        case Experiment::Entropy: cfg.params = parse_entropy(s, rd, random); break;
    }
    top.finish();

    if (random && !cfg.seed) top.fail("seed", "required because the experiment draws random quantities");
    cfg.config_hash = fnv1a64(doc.dump());
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("cannot read config file '" + path + "'");
    return parse_config(buf.str(), path);
}

}  // namespace qmep
