#include "qmep/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "qmep/error.hpp"

namespace qmep {

namespace {

void require_same_dim(Index a, Index b, const char* what) {
    if (a != b) {
        throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                             " vs " + std::to_string(b) + ")");
    }
}

// Maps (selected multi-index, rest multi-index) -> full composite index.
// Selected factors are taken in the given order; the rest keep their
// natural order.
struct FactorSplit {
    Index selected_dim = 1;
    Index rest_dim = 1;
    std::vector<Index> full;  // full[a * rest_dim + t]

    Index at(Index a, Index t) const { return full[static_cast<std::size_t>(a * rest_dim + t)]; }
};

FactorSplit split_factors(const CompositeSpace& space, std::span<const std::size_t> selected,
                          const char* what) {
    const std::size_t n = space.factor_count();
    std::vector<bool> used(n, false);
    for (std::size_t f : selected) {
        if (f >= n) {
            throw DimensionError(std::string(what) + ": factor index " + std::to_string(f) +
                                 " out of range");
        }
        if (used[f]) {
            throw DimensionError(std::string(what) + ": duplicate factor index " +
                                 std::to_string(f));
        }
        used[f] = true;
    }
    std::vector<std::size_t> rest;
    for (std::size_t f = 0; f < n; ++f) {
        if (!used[f]) rest.push_back(f);
    }

    // Stride of each factor in the full index.
    std::vector<Index> stride(n, 1);
    for (std::size_t f = n; f-- > 1;) stride[f - 1] = stride[f] * space.factor_dim(f);

    auto offsets = [&](std::span<const std::size_t> factors) {
        Index total = 1;
        for (std::size_t f : factors) total *= space.factor_dim(f);
        std::vector<Index> off(static_cast<std::size_t>(total), 0);
        for (Index m = 0; m < total; ++m) {
            Index rem = m;
            Index o = 0;
            for (std::size_t i = factors.size(); i-- > 0;) {
                const Index d = space.factor_dim(factors[i]);
                o += (rem % d) * stride[factors[i]];
                rem /= d;
            }
            off[static_cast<std::size_t>(m)] = o;
        }
        return off;
    };

    const auto sel_off = offsets(selected);
    const auto rest_off = offsets(rest);
    FactorSplit split;
    split.selected_dim = static_cast<Index>(sel_off.size());
    split.rest_dim = static_cast<Index>(rest_off.size());
    split.full.resize(sel_off.size() * rest_off.size());
    for (std::size_t a = 0; a < sel_off.size(); ++a) {
        for (std::size_t t = 0; t < rest_off.size(); ++t) {
            split.full[a * rest_off.size() + t] = sel_off[a] + rest_off[t];
        }
    }
    return split;
}

std::vector<std::size_t> sorted_keep(std::span<const std::size_t> keep, const char* what) {
    if (keep.empty()) throw DimensionError(std::string(what) + ": empty keep set");
    std::vector<std::size_t> k(keep.begin(), keep.end());
    std::sort(k.begin(), k.end());
    return k;
}

}  // namespace

double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------- StateVector

StateVector::StateVector(Vector amplitudes, double tolerance) : amps_(std::move(amplitudes)) {
    if (amps_.size() < 1) throw DimensionError("StateVector: dimension must be >= 1");
    const double n = amps_.norm();
    if (!(std::abs(n - 1.0) <= tolerance)) {
        throw InvariantError("StateVector: norm " + std::to_string(n) + " is not 1");
    }
}

StateVector StateVector::normalized(Vector v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw InvariantError("StateVector: cannot normalize zero vector");
    v /= n;
    return StateVector(std::move(v));
}

StateVector StateVector::basis(Index dim, Index k) {
    if (k < 0 || k >= dim) throw DimensionError("StateVector::basis: index out of range");
    Vector v = Vector::Zero(dim);
    v(k) = 1.0;
    return StateVector(std::move(v));
}

// ------------------------------------------------------------------- Operator

Operator::Operator(Matrix entries) : m_(std::move(entries)) {
    if (m_.rows() != m_.cols()) throw DimensionError("Operator: matrix is not square");
    if (m_.rows() < 1) throw DimensionError("Operator: dimension must be >= 1");
}

Operator Operator::identity(Index dim) { return Operator(Matrix::Identity(dim, dim)); }

Operator Operator::zero(Index dim) { return Operator(Matrix::Zero(dim, dim)); }

Operator Operator::diagonal(std::span<const double> values) {
    Matrix m = Matrix::Zero(static_cast<Index>(values.size()), static_cast<Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<Index>(i), static_cast<Index>(i)) = values[i];
    return Operator(std::move(m));
}

Operator Operator::outer(const Vector& ket, const Vector& bra) {
    return Operator(ket * bra.adjoint());
}

bool Operator::is_hermitian(double tolerance) const {
    // Loop instead of m_ - m_.adjoint() so large generators need no temporary.
    for (Index c = 0; c < dim(); ++c) {
        for (Index r = 0; r <= c; ++r) {
            if (!(std::abs(m_(r, c) - std::conj(m_(c, r))) <= tolerance)) return false;
        }
    }
    return true;
}

bool Operator::is_unitary(double tolerance) const {
    return max_abs(m_ * m_.adjoint() - Matrix::Identity(dim(), dim())) <= tolerance;
}

Operator operator*(const Operator& a, const Operator& b) {
    require_same_dim(a.dim(), b.dim(), "operator product");
    return Operator(a.m_ * b.m_);
}

Operator operator+(const Operator& a, const Operator& b) {
    require_same_dim(a.dim(), b.dim(), "operator sum");
    return Operator(a.m_ + b.m_);
}

Operator operator-(const Operator& a, const Operator& b) {
    require_same_dim(a.dim(), b.dim(), "operator difference");
    return Operator(a.m_ - b.m_);
}

Operator operator*(Complex s, const Operator& a) { return Operator(s * a.m_); }

// ------------------------------------------------------------- CompositeSpace

CompositeSpace::CompositeSpace(std::vector<Index> factor_dims) : dims_(std::move(factor_dims)), total_(1) {
    if (dims_.empty()) throw DimensionError("CompositeSpace: no factors");
    for (Index d : dims_) {
        if (d < 1) throw DimensionError("CompositeSpace: factor dimension must be >= 1");
        total_ *= d;
    }
}

std::vector<Index> CompositeSpace::digits(Index index) const {
    if (index < 0 || index >= total_) throw DimensionError("CompositeSpace: index out of range");
    std::vector<Index> out(dims_.size());
    for (std::size_t f = dims_.size(); f-- > 0;) {
        out[f] = index % dims_[f];
        index /= dims_[f];
    }
    return out;
}

Index CompositeSpace::index(std::span<const Index> digits) const {
    if (digits.size() != dims_.size()) throw DimensionError("CompositeSpace: wrong digit count");
    Index idx = 0;
    for (std::size_t f = 0; f < dims_.size(); ++f) {
        if (digits[f] < 0 || digits[f] >= dims_[f]) throw DimensionError("CompositeSpace: digit out of range");
        idx = idx * dims_[f] + digits[f];
    }
    return idx;
}

// ------------------------------------------------------------ tensor products

Operator tensor(const Operator& a, const Operator& b) {
    const Index da = a.dim();
    const Index db = b.dim();
    Matrix out(da * db, da * db);
    for (Index i = 0; i < da; ++i) {
        for (Index j = 0; j < da; ++j) {
            out.block(i * db, j * db, db, db) = a(i, j) * b.matrix();
        }
    }
    return Operator(std::move(out));
}

StateVector tensor_state(const StateVector& u, const StateVector& v) {
    Vector out(u.dim() * v.dim());
    for (Index i = 0; i < u.dim(); ++i) out.segment(i * v.dim(), v.dim()) = u[i] * v.amplitudes();
    return StateVector(std::move(out));
}

// ------------------------------------------------------------- partial traces

Matrix partial_trace(const Matrix& rho, const CompositeSpace& space, std::span<const std::size_t> keep) {
    if (rho.rows() != rho.cols() || rho.rows() != space.total_dim()) {
        throw DimensionError("partial_trace: operator dimension does not match composite space");
    }
    const auto k = sorted_keep(keep, "partial_trace");
    const FactorSplit s = split_factors(space, k, "partial_trace");
    Matrix out = Matrix::Zero(s.selected_dim, s.selected_dim);
    for (Index a = 0; a < s.selected_dim; ++a) {
        for (Index b = 0; b < s.selected_dim; ++b) {
            Complex acc = 0.0;
            for (Index t = 0; t < s.rest_dim; ++t) acc += rho(s.at(a, t), s.at(b, t));
            out(a, b) = acc;
        }
    }
    return out;
}

Matrix reduced_density(const Vector& psi, const CompositeSpace& space, std::span<const std::size_t> keep) {
    if (psi.size() != space.total_dim()) {
        throw DimensionError("reduced_density: state dimension does not match composite space");
    }
    const auto k = sorted_keep(keep, "reduced_density");
    const FactorSplit s = split_factors(space, k, "reduced_density");
    Matrix m(s.selected_dim, s.rest_dim);
    for (Index a = 0; a < s.selected_dim; ++a) {
        for (Index t = 0; t < s.rest_dim; ++t) m(a, t) = psi(s.at(a, t));
    }
    return m * m.adjoint();
}

// ------------------------------------------------------------------ embedding

Operator embed(const Operator& local, const CompositeSpace& space, std::span<const std::size_t> factors) {
    Matrix out = Matrix::Zero(space.total_dim(), space.total_dim());
    accumulate_embedded(out, local, space, factors);
    return Operator(std::move(out));
}

void accumulate_embedded(Matrix& target, const Operator& local, const CompositeSpace& space,
                         std::span<const std::size_t> factors, Complex scale) {
    if (target.rows() != space.total_dim() || target.cols() != space.total_dim()) {
        throw DimensionError("accumulate_embedded: target does not match composite space");
    }
    const FactorSplit s = split_factors(space, factors, "embed");
    require_same_dim(local.dim(), s.selected_dim, "embed");
    for (Index t = 0; t < s.rest_dim; ++t) {
        for (Index a = 0; a < s.selected_dim; ++a) {
            for (Index b = 0; b < s.selected_dim; ++b) {
                const Complex v = local(a, b);
                if (v != Complex(0.0)) target(s.at(a, t), s.at(b, t)) += scale * v;
            }
        }
    }
}

Vector apply_local(const Operator& local, const CompositeSpace& space, std::span<const std::size_t> factors,
                   const Vector& psi) {
    if (psi.size() != space.total_dim()) throw DimensionError("apply_local: state dimension mismatch");
    const FactorSplit s = split_factors(space, factors, "apply_local");
    require_same_dim(local.dim(), s.selected_dim, "apply_local");
    Matrix m(s.selected_dim, s.rest_dim);
    for (Index a = 0; a < s.selected_dim; ++a) {
        for (Index t = 0; t < s.rest_dim; ++t) m(a, t) = psi(s.at(a, t));
    }
    const Matrix r = local.matrix() * m;
    Vector out(psi.size());
    for (Index a = 0; a < s.selected_dim; ++a) {
        for (Index t = 0; t < s.rest_dim; ++t) out(s.at(a, t)) = r(a, t);
    }
    return out;
}

// --------------------------------------------------------- spectral machinery

SpectralPropagator::SpectralPropagator(const Operator& h) : dim_(h.dim()) {
    if (!h.is_hermitian()) throw InvariantError("hermitian eigendecomposition: operator is not Hermitian");
    const Matrix& m = h.matrix();

    // Connected components of the nonzero pattern (union-find).
    std::vector<Index> parent(static_cast<std::size_t>(dim_));
    std::iota(parent.begin(), parent.end(), Index{0});
    auto find = [&](Index x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (Index c = 0; c < dim_; ++c) {
        for (Index r = 0; r < c; ++r) {
            if (m(r, c) != Complex(0.0) || m(c, r) != Complex(0.0)) {
                const Index a = find(r);
                const Index b = find(c);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
        }
    }
    std::vector<Index> block_of(static_cast<std::size_t>(dim_), -1);
    for (Index i = 0; i < dim_; ++i) {
        const Index root = find(i);
        if (block_of[root] < 0) {
            block_of[root] = static_cast<Index>(blocks_.size());
            blocks_.emplace_back();
        }
        blocks_[static_cast<std::size_t>(block_of[root])].indices.push_back(i);
    }

    for (Block& b : blocks_) {
        const auto n = static_cast<Index>(b.indices.size());
        if (n == 1) {
            const Index i = b.indices.front();
            b.values = RealVector::Constant(1, m(i, i).real());
            b.vectors = Matrix::Identity(1, 1);
            continue;
        }
        Matrix sub(n, n);
        for (Index r = 0; r < n; ++r) {
            for (Index c = 0; c < n; ++c) sub(r, c) = m(b.indices[r], b.indices[c]);
        }
        sub = 0.5 * (sub + sub.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<Matrix> solver(sub);
        if (solver.info() != Eigen::Success) throw InvariantError("hermitian eigendecomposition did not converge");
        b.values = solver.eigenvalues();
        b.vectors = solver.eigenvectors();
    }
}

Vector SpectralPropagator::apply(const Vector& psi, double t) const {
    if (psi.size() != dim_) throw DimensionError("SpectralPropagator::apply: dimension mismatch");
    Vector out(dim_);
    for (const Block& b : blocks_) {
        const auto n = static_cast<Index>(b.indices.size());
        Vector local(n);
        for (Index i = 0; i < n; ++i) local(i) = psi(b.indices[i]);
        Vector coeff = b.vectors.adjoint() * local;
        for (Index i = 0; i < n; ++i) coeff(i) *= std::polar(1.0, -b.values(i) * t);
        local = b.vectors * coeff;
        for (Index i = 0; i < n; ++i) out(b.indices[i]) = local(i);
    }
    return out;
}

Operator SpectralPropagator::unitary(double t) const {
    Matrix u = Matrix::Zero(dim_, dim_);
    for (const Block& b : blocks_) {
        const auto n = static_cast<Index>(b.indices.size());
        Vector phases(n);
        for (Index i = 0; i < n; ++i) phases(i) = std::polar(1.0, -b.values(i) * t);
        const Matrix ub = b.vectors * phases.asDiagonal() * b.vectors.adjoint();
        for (Index r = 0; r < n; ++r) {
            for (Index c = 0; c < n; ++c) u(b.indices[r], b.indices[c]) = ub(r, c);
        }
    }
    return Operator(std::move(u));
}

EigenDecomposition SpectralPropagator::decomposition() const {
    struct Entry {
        double value;
        std::size_t block;
        Index column;
    };
    std::vector<Entry> entries;
    entries.reserve(static_cast<std::size_t>(dim_));
    for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
        for (Index c = 0; c < blocks_[bi].values.size(); ++c) entries.push_back({blocks_[bi].values(c), bi, c});
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.value < b.value; });

    EigenDecomposition out{RealVector(dim_), Matrix::Zero(dim_, dim_)};
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const Entry& e = entries[k];
        const Block& b = blocks_[e.block];
        out.eigenvalues(static_cast<Index>(k)) = e.value;
        for (std::size_t r = 0; r < b.indices.size(); ++r) {
            out.eigenvectors(b.indices[r], static_cast<Index>(k)) = b.vectors(static_cast<Index>(r), e.column);
        }
    }
    return out;
}

RealVector SpectralPropagator::eigenvalues() const {
    std::vector<double> all;
    all.reserve(static_cast<std::size_t>(dim_));
    for (const Block& b : blocks_) all.insert(all.end(), b.values.begin(), b.values.end());
    std::sort(all.begin(), all.end());
    return Eigen::Map<const RealVector>(all.data(), static_cast<Index>(all.size()));
}

EigenDecomposition hermitian_eig(const Operator& h) { return SpectralPropagator(h).decomposition(); }

Operator evolve(const Operator& h, double t) { return SpectralPropagator(h).unitary(t); }

StateVector apply(const Operator& u, const StateVector& psi) {
    require_same_dim(u.dim(), psi.dim(), "apply");
    return StateVector(u.matrix() * psi.amplitudes());
}

Operator conjugate(const Operator& u, const Operator& a) {
    require_same_dim(u.dim(), a.dim(), "conjugate");
    return Operator(u.matrix().adjoint() * a.matrix() * u.matrix());
}

// --------------------------------------------------------------------- bases

Matrix computational_basis(Index dim) { return Matrix::Identity(dim, dim); }

Matrix fourier_basis(Index dim) {
    Matrix f(dim, dim);
    const double norm = 1.0 / std::sqrt(static_cast<double>(dim));
    for (Index m = 0; m < dim; ++m) {
        for (Index k = 0; k < dim; ++k) {
            // Reduce m*k first so the phase argument stays small.
            const double phase = 2.0 * std::numbers::pi * static_cast<double>((m * k) % dim) / static_cast<double>(dim);
            f(m, k) = std::polar(norm, phase);
        }
    }
    return f;
}

bool is_orthonormal_basis(const Matrix& basis, double tolerance) {
    if (basis.rows() != basis.cols() || basis.rows() < 1) return false;
    return max_abs(basis.adjoint() * basis - Matrix::Identity(basis.cols(), basis.cols())) <= tolerance;
}

}  // namespace qmep
