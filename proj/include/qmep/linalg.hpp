#pragma once

// Dense finite-dimensional complex linear algebra: pure states, square
// operators, tensor-product index layout, partial traces, Hermitian
// eigendecomposition and unitary time evolution (hbar = 1).

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qmep {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Default numerical tolerances. Matrix checks are on the max-abs entry,
// vector checks on the Euclidean norm.
namespace tol {
inline constexpr double norm = 1e-10;
inline constexpr double herm = 1e-10;
inline constexpr double unitary = 1e-10;
inline constexpr double recon = 1e-10;
inline constexpr double proj = 1e-10;
inline constexpr double commute = 1e-10;
inline constexpr double trace = 1e-10;
}  // namespace tol

double max_abs(const Matrix& m);

/// Unit vector in a finite-dimensional Hilbert space.
class StateVector {
public:
    /// Throws InvariantError unless |amplitudes| = 1 within `tolerance`.
    explicit StateVector(Vector amplitudes, double tolerance = tol::norm);

    /// Rescales `v` to unit norm; throws InvariantError for a zero vector.
    static StateVector normalized(Vector v);
    static StateVector basis(Index dim, Index k);

    Index dim() const { return amps_.size(); }
    const Vector& amplitudes() const { return amps_; }
    Complex operator[](Index i) const { return amps_(i); }

private:
    Vector amps_;
};

/// Square complex matrix. Hermiticity and unitarity are checked on demand.
class Operator {
public:
    explicit Operator(Matrix entries);

    static Operator identity(Index dim);
    static Operator zero(Index dim);
    static Operator diagonal(std::span<const double> values);
    static Operator outer(const Vector& ket, const Vector& bra);

    Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }
    Complex operator()(Index r, Index c) const { return m_(r, c); }

    bool is_hermitian(double tolerance = tol::herm) const;
    bool is_unitary(double tolerance = tol::unitary) const;
    Complex trace() const { return m_.trace(); }
    Operator adjoint() const { return Operator(m_.adjoint()); }

    friend Operator operator*(const Operator& a, const Operator& b);
    friend Operator operator+(const Operator& a, const Operator& b);
    friend Operator operator-(const Operator& a, const Operator& b);
    friend Operator operator*(Complex s, const Operator& a);

private:
    Matrix m_;
};

/// Ordered tensor-factor structure. Composite basis indices are mixed-radix
/// numbers with the first factor as the most significant digit.
class CompositeSpace {
public:
    explicit CompositeSpace(std::vector<Index> factor_dims);

    std::size_t factor_count() const { return dims_.size(); }
    Index factor_dim(std::size_t f) const { return dims_.at(f); }
    const std::vector<Index>& factor_dims() const { return dims_; }
    Index total_dim() const { return total_; }

    std::vector<Index> digits(Index index) const;
    Index index(std::span<const Index> digits) const;

private:
    std::vector<Index> dims_;
    Index total_;
};

Operator tensor(const Operator& a, const Operator& b);
StateVector tensor_state(const StateVector& u, const StateVector& v);

/// Traces out every factor not in `keep`. Kept factors appear in ascending
/// order in the result. Throws DimensionError on a size mismatch, an empty or
/// out-of-range keep set, or duplicate indices.
Matrix partial_trace(const Matrix& rho, const CompositeSpace& space,
                     std::span<const std::size_t> keep);

/// Reduced density of the pure state |psi><psi| without forming the full
/// outer product.
Matrix reduced_density(const Vector& psi, const CompositeSpace& space,
                       std::span<const std::size_t> keep);

/// Lifts `local`, acting on `factors` (row-major in the given order), to the
/// whole space with identity on the remaining factors.
Operator embed(const Operator& local, const CompositeSpace& space,
               std::span<const std::size_t> factors);

/// target += scale * embed(local, space, factors), without the temporary.
void accumulate_embedded(Matrix& target, const Operator& local, const CompositeSpace& space,
                         std::span<const std::size_t> factors, Complex scale = 1.0);

/// Same result as embed(local, ...) * psi, in O(dim * local_dim) work.
Vector apply_local(const Operator& local, const CompositeSpace& space,
                   std::span<const std::size_t> factors, const Vector& psi);

struct EigenDecomposition {
    RealVector eigenvalues;  // ascending
    Matrix eigenvectors;     // orthonormal columns
};

/// Spectral form of a Hermitian generator. The matrix is split into the
/// connected components of its nonzero pattern and each block is
/// diagonalized separately, so block-diagonal (in particular diagonal)
/// generators of large dimension stay cheap to exponentiate.
class SpectralPropagator {
public:
    explicit SpectralPropagator(const Operator& h);

    Index dim() const { return dim_; }
    std::size_t block_count() const { return blocks_.size(); }

    /// exp(-i h t) psi
    Vector apply(const Vector& psi, double t) const;
    /// exp(-i h t) as a dense matrix.
    Operator unitary(double t) const;
    EigenDecomposition decomposition() const;
    /// Ascending eigenvalues without assembling eigenvectors.
    RealVector eigenvalues() const;

private:
    struct Block {
        std::vector<Index> indices;
        RealVector values;
        Matrix vectors;
    };
    Index dim_ = 0;
    std::vector<Block> blocks_;
};

/// Throws InvariantError for non-Hermitian input.
EigenDecomposition hermitian_eig(const Operator& h);

/// U = exp(-i h t).
Operator evolve(const Operator& h, double t);

StateVector apply(const Operator& u, const StateVector& psi);

/// Heisenberg-picture conjugation U^dagger A U.
Operator conjugate(const Operator& u, const Operator& a);

// Orthonormal bases are stored as the columns of a square matrix.
Matrix computational_basis(Index dim);
/// Discrete Fourier basis, column k = sum_m e^{2 pi i m k / d} |m> / sqrt(d).
/// For d = 2 this is the Hadamard basis.
Matrix fourier_basis(Index dim);
bool is_orthonormal_basis(const Matrix& basis, double tolerance = tol::norm);

}  // namespace qmep
