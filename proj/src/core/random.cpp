#include "qmep/random.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/QR>

namespace qmep {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

void CounterRng::refill() {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                              static_cast<std::uint32_t>(seed_ >> 32)};
    const auto out = philox4x32_10(ctr, key);
    buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    available_ = 2;
    ++block_;
}

std::uint64_t CounterRng::next_u64() {
    if (available_ == 0) refill();
    return buffer_[static_cast<std::size_t>(2 - available_--)];
}

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double CounterRng::normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Matrix ginibre(CounterRng& rng, Index rows, Index cols) {
    Matrix g(rows, cols);
    const double s = std::sqrt(0.5);
    // Column-major fill order is part of the reproducibility contract.
    for (Index c = 0; c < cols; ++c) {
        for (Index r = 0; r < rows; ++r) {
            const double re = rng.normal();
            const double im = rng.normal();
            g(r, c) = Complex(s * re, s * im);
        }
    }
    return g;
}

Operator random_unitary(CounterRng& rng, Index dim) {
    const Matrix g = ginibre(rng, dim, dim);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix& r = qr.matrixQR();
    for (Index k = 0; k < dim; ++k) {
        const double a = std::abs(r(k, k));
        if (a > 0.0) q.col(k) *= r(k, k) / a;
    }
    return Operator(std::move(q));
}

Operator random_hermitian(CounterRng& rng, Index dim) {
    const Matrix g = ginibre(rng, dim, dim);
    return Operator(0.5 * (g + g.adjoint()));
}

StateVector random_state(CounterRng& rng, Index dim) {
    return StateVector::normalized(ginibre(rng, dim, 1).col(0));
}

DensityOperator random_density(CounterRng& rng, Index dim) {
    const Matrix g = ginibre(rng, dim, dim);
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityOperator::assume_positive(Operator(std::move(rho)));
}

}  // namespace qmep
