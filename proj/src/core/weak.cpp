#include "qmep/weak.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qmep/error.hpp"
#include "qmep/parallel.hpp"
#include "qmep/random.hpp"

namespace qmep {

KrausSet::KrausSet(Matrix psi_basis, Matrix mixing) : psi_(std::move(psi_basis)), mixing_(std::move(mixing)) {
    if (!is_orthonormal_basis(psi_)) throw InvariantError("KrausSet: system basis is not orthonormal");
    if (mixing_.rows() != psi_.cols() || mixing_.cols() != psi_.cols()) {
        throw DimensionError("KrausSet: mixing matrix must be d x d");
    }
    if (!Operator(mixing_).is_unitary()) throw InvariantError("KrausSet: mixing matrix is not unitary");
    const Index d = psi_.cols();
    ops_.reserve(static_cast<std::size_t>(d));
    for (Index k = 0; k < d; ++k) {
        Matrix op = Matrix::Zero(d, d);
        for (Index j = 0; j < d; ++j) op += mixing_(j, k) * psi_.col(j) * psi_.col(j).adjoint();
        ops_.emplace_back(std::move(op));
    }
}

double KrausSet::completeness_residual() const {
    Matrix sum = Matrix::Zero(dim(), dim());
    for (const Operator& k : ops_) sum += k.matrix().adjoint() * k.matrix();
    return max_abs(sum - Matrix::Identity(dim(), dim()));
}

KrausSet build_kraus(const Matrix& psi_basis, const Matrix& mixing) { return KrausSet(psi_basis, mixing); }

Matrix rotation_mixing(Index dim, double angle) {
    if (dim < 2) throw DimensionError("rotation_mixing: dimension must be >= 2");
    Matrix u = Matrix::Identity(dim, dim);
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    u(0, 0) = c;
    u(0, 1) = -s;
    u(1, 0) = s;
    u(1, 1) = c;
    return u;
}

std::vector<double> outcome_probabilities(const StateVector& psi, const KrausSet& kraus) {
    if (psi.dim() != kraus.dim()) throw DimensionError("outcome_probabilities: dimension mismatch");
    std::vector<double> p(kraus.size());
    for (std::size_t k = 0; k < kraus.size(); ++k) p[k] = (kraus[k].matrix() * psi.amplitudes()).squaredNorm();
    return p;
}

WeakUpdate weak_update(const StateVector& psi, const KrausSet& kraus, std::size_t k) {
    if (psi.dim() != kraus.dim()) throw DimensionError("weak_update: dimension mismatch");
    if (k >= kraus.size()) throw DimensionError("weak_update: outcome index out of range");
    Vector v = kraus[k].matrix() * psi.amplitudes();
    const double p = v.squaredNorm();
    if (!(p > kProbabilityFloor)) {
        throw InvariantError("weak_update: outcome " + std::to_string(k) + " has probability below the floor");
    }
    v /= std::sqrt(p);
    return {StateVector(std::move(v)), p};
}

RealVector born_weights(const StateVector& psi, const Matrix& psi_basis) {
    return (psi_basis.adjoint() * psi.amplitudes()).cwiseAbs2();
}

Trajectory run_trajectory(const StateVector& psi0, const KrausSet& kraus, std::size_t n_steps, std::uint64_t seed,
                          std::uint64_t stream, StateRecording recording) {
    if (psi0.dim() != kraus.dim()) throw DimensionError("run_trajectory: dimension mismatch");
    CounterRng rng(seed, stream);
    Trajectory tr;
    tr.seed = seed;
    tr.stream = stream;
    tr.outcomes.reserve(n_steps);
    tr.born_weights.resize(kraus.dim(), static_cast<Index>(n_steps + 1));
    tr.born_weights.col(0) = born_weights(psi0, kraus.psi_basis());

    StateVector psi = psi0;
    if (recording == StateRecording::All) {
        tr.states.reserve(n_steps + 1);
        tr.states.push_back(psi);
    }
    for (std::size_t step = 0; step < n_steps; ++step) {
        const std::vector<double> p = outcome_probabilities(psi, kraus);
        const double total = std::accumulate(p.begin(), p.end(), 0.0);
        tr.max_probability_residual = std::max(tr.max_probability_residual, std::abs(total - 1.0));

        // Inverse CDF; rounding can leave u above the last partial sum, in
        // which case the last admissible outcome is taken.
        const double u = rng.uniform();
        std::size_t k = p.size();
        double cumulative = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            cumulative += p[i];
            if (u < cumulative && p[i] > kProbabilityFloor) {
                k = i;
                break;
            }
        }
        if (k == p.size()) {
            for (std::size_t i = p.size(); i-- > 0;) {
                if (p[i] > kProbabilityFloor) {
                    k = i;
                    break;
                }
            }
        }
        psi = weak_update(psi, kraus, k).state;
        tr.outcomes.push_back(k);
        tr.born_weights.col(static_cast<Index>(step + 1)) = born_weights(psi, kraus.psi_basis());
        if (recording == StateRecording::All) tr.states.push_back(psi);
    }
    if (recording == StateRecording::FinalOnly) tr.states.push_back(psi);
    return tr;
}

std::vector<Trajectory> run_ensemble(const StateVector& psi0, const KrausSet& kraus, std::size_t n_steps,
                                     std::uint64_t seed, std::size_t count, unsigned threads,
                                     StateRecording recording) {
    std::vector<Trajectory> out(count);
    parallel_for(count, threads, [&](std::size_t i) {
        out[i] = run_trajectory(psi0, kraus, n_steps, seed, static_cast<std::uint64_t>(i), recording);
    });
    return out;
}

namespace {

// p_j(t+1) - p_j(t). A weight above 1/2 sits within rounding of 1 once the
// state has collapsed, so its increment is taken from the others (the weights
// sum to one) to keep full relative precision.
double weight_increment(const RealMatrix& w, Index j, Index t) {
    if (std::max(w(j, t), w(j, t + 1)) <= 0.5) return w(j, t + 1) - w(j, t);
    double others = 0.0;
    for (Index i = 0; i < w.rows(); ++i) {
        if (i != j) others += w(i, t + 1) - w(i, t);
    }
    return -others;
}

}  // namespace

ConvergenceStatistics convergence_statistics(std::span<const Trajectory> trajectories) {
    if (trajectories.empty()) throw InvariantError("convergence_statistics: empty ensemble");
    const Trajectory& first = trajectories.front();
    const Index d = first.born_weights.rows();
    const Index cols = first.born_weights.cols();
    for (const Trajectory& tr : trajectories) {
        if (tr.born_weights.rows() != d || tr.born_weights.cols() != cols) {
            throw InvariantError("convergence_statistics: trajectories differ in dimension or length");
        }
        if ((tr.born_weights.col(0) - first.born_weights.col(0)).cwiseAbs().maxCoeff() > tol::norm) {
            throw InvariantError("convergence_statistics: trajectories start from different states");
        }
    }
    const auto n = static_cast<double>(trajectories.size());
    const Index steps = cols - 1;

    ConvergenceStatistics st;
    st.trajectories = trajectories.size();
    st.empirical_dist.assign(static_cast<std::size_t>(d), 0.0);
    st.mean_weight = RealMatrix::Zero(d, cols);
    st.martingale_drift = RealMatrix::Zero(d, steps);
    st.drift_stderr = RealMatrix::Zero(d, steps);
    st.mean_max_weight.assign(static_cast<std::size_t>(cols), 0.0);
    st.max_weight_increment_stderr.assign(static_cast<std::size_t>(steps), 0.0);

    // Two passes per step, trajectory-index order, so the reduction is
    // reproducible. Deviations are scaled by their largest magnitude before
    // squaring: late increments are far below sqrt(DBL_MIN).
    const std::size_t count = trajectories.size();
    std::vector<double> inc(count);
    auto mean_and_stderr = [&](double& mean, double& se) {
        double sum = 0.0;
        for (double x : inc) sum += x;
        mean = sum / n;
        se = 0.0;
        if (count < 2) return;
        double scale = 0.0;
        for (double x : inc) scale = std::max(scale, std::abs(x - mean));
        if (scale == 0.0) return;
        double ss = 0.0;
        for (double x : inc) {
            const double y = (x - mean) / scale;
            ss += y * y;
        }
        se = scale * std::sqrt(ss / (n - 1.0) / n);
    };

    for (const Trajectory& tr : trajectories) {
        const RealMatrix& w = tr.born_weights;
        Index dominant = 0;
        w.col(cols - 1).maxCoeff(&dominant);
        st.empirical_dist[static_cast<std::size_t>(dominant)] += 1.0;
        st.mean_weight += w;
        for (Index t = 0; t < cols; ++t) st.mean_max_weight[static_cast<std::size_t>(t)] += w.col(t).maxCoeff();
    }
    for (double& f : st.empirical_dist) f /= n;
    st.mean_weight /= n;
    for (double& m : st.mean_max_weight) m /= n;

    for (Index t = 0; t < steps; ++t) {
        for (Index j = 0; j < d; ++j) {
            for (std::size_t i = 0; i < count; ++i) inc[i] = weight_increment(trajectories[i].born_weights, j, t);
            mean_and_stderr(st.martingale_drift(j, t), st.drift_stderr(j, t));
        }
        for (std::size_t i = 0; i < count; ++i) {
            const RealMatrix& w = trajectories[i].born_weights;
            Index before = 0;
            Index after = 0;
            w.col(t).maxCoeff(&before);
            w.col(t + 1).maxCoeff(&after);
            inc[i] = before == after ? weight_increment(w, before, t) : w(after, t + 1) - w(before, t);
        }
        double mean = 0.0;
        mean_and_stderr(mean, st.max_weight_increment_stderr[static_cast<std::size_t>(t)]);
    }
    return st;
}

}  // namespace qmep
