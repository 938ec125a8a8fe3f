// oracle.hpp
// Brute-force reference computations for the pricing formulas.
//
// Everything here is deliberately dense: the N-period stock operator and the
// product states live on the full 2^N tensor space, the Bose-Einstein state is
// a compression onto the symmetric subspace built from explicit Dicke vectors,
// and the classical oracle walks all 2^N paths. Nothing in this header calls
// the closed forms in pricing.hpp.
//
// Tensor ordering: factor 1 is the most significant bit of a basis index.

#pragma once

#include "qbm/bloch.hpp"
#include "qbm/market.hpp"
#include "qbm/pricing.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qbm::oracle {

using DenseOperator = Eigen::MatrixXcd;

/// Largest N for 2^N x 2^N dense operators.
inline constexpr int kDenseCap = 12;
/// Largest N for the 2^N classical path loop.
inline constexpr int kPathCap = 25;

inline void require_dense_cap(int periods) {
    if (periods < 1) {
        throw std::invalid_argument("oracle needs at least one period");
    }
    if (periods > kDenseCap) {
        throw std::invalid_argument("N exceeds dense oracle cap (" + std::to_string(kDenseCap) + ")");
    }
}

[[nodiscard]] inline DenseOperator kron(const DenseOperator& a, const DenseOperator& b) {
    DenseOperator out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

/// tr(A B) without forming the product.
[[nodiscard]] inline std::complex<double> trace_product(const DenseOperator& a, const DenseOperator& b) {
    return a.transpose().cwiseProduct(b).sum();
}

/// S_N = S0 (1 + R_1) x ... x (1 + R_N), with R_j = (a+b)/2 + (b-a)/2 n_j . sigma.
[[nodiscard]] inline DenseOperator build_stock_operator(const MarketParams& params,
                                                        std::span<const BlochVector> directions) {
    require_dense_cap(static_cast<int>(directions.size()));
    DenseOperator out = DenseOperator::Identity(1, 1) * params.stock_initial();
    for (const BlochVector& dir : directions) {
        const TwoLevelObservable obs = make_observable(params.down(), params.up(), dir);
        const DenseOperator factor = Eigen::Matrix2cd::Identity() + obs.matrix();
        out = kron(out, factor);
    }
    return out;
}

[[nodiscard]] inline DenseOperator build_product_state(std::span<const DensityState> states) {
    require_dense_cap(static_cast<int>(states.size()));
    DenseOperator out = DenseOperator::Identity(1, 1);
    for (const DensityState& s : states) {
        if (!is_faithful(s)) {
            throw std::invalid_argument("product state factors must be faithful");
        }
        out = kron(out, DenseOperator(s.matrix()));
    }
    return out;
}

namespace detail {

inline Eigen::Matrix2cd projector(const Eigen::Vector2cd& v) { return v * v.adjoint(); }

/// Projector product for one subset: factor j uses |u_j><u_j| when bit
/// (N - 1 - j) of `mask` is set, |v_j><v_j| otherwise.
inline DenseOperator subset_projector(std::span<const Eigenbasis> bases, std::uint32_t mask) {
    const auto n = static_cast<int>(bases.size());
    DenseOperator out = DenseOperator::Identity(1, 1);
    for (int j = 0; j < n; ++j) {
        const bool up = (mask >> (n - 1 - j)) & 1U;
        out = kron(out, DenseOperator(projector(up ? bases[j].up : bases[j].down)));
    }
    return out;
}

inline std::vector<Eigenbasis> bases_for(std::span<const BlochVector> directions) {
    std::vector<Eigenbasis> bases;
    bases.reserve(directions.size());
    for (const BlochVector& d : directions) {
        bases.push_back(eigenbasis(d));
    }
    return bases;
}

}  // namespace detail

/// Sum over all subsets sigma with |sigma| = ups of the tensor product of
/// eigenprojectors (u_j for j in sigma, v_j otherwise).
[[nodiscard]] inline DenseOperator mb_projector_sum(std::span<const BlochVector> directions, int ups) {
    const auto n = static_cast<int>(directions.size());
    require_dense_cap(n);
    if (ups < 0 || ups > n) {
        throw std::invalid_argument("up-count out of range");
    }
    const std::vector<Eigenbasis> bases = detail::bases_for(directions);
    const auto dim = Eigen::Index{1} << n;
    DenseOperator sum = DenseOperator::Zero(dim, dim);
    for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
        if (std::popcount(mask) == ups) {
            sum += detail::subset_projector(bases, mask);
        }
    }
    return sum;
}

/// tr[(rho_1 x ... x rho_N) sum_{|sigma| = n} (x_j |w_j sigma><w_j sigma|)], densely.
[[nodiscard]] inline double mb_weight(std::span<const DensityState> states,
                                      std::span<const BlochVector> directions, int ups) {
    if (states.size() != directions.size()) {
        throw std::invalid_argument("need one direction per state");
    }
    const DenseOperator rho = build_product_state(states);
    return trace_product(rho, mb_projector_sum(directions, ups)).real();
}

/// All N + 1 weights from one product state; entry n is mb_weight(..., n).
[[nodiscard]] inline std::vector<double> mb_weights(std::span<const DensityState> states,
                                                    std::span<const BlochVector> directions) {
    if (states.size() != directions.size()) {
        throw std::invalid_argument("need one direction per state");
    }
    const auto n = static_cast<int>(states.size());
    const DenseOperator rho = build_product_state(states);
    const std::vector<Eigenbasis> bases = detail::bases_for(directions);
    std::vector<double> weights(static_cast<std::size_t>(n) + 1, 0.0);
    for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
        weights[std::popcount(mask)] +=
            trace_product(rho, detail::subset_projector(bases, mask)).real();
    }
    return weights;
}

inline void require_disk_states(const MarketParams& params, std::span<const DensityState> states,
                                std::span<const BlochVector> directions) {
    if (states.size() != directions.size()) {
        throw std::invalid_argument("need one direction per state");
    }
    for (std::size_t j = 0; j < states.size(); ++j) {
        const TwoLevelObservable obs = make_observable(params.down(), params.up(), directions[j]);
        const RiskNeutralDisk disk = risk_neutral_disk(params, obs);
        if (!disk_contains(disk, states[j], obs, params.rate())) {
            throw std::invalid_argument("factor " + std::to_string(j) +
                                        " is not in its risk-neutral disk");
        }
    }
}

/// (1 + r)^-N tr[(x rho_j) f(S_N)], with f(S_N) formed by applying the
/// terminal payoff to each eigenvalue of S_N and keeping its eigenvectors.
template <class Payoff>
[[nodiscard]] double oracle_price_mb_payoff(const MarketParams& params,
                                            std::span<const DensityState> states,
                                            std::span<const BlochVector> directions,
                                            Payoff&& payoff) {
    require_disk_states(params, states, directions);
    const auto n = static_cast<int>(states.size());
    const DenseOperator stock = build_stock_operator(params, directions);
    const Eigen::SelfAdjointEigenSolver<DenseOperator> solver(stock);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eigen decomposition failed");
    }
    Eigen::VectorXd values = solver.eigenvalues();
    for (double& v : values) {
        v = payoff(v);
    }
    const auto& vecs = solver.eigenvectors();
    const DenseOperator payoff_op = vecs * values.cast<std::complex<double>>().asDiagonal() * vecs.adjoint();
    const DenseOperator rho = build_product_state(states);
    return std::pow(1.0 + params.rate(), -n) * trace_product(rho, payoff_op).real();
}

[[nodiscard]] inline double oracle_price_mb(const MarketParams& params,
                                            std::span<const DensityState> states,
                                            std::span<const BlochVector> directions,
                                            const CallSpec& spec) {
    return oracle_price_mb_payoff(params, states, directions, CallPayoff{spec.strike()});
}

/// Compression of rho^{x N} onto the symmetric subspace, renormalized to unit
/// trace. Rows/columns are Dicke states indexed by the number of up factors
/// (eigenvector u of R), 0..N.
[[nodiscard]] inline DenseOperator build_symmetric_be_state(const DensityState& state,
                                                            const TwoLevelObservable& obs,
                                                            int periods) {
    require_dense_cap(periods);
    const Eigenbasis basis = eigenbasis(obs);
    Eigen::Matrix2cd change;
    change.col(0) = basis.up;
    change.col(1) = basis.down;
    // rho in the (u, v) basis: index 0 is up, 1 is down.
    const DenseOperator local = change.adjoint() * state.matrix() * change;

    DenseOperator product = DenseOperator::Identity(1, 1);
    for (int j = 0; j < periods; ++j) {
        product = kron(product, local);
    }

    const auto dim = Eigen::Index{1} << periods;
    DenseOperator dicke = DenseOperator::Zero(dim, periods + 1);
    std::vector<double> counts(static_cast<std::size_t>(periods) + 1, 0.0);
    for (Eigen::Index idx = 0; idx < dim; ++idx) {
        const int ups = periods - std::popcount(static_cast<std::uint64_t>(idx));
        dicke(idx, ups) = 1.0;
        counts[ups] += 1.0;
    }
    for (int n = 0; n <= periods; ++n) {
        dicke.col(n) /= std::sqrt(counts[n]);
    }

    DenseOperator compressed = dicke.adjoint() * product * dicke;
    const std::complex<double> tr = compressed.trace();
    if (!(std::abs(tr) > 0.0)) {
        throw std::invalid_argument("state has no weight on the symmetric subspace");
    }
    compressed /= tr;
    return compressed;
}

/// (1 + r)^-N tr[rho_BE diag(payoff(S_n))] on the symmetric subspace.
[[nodiscard]] inline double oracle_price_be(const MarketParams& params, const DensityState& state,
                                            const CallSpec& spec, int periods,
                                            const TwoLevelObservable& obs) {
    const RiskNeutralDisk disk = risk_neutral_disk(params, obs);
    if (!disk_contains(disk, state, obs, params.rate())) {
        throw std::invalid_argument("state is not in the risk-neutral disk");
    }
    const DenseOperator be_state = build_symmetric_be_state(state, obs, periods);
    double sum = 0.0;
    for (int n = 0; n <= periods; ++n) {
        double price = params.stock_initial();
        for (int k = 0; k < n; ++k) price *= 1.0 + params.up();
        for (int k = n; k < periods; ++k) price *= 1.0 + params.down();
        sum += be_state(n, n).real() * std::max(price - spec.strike(), 0.0);
    }
    return std::pow(1.0 + params.rate(), -periods) * sum;
}

[[nodiscard]] inline double oracle_price_be(const MarketParams& params, const DensityState& state,
                                            const CallSpec& spec, int periods) {
    return oracle_price_be(params, state, spec, periods, default_observable(params));
}

/// Largest gap between the diagonal of the compressed state and the
/// normalized geometric weights built from q = <u|rho|u>. Zero for states
/// diagonal in R's eigenbasis; off-diagonal coherence makes it positive.
[[nodiscard]] inline double be_state_weight_deviation(const DensityState& state,
                                                      const TwoLevelObservable& obs, int periods) {
    const DenseOperator be_state = build_symmetric_be_state(state, obs, periods);
    const Eigenbasis basis = eigenbasis(obs);
    const double q = (basis.up.adjoint() * state.matrix() * basis.up)(0, 0).real();
    // Geometric weights computed directly here rather than via pricing.hpp.
    std::vector<double> w(static_cast<std::size_t>(periods) + 1);
    double total = 0.0;
    for (int n = 0; n <= periods; ++n) {
        w[n] = std::pow(q, n) * std::pow(1.0 - q, periods - n);
        total += w[n];
    }
    double worst = 0.0;
    for (int n = 0; n <= periods; ++n) {
        worst = std::max(worst, std::abs(be_state(n, n).real() - w[n] / total));
    }
    return worst;
}

struct PathOutcome {
    int up_count = 0;
    double terminal_price = 0.0;
    double weight = 0.0;
};

/// Visits all 2^N up/down paths with their risk-neutral probabilities.
template <class Visitor>
void for_each_path(const MarketParams& params, int periods, Visitor&& visit) {
    if (periods < 1 || periods > kPathCap) {
        throw std::invalid_argument("path enumeration needs 1 <= N <= " + std::to_string(kPathCap));
    }
    require_arbitrage_free(params);
    const double q = (params.rate() - params.down()) / (params.up() - params.down());
    for (std::uint64_t path = 0; path < (std::uint64_t{1} << periods); ++path) {
        PathOutcome out;
        out.terminal_price = params.stock_initial();
        out.weight = 1.0;
        for (int step = 0; step < periods; ++step) {
            if ((path >> step) & 1U) {
                ++out.up_count;
                out.terminal_price *= 1.0 + params.up();
                out.weight *= q;
            } else {
                out.terminal_price *= 1.0 + params.down();
                out.weight *= 1.0 - q;
            }
        }
        visit(out);
    }
}

template <class Payoff>
[[nodiscard]] double classical_path_enumeration_payoff(const MarketParams& params, int periods,
                                                       Payoff&& payoff) {
    double sum = 0.0;
    for_each_path(params, periods, [&](const PathOutcome& p) { sum += p.weight * payoff(p.terminal_price); });
    return sum / std::pow(1.0 + params.rate(), periods);
}

[[nodiscard]] inline double classical_path_enumeration(const MarketParams& params,
                                                       const CallSpec& spec, int periods) {
    return classical_path_enumeration_payoff(params, periods, CallPayoff{spec.strike()});
}

}  // namespace qbm::oracle
