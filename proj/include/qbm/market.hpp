// market.hpp
// One-period binomial market (bond + stock), its arbitrage thresholds, the
// classical risk-neutral measure and the quantum risk-neutral disk.

#pragma once

#include "qbm/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qbm {

/// Input that admits an arbitrage (down < rate < up violated). Subclass of
/// invalid_argument so callers can treat it like any other bad input.
class ArbitrageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class MarketParams {
public:
    /// Structural checks only: B0, S0 > 0, r > -1, -1 <= a < b.
    /// Arbitrage-freeness is queried separately with is_arbitrage_free().
    MarketParams(double bond_initial, double stock_initial, double rate, double down, double up)
        : bond_initial_(bond_initial),
          stock_initial_(stock_initial),
          rate_(rate),
          down_(down),
          up_(up) {
        if (!std::isfinite(bond_initial) || !(bond_initial > 0.0)) {
            throw std::invalid_argument("bond_initial must be positive");
        }
        if (!std::isfinite(stock_initial) || !(stock_initial > 0.0)) {
            throw std::invalid_argument("stock_initial must be positive");
        }
        if (!std::isfinite(rate) || !(rate > -1.0)) {
            throw std::invalid_argument("rate must exceed -1");
        }
        if (!std::isfinite(down) || !std::isfinite(up)) {
            throw std::invalid_argument("down/up must be finite");
        }
        if (down < -1.0) {
            throw std::invalid_argument("a < -1: stock price would go negative");
        }
        if (!(down < up)) {
            throw std::invalid_argument("a >= b: down return must be below up return");
        }
    }

    [[nodiscard]] double bond_initial() const { return bond_initial_; }
    [[nodiscard]] double stock_initial() const { return stock_initial_; }
    [[nodiscard]] double rate() const { return rate_; }
    [[nodiscard]] double down() const { return down_; }
    [[nodiscard]] double up() const { return up_; }

private:
    double bond_initial_;
    double stock_initial_;
    double rate_;
    double down_;
    double up_;
};

[[nodiscard]] inline bool is_arbitrage_free(const MarketParams& params) {
    return params.down() < params.rate() && params.rate() < params.up();
}

/// Throws ArbitrageError naming the violated threshold.
inline void require_arbitrage_free(const MarketParams& params) {
    if (!(params.rate() > params.down())) {
        throw ArbitrageError("r <= a: arbitrage");
    }
    if (!(params.rate() < params.up())) {
        throw ArbitrageError("r >= b: arbitrage");
    }
}

/// B_n = B0 (1 + r)^n.
[[nodiscard]] inline double bank_value(const MarketParams& params, int n) {
    if (n < 0) {
        throw std::invalid_argument("period index must be nonnegative");
    }
    return params.bond_initial() * std::pow(1.0 + params.rate(), n);
}

/// Classical Bernoulli model: the market plus a subjective up-probability p.
/// p is allowed on the closed interval [0, 1] so certain moves can be priced.
class ClassicalModel {
public:
    ClassicalModel(MarketParams params, double up_probability)
        : params_(params), up_probability_(up_probability) {
        if (!(up_probability >= 0.0 && up_probability <= 1.0)) {
            throw std::invalid_argument("up_probability must lie in [0, 1]");
        }
    }

    [[nodiscard]] const MarketParams& params() const { return params_; }
    [[nodiscard]] double up_probability() const { return up_probability_; }

private:
    MarketParams params_;
    double up_probability_;
};

/// Unique classical risk-neutral up-mass q = (r - a) / (b - a).
[[nodiscard]] inline double classical_risk_neutral_q(const MarketParams& params) {
    require_arbitrage_free(params);
    return (params.rate() - params.down()) / (params.up() - params.down());
}

/// Observable R built on the z-axis: diagonal in the canonical basis.
[[nodiscard]] inline TwoLevelObservable default_observable(const MarketParams& params) {
    return make_observable(params.down(), params.up(), {0.0, 0.0, 1.0});
}

/// The open disk {r : |r| < 1, r . n = plane_offset} of faithful states with
/// tr(rho R) = rate.
struct RiskNeutralDisk {
    BlochVector normal;
    double plane_offset = 0.0;
    double radius = 0.0;
    bool open = true;

    [[nodiscard]] BlochVector center() const { return plane_offset * normal; }
};

[[nodiscard]] inline RiskNeutralDisk risk_neutral_disk(const MarketParams& params,
                                                      const TwoLevelObservable& obs) {
    if (std::abs(obs.low() - params.down()) > kTolerance ||
        std::abs(obs.high() - params.up()) > kTolerance) {
        throw std::invalid_argument("observable spectrum does not match the market's (a, b)");
    }
    const double offset = (params.rate() - obs.offset()) / obs.half_spread();
    if (!(std::abs(offset) < 1.0)) {
        require_arbitrage_free(params);
        throw ArbitrageError("empty risk-neutral disk");
    }
    RiskNeutralDisk disk;
    disk.normal = obs.unit_direction();
    disk.plane_offset = offset;
    disk.radius = std::sqrt(1.0 - offset * offset);
    return disk;
}

/// Faithful and on the plane tr(rho R) = rate, both to within kTolerance.
[[nodiscard]] inline bool disk_contains(const RiskNeutralDisk& disk, const DensityState& state,
                                        const TwoLevelObservable& obs, double rate) {
    if (!is_faithful(state)) {
        return false;
    }
    if (std::abs(expectation(state, obs) - rate) >= kTolerance) {
        return false;
    }
    return std::abs(dot(state.bloch(), disk.normal) - disk.plane_offset) < kTolerance;
}

namespace detail {

/// Two unit vectors spanning the plane orthogonal to `normal`.
inline std::pair<BlochVector, BlochVector> plane_basis(BlochVector normal) {
    const BlochVector n = normalized(normal);
    const BlochVector helper = std::abs(n.x) <= std::abs(n.y) && std::abs(n.x) <= std::abs(n.z)
                                   ? BlochVector{1.0, 0.0, 0.0}
                                   : (std::abs(n.y) <= std::abs(n.z) ? BlochVector{0.0, 1.0, 0.0}
                                                                     : BlochVector{0.0, 0.0, 1.0});
    const BlochVector e1 = normalized(helper - dot(helper, n) * n);
    return {e1, cross(n, e1)};
}

}  // namespace detail

/// Uniform samples over the open disk, deterministic for a given seed.
///
/// The in-plane radius is capped so every sample is faithful under
/// kTolerance: at most radius * (1 - 1e-12), and never so far out that
/// |r| reaches 1 - 2 kTolerance. Disks too thin to hold any such state
/// (radius below ~6e-5) are rejected.
[[nodiscard]] inline std::vector<DensityState> sample_disk(const RiskNeutralDisk& disk,
                                                           std::size_t count,
                                                           std::uint64_t seed) {
    if (!(disk.radius > 0.0)) {
        throw std::invalid_argument("cannot sample an empty disk");
    }
    const double max_norm = 1.0 - 2.0 * kTolerance;
    const double offset_sq = disk.plane_offset * disk.plane_offset;
    if (!(max_norm * max_norm > offset_sq)) {
        throw std::invalid_argument("disk too thin to contain tolerance-faithful states");
    }
    const double limit =
        std::min(disk.radius * (1.0 - 1e-12), std::sqrt(max_norm * max_norm - offset_sq));

    const auto [e1, e2] = detail::plane_basis(disk.normal);
    const BlochVector center = disk.center();

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<DensityState> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double rho = limit * std::sqrt(unit(rng));
        const double phi = 2.0 * std::numbers::pi * unit(rng);
        out.push_back(make_state(center + (rho * std::cos(phi)) * e1 + (rho * std::sin(phi)) * e2));
    }
    return out;
}

}  // namespace qbm
