// pricing.hpp
// Closed-form option prices in the binomial market: single period (riskless
// portfolio and quantum trace form), N-period Maxwell-Boltzmann (the
// Cox-Ross-Rubinstein formula) and N-period Bose-Einstein.

#pragma once

#include "qbm/bloch.hpp"
#include "qbm/market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qbm {

enum class Model { classical, quantum_single, mb, be };

[[nodiscard]] inline std::string_view to_string(Model model) {
    switch (model) {
        case Model::classical: return "classical";
        case Model::quantum_single: return "quantum_single";
        case Model::mb: return "mb";
        case Model::be: return "be";
    }
    return "unknown";
}

[[nodiscard]] inline Model parse_model(std::string_view name) {
    if (name == "classical") return Model::classical;
    if (name == "quantum_single") return Model::quantum_single;
    if (name == "mb") return Model::mb;
    if (name == "be") return Model::be;
    throw std::invalid_argument("unknown model '" + std::string(name) + "'");
}

/// Option payoff at the two terminal states of a single period.
struct TwoPointPayoff {
    double at_down = 0.0;  // C_a
    double at_up = 0.0;    // C_b
};

inline void validate(const TwoPointPayoff& payoff) {
    if (!std::isfinite(payoff.at_down) || !std::isfinite(payoff.at_up) || payoff.at_down < 0.0 ||
        payoff.at_up < 0.0) {
        throw std::invalid_argument("two-point payoff must be finite and nonnegative");
    }
}

class CallSpec {
public:
    explicit CallSpec(double strike) : strike_(strike) {
        if (!std::isfinite(strike) || !(strike > 0.0)) {
            throw std::invalid_argument("strike must be positive");
        }
    }
    [[nodiscard]] double strike() const { return strike_; }

private:
    double strike_;
};

struct CallPayoff {
    double strike;
    double operator()(double terminal) const { return std::max(terminal - strike, 0.0); }
};

struct PutPayoff {
    double strike;
    double operator()(double terminal) const { return std::max(strike - terminal, 0.0); }
};

struct PricingResult {
    double price = 0.0;
    double discounted_by = 1.0;  // (1 + r)^-periods
    Model model = Model::classical;
    int periods = 1;
    std::optional<int> cutoff_tau;
};

[[nodiscard]] inline TwoPointPayoff call_two_point(const MarketParams& params, const CallSpec& spec) {
    const CallPayoff call{spec.strike()};
    return {call(params.stock_initial() * (1.0 + params.down())),
            call(params.stock_initial() * (1.0 + params.up()))};
}

[[nodiscard]] inline TwoPointPayoff put_two_point(const MarketParams& params, const CallSpec& spec) {
    const PutPayoff put{spec.strike()};
    return {put(params.stock_initial() * (1.0 + params.down())),
            put(params.stock_initial() * (1.0 + params.up()))};
}

/// q' = q (1 + b) / (1 + r), the up-mass under the stock numeraire.
[[nodiscard]] inline double risk_neutral_q_prime(const MarketParams& params) {
    return classical_risk_neutral_q(params) * (1.0 + params.up()) / (1.0 + params.rate());
}

/// Discounted risk-neutral expectation of a one-period payoff.
[[nodiscard]] inline PricingResult single_period_price(const MarketParams& params,
                                                       const TwoPointPayoff& payoff) {
    validate(payoff);
    const double q = classical_risk_neutral_q(params);
    const double discount = 1.0 / (1.0 + params.rate());
    PricingResult result;
    result.price = discount * (q * payoff.at_up + (1.0 - q) * payoff.at_down);
    result.discounted_by = discount;
    result.model = Model::classical;
    result.periods = 1;
    return result;
}

/// Trace form (1 + r)^-1 tr(rho H) for a state in the risk-neutral disk of
/// `obs`, where H = C_a |v><v| + C_b |u><u| is diagonal in R's eigenbasis.
[[nodiscard]] inline PricingResult single_period_trace_price(const MarketParams& params,
                                                             const TwoPointPayoff& payoff,
                                                             const DensityState& state,
                                                             const TwoLevelObservable& obs) {
    validate(payoff);
    const RiskNeutralDisk disk = risk_neutral_disk(params, obs);
    if (!disk_contains(disk, state, obs, params.rate())) {
        throw std::invalid_argument("state is not in the risk-neutral disk");
    }
    const double mean = 0.5 * (payoff.at_down + payoff.at_up);
    const double half = 0.5 * (payoff.at_up - payoff.at_down);
    const double trace = mean + half * dot(state.bloch(), obs.unit_direction());
    const double discount = 1.0 / (1.0 + params.rate());
    PricingResult result;
    result.price = discount * trace;
    result.discounted_by = discount;
    result.model = Model::quantum_single;
    result.periods = 1;
    return result;
}

/// Subjective price under the physical up-probability p. Agrees with
/// single_period_price only when p equals the risk-neutral q.
[[nodiscard]] inline double classical_expected_price(const ClassicalModel& model,
                                                     const TwoPointPayoff& payoff) {
    validate(payoff);
    const double p = model.up_probability();
    return (p * payoff.at_up + (1.0 - p) * payoff.at_down) / (1.0 + model.params().rate());
}

namespace detail {

inline double log_binomial_pmf(int j, int n, double log_p, double log_1mp) {
    return std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) + j * log_p +
           (n - j) * log_1mp;
}

inline void require_periods(int periods) {
    if (periods < 1) {
        throw std::invalid_argument("periods must be at least 1");
    }
}

}  // namespace detail

/// Psi(m; n, p) = sum_{j=m}^{n} C(n, j) p^j (1 - p)^(n - j).
///
/// Terms come from the ratio recurrence t_{j+1} = t_j (n - j) / (j + 1) * p / (1 - p),
/// seeded at the mode so that neither tail underflows the seed.
[[nodiscard]] inline double complementary_binomial(int m, int n, double p) {
    if (n < 0) {
        throw std::invalid_argument("complementary_binomial: n must be nonnegative");
    }
    if (m < 0 || m > n + 1) {
        throw std::invalid_argument("complementary_binomial: m must lie in [0, n + 1]");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("complementary_binomial: p must lie in [0, 1]");
    }
    if (m == 0) return 1.0;
    if (m == n + 1) return 0.0;
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;

    const int mode = std::clamp(static_cast<int>(std::floor((n + 1) * p)), 0, n);
    const double ratio = p / (1.0 - p);
    std::vector<double> terms(static_cast<std::size_t>(n) + 1, 0.0);
    terms[mode] = std::exp(detail::log_binomial_pmf(mode, n, std::log(p), std::log1p(-p)));
    for (int j = mode; j < n; ++j) {
        terms[j + 1] = terms[j] * (n - j) / (j + 1.0) * ratio;
    }
    for (int j = mode; j > 0; --j) {
        terms[j - 1] = terms[j] * j / (n - j + 1.0) / ratio;
    }
    double sum = 0.0;
    for (int j = n; j >= m; --j) {
        sum += terms[j];
    }
    return std::clamp(sum, 0.0, 1.0);
}

/// S0 (1 + b)^ups (1 + a)^(periods - ups).
[[nodiscard]] inline double terminal_price(const MarketParams& params, int ups, int periods) {
    return params.stock_initial() * std::pow(1.0 + params.up(), ups) *
           std::pow(1.0 + params.down(), periods - ups);
}

/// Smallest n in [0, periods] with S0 (1+b)^n (1+a)^(N-n) > K, or periods + 1.
[[nodiscard]] inline int crr_cutoff_tau(const MarketParams& params, const CallSpec& spec, int periods) {
    detail::require_periods(periods);
    for (int n = 0; n <= periods; ++n) {
        if (terminal_price(params, n, periods) > spec.strike()) {
            return n;
        }
    }
    return periods + 1;
}

/// Discounted binomial-weighted sum of a terminal payoff:
/// (1 + r)^-N sum_n C(N, n) q^n (1 - q)^(N - n) payoff(S0 (1+b)^n (1+a)^(N-n)).
template <class Payoff>
[[nodiscard]] PricingResult mb_explicit_sum(const MarketParams& params, Payoff&& payoff, int periods) {
    detail::require_periods(periods);
    const double q = classical_risk_neutral_q(params);
    const double log_q = std::log(q);
    const double log_1mq = std::log1p(-q);
    double sum = 0.0;
    for (int n = 0; n <= periods; ++n) {
        const double weight = std::exp(detail::log_binomial_pmf(n, periods, log_q, log_1mq));
        sum += weight * payoff(terminal_price(params, n, periods));
    }
    PricingResult result;
    result.discounted_by = std::pow(1.0 + params.rate(), -periods);
    result.price = result.discounted_by * sum;
    result.model = Model::mb;
    result.periods = periods;
    return result;
}

/// Cox-Ross-Rubinstein closed form S0 Psi(tau; N, q') - K (1 + r)^-N Psi(tau; N, q).
/// Cross-checked against mb_explicit_sum; a mismatch throws std::logic_error.
[[nodiscard]] inline PricingResult mb_price(const MarketParams& params, const CallSpec& spec,
                                            int periods) {
    detail::require_periods(periods);
    const double q = classical_risk_neutral_q(params);
    const double q_prime = risk_neutral_q_prime(params);
    const int tau = crr_cutoff_tau(params, spec, periods);
    const double discount = std::pow(1.0 + params.rate(), -periods);

    PricingResult result;
    result.price = params.stock_initial() * complementary_binomial(tau, periods, q_prime) -
                   spec.strike() * discount * complementary_binomial(tau, periods, q);
    result.price = std::max(result.price, 0.0);
    result.discounted_by = discount;
    result.model = Model::mb;
    result.periods = periods;
    result.cutoff_tau = tau;

    const double reference = mb_explicit_sum(params, CallPayoff{spec.strike()}, periods).price;
    if (std::abs(result.price - reference) > 1e-10 * std::max(1.0, params.stock_initial())) {
        throw std::logic_error("CRR closed form disagrees with the explicit binomial sum");
    }
    return result;
}

/// Normalized geometric weights q^n (1 - q)^(N - n) / sum_k q^k (1 - q)^(N - k).
[[nodiscard]] inline std::vector<double> be_weights(double q, int periods) {
    detail::require_periods(periods);
    if (!(q > 0.0 && q < 1.0)) {
        throw std::invalid_argument("be_weights: q must lie in (0, 1)");
    }
    const double log_q = std::log(q);
    const double log_1mq = std::log1p(-q);
    std::vector<double> weights(static_cast<std::size_t>(periods) + 1);
    double top = -std::numeric_limits<double>::infinity();
    for (int n = 0; n <= periods; ++n) {
        weights[n] = n * log_q + (periods - n) * log_1mq;
        top = std::max(top, weights[n]);
    }
    double total = 0.0;
    for (double& w : weights) {
        w = std::exp(w - top);
        total += w;
    }
    for (double& w : weights) {
        w /= total;
    }
    return weights;
}

template <class Payoff>
[[nodiscard]] PricingResult be_price_payoff(const MarketParams& params, Payoff&& payoff, int periods) {
    const std::vector<double> weights = be_weights(classical_risk_neutral_q(params), periods);
    double sum = 0.0;
    for (int n = 0; n <= periods; ++n) {
        sum += weights[n] * payoff(terminal_price(params, n, periods));
    }
    PricingResult result;
    result.discounted_by = std::pow(1.0 + params.rate(), -periods);
    result.price = result.discounted_by * sum;
    result.model = Model::be;
    result.periods = periods;
    return result;
}

/// Bose-Einstein call price: (1 + r)^-N sum_n w_n [S0 (1+b)^n (1+a)^(N-n) - K]^+.
[[nodiscard]] inline PricingResult be_price(const MarketParams& params, const CallSpec& spec,
                                            int periods) {
    PricingResult result = be_price_payoff(params, CallPayoff{spec.strike()}, periods);
    result.cutoff_tau = crr_cutoff_tau(params, spec, periods);
    return result;
}

struct SweepPoint {
    int periods = 0;
    double price = 0.0;
};

/// Prices for N = 1..max_periods with (a, b, r) held fixed per period. No
/// rescaling with N is performed, so there is no continuous-time limit here.
[[nodiscard]] inline std::vector<SweepPoint> convergence_sweep(const MarketParams& params,
                                                               const CallSpec& spec,
                                                               int max_periods, Model model) {
    detail::require_periods(max_periods);
    if (model != Model::mb && model != Model::be) {
        throw std::invalid_argument("sweep supports the mb and be models only");
    }
    std::vector<SweepPoint> points;
    points.reserve(static_cast<std::size_t>(max_periods));
    for (int n = 1; n <= max_periods; ++n) {
        const PricingResult r =
            model == Model::mb ? mb_price(params, spec, n) : be_price(params, spec, n);
        points.push_back({n, r.price});
    }
    return points;
}

}  // namespace qbm
