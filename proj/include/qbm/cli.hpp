// cli.hpp
// Run configuration and the four command bodies behind the `qbm` tool.
// Commands write results to `out`; dispatch() maps failures onto the exit-code
// contract (0 success, 1 verification failure, 2 invalid input).

#pragma once

#include "qbm/bloch.hpp"
#include "qbm/market.hpp"
#include "qbm/oracle.hpp"
#include "qbm/pricing.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qbm::cli {

using nlohmann::json;

enum class OutputFormat { table, csv, json };

[[nodiscard]] inline std::string_view to_string(OutputFormat f) {
    switch (f) {
        case OutputFormat::table: return "table";
        case OutputFormat::csv: return "csv";
        case OutputFormat::json: return "json";
    }
    return "unknown";
}

[[nodiscard]] inline OutputFormat parse_format(std::string_view name) {
    if (name == "table") return OutputFormat::table;
    if (name == "csv") return OutputFormat::csv;
    if (name == "json") return OutputFormat::json;
    throw std::invalid_argument("unknown output format '" + std::string(name) + "'");
}

/// Raw market inputs; validated only when a command builds MarketParams.
struct MarketInputs {
    double bond_initial = 1.0;
    double stock_initial = 100.0;
    double rate = 0.05;
    double down = -0.1;
    double up = 0.2;

    friend bool operator==(const MarketInputs&, const MarketInputs&) = default;
};

struct RunConfig {
    MarketInputs market;
    double strike = 100.0;
    int periods = 1;
    Model model = Model::mb;
    std::uint64_t seed = 42;
    int samples = 0;
    OutputFormat output_format = OutputFormat::table;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline void validate(const RunConfig& cfg) {
    if (cfg.periods < 1) throw std::invalid_argument("periods must be at least 1");
    if (cfg.samples < 0) throw std::invalid_argument("samples must be nonnegative");
}

[[nodiscard]] inline MarketParams market_params(const RunConfig& cfg) {
    const MarketInputs& m = cfg.market;
    return MarketParams(m.bond_initial, m.stock_initial, m.rate, m.down, m.up);
}

[[nodiscard]] inline json to_json(const RunConfig& cfg) {
    return json{{"market",
                 {{"bond_initial", cfg.market.bond_initial},
                  {"stock_initial", cfg.market.stock_initial},
                  {"rate", cfg.market.rate},
                  {"down", cfg.market.down},
                  {"up", cfg.market.up}}},
                {"strike", cfg.strike},
                {"periods", cfg.periods},
                {"model", std::string(to_string(cfg.model))},
                {"seed", cfg.seed},
                {"samples", cfg.samples},
                {"output_format", std::string(to_string(cfg.output_format))}};
}

/// Overlays the keys present in `j` onto `cfg`. Unknown keys are rejected.
inline void apply_json(RunConfig& cfg, const json& j) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "market") {
                if (!value.is_object()) throw std::invalid_argument("'market' must be an object");
                for (const auto& [mkey, mvalue] : value.items()) {
                    if (mkey == "bond_initial") cfg.market.bond_initial = mvalue.get<double>();
                    else if (mkey == "stock_initial") cfg.market.stock_initial = mvalue.get<double>();
                    else if (mkey == "rate") cfg.market.rate = mvalue.get<double>();
                    else if (mkey == "down") cfg.market.down = mvalue.get<double>();
                    else if (mkey == "up") cfg.market.up = mvalue.get<double>();
                    else throw std::invalid_argument("unknown config key 'market." + mkey + "'");
                }
            } else if (key == "strike") cfg.strike = value.get<double>();
            else if (key == "periods") cfg.periods = value.get<int>();
            else if (key == "model") cfg.model = parse_model(value.get<std::string>());
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "samples") cfg.samples = value.get<int>();
            else if (key == "output_format") cfg.output_format = parse_format(value.get<std::string>());
            else throw std::invalid_argument("unknown config key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("bad config value: ") + e.what());
    }
}

[[nodiscard]] inline RunConfig from_json(const json& j) {
    RunConfig cfg;
    apply_json(cfg, j);
    return cfg;
}

inline void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument("config file '" + path + "' is not valid JSON: " + e.what());
    }
    apply_json(cfg, j);
}

namespace detail {

inline std::string fixed(double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

/// Table output uses 6 decimals, CSV 10.
inline int digits_for(OutputFormat f) { return f == OutputFormat::csv ? 10 : 6; }

inline void table_row(std::ostream& out, std::string_view key, std::string_view value) {
    out << std::left << std::setw(14) << key << value << '\n';
}

inline void require_single_period(const RunConfig& cfg) {
    if (cfg.periods != 1) {
        throw std::invalid_argument("model '" + std::string(to_string(cfg.model)) +
                                    "' is single-period; use --periods 1");
    }
}

inline std::vector<BlochVector> random_directions(std::mt19937_64& rng, int count) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<BlochVector> dirs;
    dirs.reserve(static_cast<std::size_t>(count));
    while (static_cast<int>(dirs.size()) < count) {
        const BlochVector v{gauss(rng), gauss(rng), gauss(rng)};
        if (v.norm() > 1e-6) dirs.push_back(normalized(v));
    }
    return dirs;
}

}  // namespace detail

inline void cmd_price(const RunConfig& cfg, std::ostream& out) {
    validate(cfg);
    const MarketParams params = market_params(cfg);
    const CallSpec spec(cfg.strike);
    require_arbitrage_free(params);

    PricingResult result;
    std::optional<double> spread;
    switch (cfg.model) {
        case Model::classical:
            detail::require_single_period(cfg);
            result = single_period_price(params, call_two_point(params, spec));
            break;
        case Model::quantum_single: {
            detail::require_single_period(cfg);
            const TwoLevelObservable obs = default_observable(params);
            const RiskNeutralDisk disk = risk_neutral_disk(params, obs);
            const TwoPointPayoff payoff = call_two_point(params, spec);
            result = single_period_trace_price(params, payoff, make_state(disk.center()), obs);
            if (cfg.samples > 0) {
                double worst = 0.0;
                for (const DensityState& s : sample_disk(disk, static_cast<std::size_t>(cfg.samples), cfg.seed)) {
                    worst = std::max(worst, std::abs(single_period_trace_price(params, payoff, s, obs).price -
                                                     result.price));
                }
                spread = worst;
            }
            break;
        }
        case Model::mb: result = mb_price(params, spec, cfg.periods); break;
        case Model::be: result = be_price(params, spec, cfg.periods); break;
    }

    const double q = classical_risk_neutral_q(params);
    const double q_prime = risk_neutral_q_prime(params);
    const int digits = detail::digits_for(cfg.output_format);

    switch (cfg.output_format) {
        case OutputFormat::table:
            detail::table_row(out, "model", to_string(result.model));
            detail::table_row(out, "periods", std::to_string(result.periods));
            detail::table_row(out, "price", detail::fixed(result.price, digits));
            detail::table_row(out, "discount", detail::fixed(result.discounted_by, digits));
            detail::table_row(out, "q", detail::fixed(q, digits));
            detail::table_row(out, "q_prime", detail::fixed(q_prime, digits));
            if (result.cutoff_tau) detail::table_row(out, "tau", std::to_string(*result.cutoff_tau));
            if (spread) detail::table_row(out, "state_spread", detail::fixed(*spread, 15));
            break;
        case OutputFormat::csv:
            out << "model,periods,price,discount,q,q_prime,tau\n";
            out << to_string(result.model) << ',' << result.periods << ','
                << detail::fixed(result.price, digits) << ','
                << detail::fixed(result.discounted_by, digits) << ',' << detail::fixed(q, digits) << ','
                << detail::fixed(q_prime, digits) << ','
                << (result.cutoff_tau ? std::to_string(*result.cutoff_tau) : std::string()) << '\n';
            break;
        case OutputFormat::json: {
            json j{{"model", std::string(to_string(result.model))},
                   {"periods", result.periods},
                   {"price", result.price},
                   {"discount", result.discounted_by},
                   {"q", q},
                   {"q_prime", q_prime}};
            j["tau"] = result.cutoff_tau ? json(*result.cutoff_tau) : json(nullptr);
            if (spread) j["state_spread"] = *spread;
            out << j.dump(2) << '\n';
            break;
        }
    }
}

inline void cmd_disk(const RunConfig& cfg, std::ostream& out) {
    validate(cfg);
    const MarketParams params = market_params(cfg);
    const TwoLevelObservable obs = default_observable(params);
    const RiskNeutralDisk disk = risk_neutral_disk(params, obs);

    std::vector<DensityState> samples;
    if (cfg.samples > 0) {
        samples = sample_disk(disk, static_cast<std::size_t>(cfg.samples), cfg.seed);
        for (const DensityState& s : samples) {
            if (!disk_contains(disk, s, obs, params.rate())) {
                throw std::logic_error("sampled state failed the tr(rho R) = r re-check");
            }
        }
    }

    const int digits = detail::digits_for(cfg.output_format);
    const auto triple = [&](BlochVector v) {
        return detail::fixed(v.x, digits) + ',' + detail::fixed(v.y, digits) + ',' +
               detail::fixed(v.z, digits);
    };

    switch (cfg.output_format) {
        case OutputFormat::table:
            detail::table_row(out, "radius", detail::fixed(disk.radius, digits));
            detail::table_row(out, "plane_offset", detail::fixed(disk.plane_offset, digits));
            detail::table_row(out, "normal", triple(disk.normal));
            if (!samples.empty()) {
                out << "x,y,z\n";
                for (const DensityState& s : samples) out << triple(s.bloch()) << '\n';
            }
            break;
        case OutputFormat::csv:
            if (samples.empty()) {
                out << "radius,plane_offset,normal_x,normal_y,normal_z\n";
                out << detail::fixed(disk.radius, digits) << ',' << detail::fixed(disk.plane_offset, digits)
                    << ',' << triple(disk.normal) << '\n';
            } else {
                out << "x,y,z\n";
                for (const DensityState& s : samples) out << triple(s.bloch()) << '\n';
            }
            break;
        case OutputFormat::json: {
            json rows = json::array();
            for (const DensityState& s : samples) rows.push_back({s.bloch().x, s.bloch().y, s.bloch().z});
            const json j{{"radius", disk.radius},
                         {"plane_offset", disk.plane_offset},
                         {"normal", {disk.normal.x, disk.normal.y, disk.normal.z}},
                         {"samples", rows}};
            out << j.dump(2) << '\n';
            break;
        }
    }
}

struct VerifyOptions {
    /// Added to the CRR closed form before comparison; test hook for the
    /// failure path.
    double inject_fault = 0.0;
};

struct IdentityCheck {
    std::string name;
    double deviation = 0.0;
};

inline constexpr double kVerifyThreshold = 1e-10;

/// Runs the oracle agreement checks at N = cfg.periods and returns the max
/// absolute deviation of each identity.
[[nodiscard]] inline std::vector<IdentityCheck> run_identity_checks(const RunConfig& cfg,
                                                                   const VerifyOptions& opts = {}) {
    validate(cfg);
    oracle::require_dense_cap(cfg.periods);
    const int n_periods = cfg.periods;
    const MarketParams params = market_params(cfg);
    require_arbitrage_free(params);
    const CallSpec spec(cfg.strike);

    std::mt19937_64 rng(cfg.seed);
    const std::vector<BlochVector> dirs = detail::random_directions(rng, n_periods);
    std::vector<DensityState> states;
    for (const BlochVector& d : dirs) {
        const TwoLevelObservable obs = make_observable(params.down(), params.up(), d);
        states.push_back(sample_disk(risk_neutral_disk(params, obs), 1, rng()).front());
    }

    const double q = classical_risk_neutral_q(params);
    std::vector<IdentityCheck> checks;

    {
        const std::vector<double> weights = oracle::mb_weights(states, dirs);
        double worst = 0.0;
        double binom = 1.0;  // C(N, n), built incrementally
        for (int n = 0; n <= n_periods; ++n) {
            if (n > 0) binom = binom * (n_periods - n + 1) / n;
            const double expected = binom * std::pow(q, n) * std::pow(1.0 - q, n_periods - n);
            worst = std::max(worst, std::abs(weights[n] - expected));
        }
        checks.push_back({"mb_weight_identity", worst});
    }

    const int tau = crr_cutoff_tau(params, spec, n_periods);
    const double closed = params.stock_initial() *
                              complementary_binomial(tau, n_periods, risk_neutral_q_prime(params)) -
                          spec.strike() * std::pow(1.0 + params.rate(), -n_periods) *
                              complementary_binomial(tau, n_periods, q) +
                          opts.inject_fault;
    const double explicit_sum = mb_explicit_sum(params, CallPayoff{spec.strike()}, n_periods).price;
    checks.push_back({"crr_vs_explicit_sum", std::abs(closed - explicit_sum)});
    checks.push_back({"crr_vs_path_enumeration",
                      std::abs(closed - oracle::classical_path_enumeration(params, spec, n_periods))});
    checks.push_back({"crr_vs_dense_trace",
                      std::abs(closed - oracle::oracle_price_mb(params, states, dirs, spec))});

    const TwoLevelObservable obs = default_observable(params);
    const DensityState center = make_state(risk_neutral_disk(params, obs).center());
    checks.push_back({"be_vs_symmetric_oracle",
                      std::abs(be_price(params, spec, n_periods).price -
                               oracle::oracle_price_be(params, center, spec, n_periods, obs))});
    return checks;
}

/// Returns 0 when every identity holds below kVerifyThreshold, 1 otherwise.
inline int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err,
                      const VerifyOptions& opts = {}) {
    const std::vector<IdentityCheck> checks = run_identity_checks(cfg, opts);
    bool ok = true;
    for (const IdentityCheck& c : checks) ok = ok && c.deviation < kVerifyThreshold;

    const auto status = [](const IdentityCheck& c) { return c.deviation < kVerifyThreshold ? "ok" : "FAIL"; };
    switch (cfg.output_format) {
        case OutputFormat::table:
            out << std::left << std::setw(26) << "identity" << std::setw(24) << "max_abs_deviation"
                << "status\n";
            for (const IdentityCheck& c : checks) {
                std::ostringstream d;
                d << std::scientific << std::setprecision(6) << c.deviation;
                out << std::left << std::setw(26) << c.name << std::setw(24) << d.str() << status(c) << '\n';
            }
            break;
        case OutputFormat::csv:
            out << "identity,max_abs_deviation,status\n";
            for (const IdentityCheck& c : checks) {
                out << c.name << ',' << std::scientific << std::setprecision(6) << c.deviation
                    << std::defaultfloat << ',' << status(c) << '\n';
            }
            break;
        case OutputFormat::json: {
            json rows = json::array();
            for (const IdentityCheck& c : checks) {
                rows.push_back({{"identity", c.name}, {"max_abs_deviation", c.deviation}, {"ok", c.deviation < kVerifyThreshold}});
            }
            out << json{{"periods", cfg.periods}, {"threshold", kVerifyThreshold}, {"checks", rows}, {"ok", ok}}.dump(2)
                << '\n';
            break;
        }
    }
    for (const IdentityCheck& c : checks) {
        if (!(c.deviation < kVerifyThreshold)) {
            err << "verification failed: " << c.name << " deviation " << std::scientific << c.deviation << '\n';
        }
    }
    return ok ? 0 : 1;
}

inline void cmd_sweep(const RunConfig& cfg, std::ostream& out) {
    validate(cfg);
    const MarketParams params = market_params(cfg);
    const CallSpec spec(cfg.strike);
    require_arbitrage_free(params);
    const std::vector<SweepPoint> points = convergence_sweep(params, spec, cfg.periods, cfg.model);

    if (cfg.output_format == OutputFormat::json) {
        json rows = json::array();
        for (const SweepPoint& p : points) {
            rows.push_back({{"periods", p.periods}, {"model", std::string(to_string(cfg.model))}, {"price", p.price}});
        }
        out << rows.dump(2) << '\n';
        return;
    }
    const int digits = detail::digits_for(cfg.output_format);
    out << "periods,model,price\n";
    for (const SweepPoint& p : points) {
        out << p.periods << ',' << to_string(cfg.model) << ',' << detail::fixed(p.price, digits) << '\n';
    }
}

enum class Command { price, disk, verify, sweep };

/// Runs a command and maps outcomes to exit codes: invalid input (including
/// arbitrage and oracle caps) is 2, identity failures and internal
/// consistency errors are 1.
inline int dispatch(Command command, const RunConfig& cfg, std::ostream& out, std::ostream& err,
                    const VerifyOptions& opts = {}) {
    try {
        switch (command) {
            case Command::price: cmd_price(cfg, out); return 0;
            case Command::disk: cmd_disk(cfg, out); return 0;
            case Command::verify: return cmd_verify(cfg, out, err, opts);
            case Command::sweep: cmd_sweep(cfg, out); return 0;
        }
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace qbm::cli
