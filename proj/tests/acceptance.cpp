// Acceptance run: one [PASS]/[FAIL] line per criterion. Exit status is
// nonzero if any criterion fails.

#include "qbm/cli.hpp"
#include "qbm/oracle.hpp"
#include "qbm/pricing.hpp"

#include "support/reference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace qbm;

namespace {

struct Report {
    int failures = 0;

    void line(const std::string& id, bool ok, const std::string& detail) {
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << id << "  " << detail << '\n';
        if (!ok) ++failures;
    }
};

std::string sci(double v) {
    std::ostringstream s;
    s << std::scientific;
    s.precision(3);
    s << v;
    return s.str();
}

std::string fix(double v, int digits = 9) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(digits);
    s << v;
    return s.str();
}

double binomial_pmf(int n, int k, double q) { return ref::pascal(n, k) * std::pow(q, k) * std::pow(1 - q, n - k); }

MarketParams reference_market() { return MarketParams(1.0, 100.0, 0.05, -0.1, 0.2); }

// Worked-example targets for the reference market (S0 = K = 100).
constexpr double kSinglePeriodTarget = 9.523810;
constexpr double kMbTwoPeriodTarget = 13.605442;
constexpr double kBeTwoPeriodTarget = 15.721916;
constexpr double kWorkedTolerance = 1e-6;

void ac1(Report& rep) {
    ref::Generator gen(1001);
    double worst = 0.0;
    for (int n = 1; n <= 8; ++n) {
        for (int set = 0; set < 20; ++set) {
            const MarketParams p = gen.market();
            const double q = classical_risk_neutral_q(p);
            std::vector<BlochVector> dirs;
            std::vector<DensityState> states;
            for (int j = 0; j < n; ++j) {
                dirs.push_back(gen.unit_vector());
                states.push_back(gen.disk_state(p, dirs.back()));
            }
            for (int k = 0; k <= n; ++k) {
                worst = std::max(worst, std::abs(oracle::mb_weight(states, dirs, k) - binomial_pmf(n, k, q)));
            }
        }
    }
    rep.line("AC1", worst < 1e-10, "MB path weights vs binomial pmf, N=1..8 x 20 sets: max dev " + sci(worst));
}

void ac2(Report& rep) {
    ref::Generator gen(1002);
    double worst = 0.0;
    for (int set = 0; set < 50; ++set) {
        const MarketParams p = gen.market();
        const CallSpec k(p.stock_initial() * gen.uniform(0.5, 1.5));
        for (int n = 1; n <= 10; ++n) {
            const double closed = mb_price(p, k, n).price;
            const double sum = mb_explicit_sum(p, CallPayoff{k.strike()}, n).price;
            const double paths = oracle::classical_path_enumeration(p, k, n);
            worst = std::max({worst, std::abs(closed - sum), std::abs(closed - paths)});
        }
    }
    rep.line("AC2", worst < 1e-10, "CRR closed form = explicit sum = path enumeration, 50 sets: max dev " + sci(worst));
}

void ac3(Report& rep) {
    const MarketParams p = reference_market();
    const CallSpec k(100.0);
    const double single = single_period_price(p, call_two_point(p, k)).price;
    const double mb = mb_price(p, k, 2).price;
    const double be = be_price(p, k, 2).price;
    const bool ok_single = std::abs(single - kSinglePeriodTarget) <= kWorkedTolerance;
    const bool ok_mb = std::abs(mb - kMbTwoPeriodTarget) <= kWorkedTolerance;
    const bool ok_be = std::abs(be - kBeTwoPeriodTarget) <= kWorkedTolerance;
    rep.line("AC3", ok_single && ok_mb && ok_be,
             "single " + fix(single) + " (target " + fix(kSinglePeriodTarget, 6) + ") " + (ok_single ? "ok" : "off") +
                 "; MB N=2 " + fix(mb) + " (target " + fix(kMbTwoPeriodTarget, 6) + ") " + (ok_mb ? "ok" : "off") +
                 "; BE N=2 " + fix(be) + " (target " + fix(kBeTwoPeriodTarget, 6) + ") " + (ok_be ? "ok" : "off"));
}

void ac4(Report& rep) {
    const double a = -0.1, b = 0.2;
    const auto disk_at = [&](double r) {
        const MarketParams p(1.0, 100.0, r, a, b);
        return risk_neutral_disk(p, default_observable(p));
    };
    double worst = 0.0;
    for (int i = 1; i <= 100; ++i) {
        const double r = a + (b - a) * i / 101.0;
        const double t = (2 * r - a - b) / (b - a);
        worst = std::max(worst, std::abs(disk_at(r).radius - std::sqrt(1 - t * t)));
    }
    const double near_a = disk_at(a + 1e-12).radius;
    const double near_b = disk_at(b - 1e-12).radius;
    const bool vanishes = near_a < 1e-5 && near_b < 1e-5;

    bool fails_exactly = true;
    for (double r : {a - 0.05, a, b, b + 0.05}) {
        try {
            (void)disk_at(r);
            fails_exactly = false;
        } catch (const ArbitrageError&) {
        }
    }
    const double mid = disk_at(0.5 * (a + b)).radius;
    const bool ok = worst < 1e-12 && vanishes && fails_exactly && std::abs(mid - 1.0) < 1e-12;
    rep.line("AC4", ok,
             "radius vs closed form max dev " + sci(worst) + "; edge radii " + sci(near_a) + ", " + sci(near_b) +
                 "; rejects r<=a, r>=b: " + (fails_exactly ? "yes" : "no") + "; midpoint radius " + fix(mid, 15));
}

void ac5(Report& rep) {
    const MarketParams p = reference_market();
    const TwoLevelObservable obs = default_observable(p);
    const TwoPointPayoff payoff = call_two_point(p, CallSpec(100.0));
    const double expected = single_period_price(p, payoff).price;
    double lo = INFINITY, hi = -INFINITY, worst = 0.0;
    for (const DensityState& s : sample_disk(risk_neutral_disk(p, obs), 100, 1005)) {
        const double v = single_period_trace_price(p, payoff, s, obs).price;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        worst = std::max(worst, std::abs(v - expected));
    }
    rep.line("AC5", (hi - lo) < 1e-12 && worst < 1e-12,
             "100 disk states: spread " + sci(hi - lo) + ", max dev from two-point price " + sci(worst));
}

void ac6(Report& rep) {
    ref::Generator gen(1006);
    double worst = 0.0;
    for (int n = 1; n <= 6; ++n) {
        const MarketParams p = gen.market();
        const CallSpec k(p.stock_initial() * gen.uniform(0.7, 1.3));
        std::vector<double> prices;
        for (int assignment = 0; assignment < 10; ++assignment) {
            std::vector<BlochVector> dirs;
            std::vector<DensityState> states;
            for (int j = 0; j < n; ++j) {
                dirs.push_back(gen.unit_vector());
                states.push_back(gen.disk_state(p, dirs.back()));
            }
            prices.push_back(oracle::oracle_price_mb(p, states, dirs, k));
        }
        const auto [mn, mx] = std::minmax_element(prices.begin(), prices.end());
        worst = std::max(worst, *mx - *mn);
    }
    rep.line("AC6", worst < 1e-12, "MB dense price spread over 10 direction assignments, N<=6: " + sci(worst));
}

void ac7(Report& rep) {
    ref::Generator gen(1007);
    double worst = 0.0;
    for (int n = 1; n <= 10; ++n) {
        for (int set = 0; set < 3; ++set) {
            const MarketParams p = gen.market();
            const TwoLevelObservable obs = make_observable(p.down(), p.up(), gen.unit_vector());
            const DensityState center = make_state(risk_neutral_disk(p, obs).center());
            const CallSpec k(p.stock_initial() * gen.uniform(0.6, 1.4));
            worst = std::max(worst, std::abs(be_price(p, k, n).price - oracle::oracle_price_be(p, center, k, n, obs)));
        }
    }
    rep.line("AC7", worst < 1e-10, "BE closed form vs symmetric-subspace oracle, N<=10: max dev " + sci(worst));
}

void ac8(Report& rep) {
    ref::Generator gen(1008);
    double worst = 0.0;
    bool q_prime_inside = true;
    for (int set = 0; set < 200; ++set) {
        const MarketParams p = gen.market();
        const double q = classical_risk_neutral_q(p);
        const double qp = risk_neutral_q_prime(p);
        const double a = p.down(), b = p.up(), r = p.rate();
        worst = std::max(worst, std::abs(q * (1 + b) + (1 - q) * (1 + a) - (1 + r)));
        worst = std::max(worst, std::abs((1 - qp) - (1 - q) * (1 + a) / (1 + r)));
        q_prime_inside = q_prime_inside && qp > 0.0 && qp < 1.0;

        const double k = p.stock_initial() * gen.uniform(0.5, 1.5);
        const int n = 1 + set % 10;
        const double call = mb_price(p, CallSpec(k), n).price;
        const double put = mb_explicit_sum(p, PutPayoff{k}, n).price;
        const double parity = p.stock_initial() - k * std::pow(1 + r, -n);
        worst = std::max(worst, std::abs(call - put - parity));
    }
    rep.line("AC8", worst < 1e-10 && q_prime_inside,
             "q/q' identities and put-call parity, 200 sets: max dev " + sci(worst) + "; 0<q'<1: " +
                 (q_prime_inside ? "yes" : "no"));
}

struct Shell {
    int code = -1;
    std::string out;
};

Shell shell(const std::string& args) {
    const std::string cmd = std::string(QBM_CLI_PATH) + " " + args + " 2>/dev/null";
    Shell s;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (pipe == nullptr) return s;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe) != nullptr) s.out += buf.data();
    const int status = ::pclose(pipe);
    s.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return s;
}

double json_number(const std::string& text, const char* key) {
    try {
        return cli::json::parse(text).at(key).get<double>();
    } catch (const std::exception&) {
        return NAN;
    }
}

void ac9(Report& rep) {
    std::vector<std::string> problems;
    const auto expect_price = [&](const std::string& args, double target, const char* label) {
        const Shell s = shell("price " + args + " --format json");
        const double v = json_number(s.out, "price");
        if (s.code != 0 || !(std::abs(v - target) <= kWorkedTolerance)) {
            problems.push_back(std::string(label) + "=" + fix(v) + " exit " + std::to_string(s.code));
        }
    };
    expect_price("--model classical --periods 1", kSinglePeriodTarget, "price classical");
    expect_price("--model quantum_single --periods 1", kSinglePeriodTarget, "price quantum_single");
    expect_price("--model mb --periods 2", kMbTwoPeriodTarget, "price mb");
    expect_price("--model be --periods 2", kBeTwoPeriodTarget, "price be");

    const Shell disk = shell("disk --format json");
    if (disk.code != 0 || std::abs(json_number(disk.out, "radius") - 1.0) > 1e-12) {
        problems.push_back("disk exit " + std::to_string(disk.code));
    }

    for (const char* model : {"mb", "be"}) {
        const double target = std::string(model) == "mb" ? kMbTwoPeriodTarget : kBeTwoPeriodTarget;
        const Shell sweep = shell(std::string("sweep --model ") + model + " --periods 2 --format csv");
        const std::string prefix = std::string("2,") + model + ",";
        const auto at = sweep.out.find(prefix);
        const double v = at == std::string::npos ? NAN : std::stod(sweep.out.substr(at + prefix.size()));
        if (sweep.code != 0 || !(std::abs(v - target) <= kWorkedTolerance)) {
            problems.push_back(std::string("sweep ") + model + "=" + fix(v) + " exit " + std::to_string(sweep.code));
        }
    }

    const int verify_ok = shell("verify --periods 6").code;
    const int verify_fault = shell("verify --periods 6 --inject-fault 1e-6").code;
    const int arbitrage = shell("price --r 0.3").code;
    const int cap = shell("verify --periods 13").code;
    if (verify_ok != 0) problems.push_back("verify exit " + std::to_string(verify_ok));
    if (verify_fault != 1) problems.push_back("injected fault exit " + std::to_string(verify_fault));
    if (arbitrage != 2) problems.push_back("arbitrage exit " + std::to_string(arbitrage));
    if (cap != 2) problems.push_back("dense cap exit " + std::to_string(cap));

    std::string detail = "price/disk/verify/sweep on reference market, exit codes 0/1/2";
    for (const std::string& p : problems) detail += "; " + p;
    rep.line("AC9", problems.empty(), detail);
}

}  // namespace

int main() {
    Report rep;
    const std::array<void (*)(Report&), 9> criteria{ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9};
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        try {
            criteria[i](rep);
        } catch (const std::exception& e) {
            rep.line("AC" + std::to_string(i + 1), false, std::string("threw: ") + e.what());
        }
    }
    std::cout << (rep.failures == 0 ? "all criteria passed" : std::to_string(rep.failures) + " criteria failed")
              << '\n';
    return rep.failures == 0 ? 0 : 1;
}
