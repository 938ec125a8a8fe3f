// bloch.hpp
// Two-level quantum states and observables in the Bloch representation.
//
// A density state is rho = (I + x sx + y sy + z sz) / 2. The identity
// coefficient is fixed to 1 because tr(rho) = 1 forces it, so only the Bloch
// vector is stored. An observable is R = m I + d . sigma with spectrum
// {m - |d|, m + |d|} = {low, high}.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

namespace qbm {

/// Construction tolerance shared by norm, orthonormality and membership checks.
inline constexpr double kTolerance = 1e-9;

struct BlochVector {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    [[nodiscard]] double norm() const { return std::sqrt(x * x + y * y + z * z); }

    [[nodiscard]] bool is_finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }

    friend constexpr BlochVector operator+(BlochVector l, BlochVector r) {
        return {l.x + r.x, l.y + r.y, l.z + r.z};
    }
    friend constexpr BlochVector operator-(BlochVector l, BlochVector r) {
        return {l.x - r.x, l.y - r.y, l.z - r.z};
    }
    friend constexpr BlochVector operator*(double s, BlochVector v) {
        return {s * v.x, s * v.y, s * v.z};
    }
    friend constexpr bool operator==(BlochVector, BlochVector) = default;
};

[[nodiscard]] constexpr double dot(BlochVector l, BlochVector r) {
    return l.x * r.x + l.y * r.y + l.z * r.z;
}

[[nodiscard]] constexpr BlochVector cross(BlochVector l, BlochVector r) {
    return {l.y * r.z - l.z * r.y, l.z * r.x - l.x * r.z, l.x * r.y - l.y * r.x};
}

/// Returns v / |v|; throws on a (numerically) zero vector.
[[nodiscard]] inline BlochVector normalized(BlochVector v) {
    const double n = v.norm();
    if (!(n > kTolerance)) {
        throw std::invalid_argument("cannot normalize a zero Bloch vector");
    }
    return (1.0 / n) * v;
}

namespace pauli {

inline Eigen::Matrix2cd identity() { return Eigen::Matrix2cd::Identity(); }

inline Eigen::Matrix2cd x() {
    Eigen::Matrix2cd m;
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

inline Eigen::Matrix2cd y() {
    using namespace std::complex_literals;
    Eigen::Matrix2cd m;
    m << 0.0, -1.0i, 1.0i, 0.0;
    return m;
}

inline Eigen::Matrix2cd z() {
    Eigen::Matrix2cd m;
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

/// Dense rendering of offset * I + v . sigma.
inline Eigen::Matrix2cd combine(double offset, BlochVector v) {
    return offset * identity() + v.x * x() + v.y * y() + v.z * z();
}

}  // namespace pauli

class DensityState {
public:
    [[nodiscard]] const BlochVector& bloch() const { return bloch_; }
    [[nodiscard]] double norm() const { return bloch_.norm(); }

    /// Smaller eigenvalue (1 - |r|) / 2.
    [[nodiscard]] double min_eigenvalue() const { return 0.5 * (1.0 - norm()); }
    /// Larger eigenvalue (1 + |r|) / 2.
    [[nodiscard]] double max_eigenvalue() const { return 0.5 * (1.0 + norm()); }

    [[nodiscard]] std::pair<double, double> eigenvalues() const {
        return {min_eigenvalue(), max_eigenvalue()};
    }

    [[nodiscard]] Eigen::Matrix2cd matrix() const { return 0.5 * pauli::combine(1.0, bloch_); }

private:
    explicit DensityState(BlochVector b) : bloch_(b) {}
    friend DensityState make_state(BlochVector bloch);

    BlochVector bloch_;
};

/// Builds a state from its Bloch vector. Norms up to 1 + kTolerance are
/// accepted (boundary states are pure and not faithful); anything longer has
/// a negative eigenvalue and is rejected.
[[nodiscard]] inline DensityState make_state(BlochVector bloch) {
    if (!bloch.is_finite()) {
        throw std::invalid_argument("Bloch vector has non-finite components");
    }
    const double n = bloch.norm();
    if (n > 1.0 + kTolerance) {
        throw std::invalid_argument("Bloch vector norm " + std::to_string(n) +
                                    " exceeds 1: not a density state");
    }
    return DensityState(bloch);
}

/// Strictly positive spectrum, i.e. |r| < 1 - tol.
[[nodiscard]] inline bool is_faithful(const DensityState& state) {
    return state.norm() < 1.0 - kTolerance;
}

class TwoLevelObservable {
public:
    [[nodiscard]] double low() const { return low_; }
    [[nodiscard]] double high() const { return high_; }
    /// Scaled direction (x0, y0, z0) with norm (high - low) / 2.
    [[nodiscard]] const BlochVector& direction() const { return direction_; }
    [[nodiscard]] BlochVector unit_direction() const {
        return (1.0 / half_spread()) * direction_;
    }
    [[nodiscard]] double offset() const { return 0.5 * (low_ + high_); }
    [[nodiscard]] double half_spread() const { return 0.5 * (high_ - low_); }

    [[nodiscard]] Eigen::Matrix2cd matrix() const { return pauli::combine(offset(), direction_); }

private:
    TwoLevelObservable(double low, double high, BlochVector direction)
        : low_(low), high_(high), direction_(direction) {}
    friend TwoLevelObservable make_observable(double, double, BlochVector);

    double low_;
    double high_;
    BlochVector direction_;
};

[[nodiscard]] inline TwoLevelObservable make_observable(double low, double high,
                                                        BlochVector unit_direction) {
    if (!std::isfinite(low) || !std::isfinite(high) || !(low < high)) {
        throw std::invalid_argument("observable requires low < high");
    }
    const double n = unit_direction.norm();
    if (!(n > kTolerance)) {
        throw std::invalid_argument("observable direction is zero");
    }
    if (std::abs(n - 1.0) > kTolerance) {
        throw std::invalid_argument("observable direction must be a unit vector");
    }
    const double half = 0.5 * (high - low);
    return TwoLevelObservable(low, high, (half / n) * unit_direction);
}

/// tr(rho R) in closed form: offset + r . d.
[[nodiscard]] inline double expectation(const DensityState& state, const TwoLevelObservable& obs) {
    return obs.offset() + dot(state.bloch(), obs.direction());
}

struct Eigenbasis {
    Eigen::Vector2cd up;    // eigenvector for the larger value
    Eigen::Vector2cd down;  // eigenvector for the smaller value
};

/// Eigenvectors of n . sigma for a unit direction n. Phases are fixed so the
/// first nonzero component of each vector is real and positive.
[[nodiscard]] inline Eigenbasis eigenbasis(BlochVector unit_direction) {
    const BlochVector n = normalized(unit_direction);
    const double c = std::sqrt(std::max(0.0, 0.5 * (1.0 + n.z)));  // cos(theta / 2)
    const double s = std::sqrt(std::max(0.0, 0.5 * (1.0 - n.z)));  // sin(theta / 2)
    const double rho = std::hypot(n.x, n.y);
    const std::complex<double> phase =
        rho > 0.0 ? std::complex<double>(n.x / rho, n.y / rho) : std::complex<double>(1.0, 0.0);

    Eigenbasis basis;
    if (c > 0.0) {
        basis.up << c, phase * s;
    } else {
        basis.up << 0.0, 1.0;
    }
    if (s > 0.0) {
        basis.down << s, -phase * c;
    } else {
        basis.down << 0.0, 1.0;
    }
    return basis;
}

[[nodiscard]] inline Eigenbasis eigenbasis(const TwoLevelObservable& obs) {
    return eigenbasis(obs.unit_direction());
}

}  // namespace qbm
