#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "linalg.hpp"

namespace latstab {

/// Bicycle-model constants plus the (constant) operating speed. SI units:
/// m [kg], iz [kg m^2], cf/cr [N/rad], a/b [m], vx [m/s]. All strictly positive.
struct VehicleParams {
    double m = 0.0;   // mass
    double iz = 0.0;  // yaw inertia
    double cf = 0.0;  // front cornering stiffness
    double cr = 0.0;  // rear cornering stiffness
    double a = 0.0;   // CG to front axle
    double b = 0.0;   // CG to rear axle
    double vx = 0.0;  // longitudinal speed

    void validate() const {
        if (!(m > 0.0) || !(iz > 0.0) || !(cf > 0.0) || !(cr > 0.0) || !(a > 0.0) ||
            !(b > 0.0) || !(vx > 0.0))
            throw std::invalid_argument("VehicleParams: all parameters must be strictly positive");
    }
};

/// Second-order error-dynamics matrices. M is diagonal, C symmetric, L has a
/// zero first column; B maps steering, F maps path heading rate.
struct SystemMatrices {
    Mat2 M, C, L;
    Vec2 B, F;
    double vx = 0.0;  // speed the matrices were built with
};

/// Path-relative tracking error and its arc-length derivatives.
/// lat [m], heading [rad], lat_prime [-], heading_prime [rad/m].
struct ErrorState {
    double lat = 0.0;
    double heading = 0.0;
    double lat_prime = 0.0;
    double heading_prime = 0.0;

    Vec2 e() const { return {lat, heading}; }
    Vec2 e_prime() const { return {lat_prime, heading_prime}; }
};

// Heading errors beyond this magnitude leave the small-angle regime the model
// assumes; callers flag it as a diagnostic, never an error.
inline constexpr double kSmallAngleLimitRad = 0.3;

inline SystemMatrices build_matrices(const VehicleParams& p) {
    p.validate();
    SystemMatrices s;
    s.vx = p.vx;
    s.M(0, 0) = p.m;
    s.M(1, 1) = p.iz;
    const double cross = (p.a * p.cf - p.b * p.cr) / p.vx;
    s.C(0, 0) = (p.cf + p.cr) / p.vx;
    s.C(0, 1) = cross;
    s.C(1, 0) = cross;
    s.C(1, 1) = (p.a * p.a * p.cf + p.b * p.b * p.cr) / p.vx;
    s.L(0, 0) = 0.0;
    s.L(0, 1) = -(p.cf + p.cr);
    s.L(1, 0) = 0.0;
    s.L(1, 1) = -(p.a * p.cf - p.b * p.cr);
    s.B = {p.cf, p.a * p.cf};
    s.F = {p.m * p.vx * p.vx + p.a * p.cf - p.b * p.cr, p.a * p.a * p.cf + p.b * p.b * p.cr};
    return s;
}

/// Right-hand side of the arc-length error dynamics: returns e'' from
///   vx^2 M e'' + vx C e' + L e = B u - F heading_prime.
/// M is diagonal positive, so the solve is explicit.
inline Vec2 error_accel(const SystemMatrices& s, const ErrorState& st, double u,
                        double heading_prime) {
    const Vec2 rhs = u * s.B - heading_prime * s.F - s.vx * (s.C * st.e_prime()) - s.L * st.e();
    const double vx2 = s.vx * s.vx;
    return {rhs[0] / (vx2 * s.M(0, 0)), rhs[1] / (vx2 * s.M(1, 1))};
}

/// Open-loop steady state of the error dynamics under constant u and heading
/// rate. The open-loop stiffness L has a zero first column, so no unique
/// steady state exists and this returns nullopt; it exists for diagnostics and
/// for symmetry with the closed-loop variant below.
inline std::optional<ErrorState> steady_state_error(const SystemMatrices& s, double u,
                                                    double heading_prime) {
    const Vec2 rhs = u * s.B - heading_prime * s.F;
    try {
        const Vec2 e = solve(s.L, rhs);
        return ErrorState{e[0], e[1], 0.0, 0.0};
    } catch (const std::domain_error&) {
        return std::nullopt;
    }
}

/// Steady state under proportional feedback u = -K_P e + u_ff with constant
/// feedforward input and heading rate: solves (L + B K_P) e = B u_ff - F hp.
/// Returns nullopt when the closed-loop stiffness is singular.
inline std::optional<ErrorState> closed_loop_steady_state(const SystemMatrices& s,
                                                          const Vec2& k_p, double u_ff,
                                                          double heading_prime) {
    const Mat2 stiffness = s.L + outer(s.B, k_p);
    const Vec2 rhs = u_ff * s.B - heading_prime * s.F;
    try {
        const Vec2 e = solve(stiffness, rhs);
        return ErrorState{e[0], e[1], 0.0, 0.0};
    } catch (const std::domain_error&) {
        return std::nullopt;
    }
}

}  // namespace latstab
