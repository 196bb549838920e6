#pragma once

#include <stdexcept>

#include "control.hpp"
#include "linalg.hpp"
#include "poly.hpp"
#include "vehicle.hpp"

namespace latstab {

/// Ratio of real-coefficient polynomials in the spatial Laplace variable s.
/// Common factors are never cancelled automatically; where analysis relies on
/// the absence of a cancellation it is verified numerically instead.
struct RationalTF {
    Poly num;
    Poly den;

    Complex eval(Complex s) const {
        if (den.is_zero()) throw std::domain_error("RationalTF: zero denominator");
        return num.eval(s) / den.eval(s);
    }

    // Value as |s| -> infinity: ratio of leading coefficients, or 0 when the
    // numerator degree is lower. Throws on an improper ratio.
    double limit_at_infinity() const {
        if (den.is_zero()) throw std::domain_error("RationalTF: zero denominator");
        if (num.is_zero()) return 0.0;
        if (num.degree() > den.degree())
            throw std::domain_error("RationalTF: improper transfer function has no limit");
        if (num.degree() < den.degree()) return 0.0;
        return num.leading() / den.leading();
    }
};

struct PolyMat2 {
    Poly e[2][2];

    Poly& operator()(int r, int c) { return e[r][c]; }
    const Poly& operator()(int r, int c) const { return e[r][c]; }

    CMat2 eval(Complex s) const {
        CMat2 m;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) m(i, j) = e[i][j].eval(s);
        return m;
    }
};

/// 2x2 matrix of rational transfer functions sharing a common denominator.
struct TFMatrix {
    PolyMat2 num;
    Poly den;

    RationalTF entry(int r, int c) const { return {num(r, c), den}; }

    CMat2 eval(Complex s) const {
        const Complex d = den.eval(s);
        CMat2 m = num.eval(s);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) m(i, j) /= d;
        return m;
    }

    // Entrywise limit as |s| -> infinity.
    CMat2 limit_at_infinity() const {
        CMat2 m;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) m(i, j) = Complex(entry(i, j).limit_at_infinity(), 0.0);
        return m;
    }
};

/// Closed-loop polynomial matrix s^2 vx^2 M + s vx C + L + B*(K_P + s vx K_D).
/// Every entry has degree <= 2; the (0,0) entry's s^2 coefficient is m*vx^2
/// and the (1,1) entry's is iz*vx^2.
inline PolyMat2 closed_loop_matrix(const VehicleParams& p, const GainSet& g) {
    p.validate();
    g.validate();
    const SystemMatrices s = build_matrices(p);
    const double vx = p.vx;
    PolyMat2 out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            out(i, j) = Poly{s.L(i, j) + s.B[i] * g.kp[j],
                             vx * s.C(i, j) + s.B[i] * vx * g.kd[j],
                             vx * vx * s.M(i, j)};
    return out;
}

struct DetAdj {
    Poly det;
    PolyMat2 adj;
};

inline DetAdj det_adj(const PolyMat2& m) {
    DetAdj r;
    r.det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    r.adj(0, 0) = m(1, 1);
    r.adj(0, 1) = -1.0 * m(0, 1);
    r.adj(1, 0) = -1.0 * m(1, 0);
    r.adj(1, 1) = m(0, 0);
    return r;
}

namespace detail {

// [1 0] * adj(closed loop) * B -- the numerator factor shared by every scalar
// lateral-error channel.
inline Poly lat_row_adj_times_b(const DetAdj& da, const Vec2& b) {
    return b[0] * da.adj(0, 0) + b[1] * da.adj(0, 1);
}

}  // namespace detail

/// Scalar inter-vehicle transfer function of the learn-from-predecessor
/// strategy with the lateral-error output:
///   H(s) = 1 + [1 0] (closed loop)^-1 B (K_LP + s K_LD) = (D + n_G)/D.
/// Returns H together with the open-loop part G = n_G/D.
struct LfpScalarTF {
    RationalTF h;
    RationalTF g;
};

inline LfpScalarTF build_H_lfp_scalar(const VehicleParams& p, const GainSet& gains) {
    if (gains.output != OutputSelector::lateral)
        throw std::invalid_argument("build_H_lfp_scalar: requires the lateral-error output");
    const DetAdj da = det_adj(closed_loop_matrix(p, gains));
    const SystemMatrices s = build_matrices(p);
    const Poly k_l{gains.klp, gains.kld};
    const Poly n_g = detail::lat_row_adj_times_b(da, s.B) * k_l;
    return {{da.det + n_g, da.det}, {n_g, da.det}};
}

/// Full-vector transfer matrix of the learn-from-predecessor strategy:
///   H(s) = I + (closed loop)^-1 B K_L(s),  K_L a 1x2 row.
inline TFMatrix build_H_lfp_matrix(const VehicleParams& p, const GainSet& gains) {
    const DetAdj da = det_adj(closed_loop_matrix(p, gains));
    const SystemMatrices s = build_matrices(p);
    const Vec2 row_p = gains.learning_row_p();
    const Vec2 row_d = gains.learning_row_d();
    TFMatrix out;
    out.den = da.det;
    for (int i = 0; i < 2; ++i) {
        const Poly adj_b = s.B[0] * da.adj(i, 0) + s.B[1] * da.adj(i, 1);
        for (int j = 0; j < 2; ++j) {
            const Poly k_lj{row_p[j], row_d[j]};
            out.num(i, j) = adj_b * k_lj;
            if (i == j) out.num(i, j) = out.num(i, j) + da.det;
        }
    }
    return out;
}

/// Inter-vehicle transfer matrix of the feedback-feedforward strategy under
/// predecessor tracking:
///   H2(s) = I + (closed loop)^-1 B (K_fb(s) + s kff [0 1]),
/// plus the scalar channel from the predecessor's heading error to the
/// follower's lateral error (the counterexample channel, whose DC value is
/// k_heading / k_lat).
struct FfTransfer {
    TFMatrix h2;
    RationalTF lat_from_heading;
};

inline FfTransfer build_H_ff_matrix(const VehicleParams& p, const GainSet& gains) {
    const DetAdj da = det_adj(closed_loop_matrix(p, gains));
    const SystemMatrices s = build_matrices(p);
    const double vx = p.vx;
    // row applied to the predecessor error: K_P + s vx K_D + s kff [0 1]
    const Poly row[2] = {Poly{gains.kp[0], vx * gains.kd[0]},
                         Poly{gains.kp[1], vx * gains.kd[1] + gains.kff}};
    FfTransfer out;
    out.h2.den = da.det;
    for (int i = 0; i < 2; ++i) {
        const Poly adj_b = s.B[0] * da.adj(i, 0) + s.B[1] * da.adj(i, 1);
        for (int j = 0; j < 2; ++j) {
            out.h2.num(i, j) = adj_b * row[j];
            if (i == j) out.h2.num(i, j) = out.h2.num(i, j) + da.det;
        }
    }
    out.lat_from_heading = {detail::lat_row_adj_times_b(da, s.B) * row[1], da.det};
    return out;
}

}  // namespace latstab
