#pragma once

#include <cmath>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "control.hpp"
#include "freq.hpp"
#include "simulate.hpp"
#include "tf.hpp"

namespace latstab {

/// Discrete L2 norm over a uniform arc-length grid (rectangular rule):
/// sqrt(sum |z_k|^2 * dl).
inline double l2_norm(std::span<const double> signal, double dl) {
    if (signal.empty()) throw std::invalid_argument("l2_norm: empty signal");
    if (!(dl > 0.0)) throw std::invalid_argument("l2_norm: grid step must be positive");
    double acc = 0.0;
    for (double v : signal) acc += v * v;
    return std::sqrt(acc * dl);
}

/// Two-channel variant: component squares summed under the integral.
inline double l2_norm(std::span<const double> c0, std::span<const double> c1, double dl) {
    if (c0.size() != c1.size()) throw std::invalid_argument("l2_norm: channel length mismatch");
    if (c0.empty()) throw std::invalid_argument("l2_norm: empty signal");
    if (!(dl > 0.0)) throw std::invalid_argument("l2_norm: grid step must be positive");
    double acc = 0.0;
    for (size_t k = 0; k < c0.size(); ++k) acc += c0[k] * c0[k] + c1[k] * c1[k];
    return std::sqrt(acc * dl);
}

enum class EmpiricalVerdict {
    string_stable_empirical,  // every consecutive ratio of the chosen output < 1
    amplifying,               // some ratio >= 1
    vacuous,                  // lead vehicle output is (numerically) zero
};

inline const char* to_string(EmpiricalVerdict v) {
    switch (v) {
        case EmpiricalVerdict::string_stable_empirical: return "STRING-STABLE-EMPIRICAL";
        case EmpiricalVerdict::amplifying: return "AMPLIFYING";
        case EmpiricalVerdict::vacuous: return "VACUOUS";
    }
    return "?";
}

/// Per-vehicle norms and consecutive ratios. Ratios are defined only where the
/// predecessor norm exceeds 1e-12; the verdict is judged on the selected
/// output channel. Finite-horizon norms over the simulated circuit.
struct NormReport {
    std::vector<double> norm_lat;   // ||e_lat,i||
    std::vector<double> norm_vec;   // ||e_i|| (both channels)
    std::vector<double> ratio_lat;  // size m-1, NaN where undefined
    std::vector<double> ratio_vec;
    EmpiricalVerdict verdict = EmpiricalVerdict::vacuous;
    int first_offending = -1;  // 1-based vehicle index of the first ratio >= 1
    double gamma_max = 0.0;    // max defined ratio of the selected output
};

inline NormReport attenuation_report(const PlatoonTrajectory& traj, OutputSelector output) {
    const size_t m = traj.vehicles.size();
    if (m < 2) throw std::invalid_argument("attenuation_report: need at least 2 vehicles");
    NormReport rep;
    rep.norm_lat.resize(m);
    rep.norm_vec.resize(m);
    for (size_t i = 0; i < m; ++i) {
        rep.norm_lat[i] = l2_norm(traj.vehicles[i].lat, traj.dl);
        rep.norm_vec[i] = l2_norm(traj.vehicles[i].lat, traj.vehicles[i].heading, traj.dl);
    }
    const std::vector<double>& sel = output == OutputSelector::lateral ? rep.norm_lat : rep.norm_vec;

    const double nan = std::numeric_limits<double>::quiet_NaN();
    rep.ratio_lat.assign(m - 1, nan);
    rep.ratio_vec.assign(m - 1, nan);
    for (size_t i = 1; i < m; ++i) {
        if (rep.norm_lat[i - 1] > 1e-12) rep.ratio_lat[i - 1] = rep.norm_lat[i] / rep.norm_lat[i - 1];
        if (rep.norm_vec[i - 1] > 1e-12) rep.ratio_vec[i - 1] = rep.norm_vec[i] / rep.norm_vec[i - 1];
    }

    if (sel[0] <= 1e-12) {
        rep.verdict = EmpiricalVerdict::vacuous;
        return rep;
    }
    rep.verdict = EmpiricalVerdict::string_stable_empirical;
    const std::vector<double>& ratios =
        output == OutputSelector::lateral ? rep.ratio_lat : rep.ratio_vec;
    for (size_t i = 0; i < ratios.size(); ++i) {
        if (std::isnan(ratios[i])) continue;
        rep.gamma_max = std::max(rep.gamma_max, ratios[i]);
        if (ratios[i] >= 1.0 && rep.verdict == EmpiricalVerdict::string_stable_empirical) {
            rep.verdict = EmpiricalVerdict::amplifying;
            rep.first_offending = static_cast<int>(i) + 2;  // ratio i is vehicle i+2 vs i+1
        }
    }
    return rep;
}

enum class StabilityStatus {
    stable,                     // sup|H| < 1 certified numerically
    unstable_rank_one,          // identity plus rank-one perturbation: sup sigma1 >= 1
    unstable_dc_coupling,       // nonzero DC gain from heading error to lateral error
    unstable_zero_integral,     // sensitivity integral is zero: |H| >= 1 somewhere
    unstable_hinf,              // numeric sup|H| >= 1
};

inline const char* to_string(StabilityStatus s) {
    switch (s) {
        case StabilityStatus::stable: return "STABLE";
        case StabilityStatus::unstable_rank_one: return "UNSTABLE-BY-THEOREM (rank-one perturbation)";
        case StabilityStatus::unstable_dc_coupling: return "UNSTABLE-BY-THEOREM (DC heading-to-lateral coupling)";
        case StabilityStatus::unstable_zero_integral: return "UNSTABLE-BY-THEOREM (zero sensitivity integral)";
        case StabilityStatus::unstable_hinf: return "UNSTABLE (numeric H-infinity)";
    }
    return "?";
}

namespace detail {

inline std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace detail

/// Frequency-domain certificate combining the structural impossibility results
/// with numeric evaluation where stability is achievable.
struct Certificate {
    StabilityStatus status = StabilityStatus::unstable_hinf;
    std::string reason;

    bool hinf_valid = false;
    HinfResult hinf{};

    bool witness_valid = false;   // pointwise sigma1 (or |H|) sample >= 1
    double witness_sigma1 = 0.0;
    double witness_omega = 0.0;

    bool dc_valid = false;        // DC gain of the heading-to-lateral channel
    double dc_gain = 0.0;

    bool coeffs_valid = false;
    CoefficientCondition coeffs{};

    bool bode_valid = false;
    BodeIntegral bode{};

    bool routh_stable = false;    // closed-loop denominator Hurwitz
};

/// Decision rule over (strategy, output): predecessor tracking and the
/// full-vector output are structurally unstable (identity plus a rank-one
/// perturbation keeps sup sigma1 >= 1; the heading-to-lateral DC coupling
/// keeps a nonzero steady-state lateral error alive). Only the
/// learn-from-predecessor strategy with the lateral output can pass, and for
/// it the certificate carries the numeric H-infinity norm, the coefficient
/// condition, and the sensitivity integral.
inline Certificate verdict(const VehicleParams& p, const GainSet& g, Strategy strategy,
                           OutputSelector output) {
    Certificate cert;
    const Poly den = det_adj(closed_loop_matrix(p, g)).det;
    cert.routh_stable = routh_hurwitz(den);

    if (strategy == Strategy::ff_pt) {
        const FfTransfer ff = build_H_ff_matrix(p, g);
        cert.witness_valid = true;
        cert.witness_omega = 1.0;
        cert.witness_sigma1 = sigma1_2x2(ff.h2.eval(Complex(0.0, 1.0)));
        if (output == OutputSelector::full_vector) {
            cert.status = StabilityStatus::unstable_rank_one;
            cert.reason =
                "inter-vehicle map is I + R(s) with rank(R) <= 1, so sigma1 >= 1 at every frequency";
        } else {
            cert.status = StabilityStatus::unstable_dc_coupling;
            // The DC value is meaningful only without a cancellation at s = 0.
            double den_scale = 0.0;
            for (double c : ff.lat_from_heading.den.coeffs()) den_scale = std::max(den_scale, std::abs(c));
            if (std::abs(ff.lat_from_heading.den.eval(Complex(0.0, 0.0))) > 1e-12 * den_scale) {
                cert.dc_valid = true;
                cert.dc_gain = ff.lat_from_heading.eval(Complex(0.0, 0.0)).real();
            }
            cert.reason =
                "predecessor heading error drives a nonzero steady-state lateral error "
                "(DC gain k_heading/k_lat = " +
                detail::fmt_g(cert.dc_gain) + "), so a zero-input lateral norm can grow";
        }
        return cert;
    }

    if (output == OutputSelector::full_vector) {
        const TFMatrix h = build_H_lfp_matrix(p, g);
        cert.status = StabilityStatus::unstable_rank_one;
        cert.witness_valid = true;
        cert.witness_omega = 1.0;
        cert.witness_sigma1 = sigma1_2x2(h.eval(Complex(0.0, 1.0)));
        cert.reason =
            "inter-vehicle map is I + R(s) with rank(R) <= 1, so sigma1 >= 1 at every frequency";
        return cert;
    }

    const LfpScalarTF tf = build_H_lfp_scalar(p, g);
    bool integral_inapplicable = false;
    if (g.kld == 0.0) {
        // Relative degree 2: the sensitivity integral is zero, so |H| cannot
        // stay below 1 everywhere -- provided H has no right-half-plane zero.
        try {
            cert.bode = bode_integral(tf.h);
            cert.bode_valid = true;
            cert.status = StabilityStatus::unstable_zero_integral;
            cert.reason =
                "without derivative learning the open loop has relative degree 2; the "
                "sensitivity integral is zero and |H(j omega)| >= 1 somewhere";
            return cert;
        } catch (const std::domain_error&) {
            // RHP zero (or unstable denominator): integral argument inapplicable,
            // fall through to the numeric norm.
            integral_inapplicable = true;
        }
    }

    cert.hinf = hinf_norm(tf.h);  // throws if the denominator is not Hurwitz
    cert.hinf_valid = true;
    try {
        cert.coeffs = coefficient_condition(p, g);
        cert.coeffs_valid = true;
    } catch (const std::logic_error&) {
        cert.coeffs_valid = false;
    }
    if (g.kld != 0.0) {
        try {
            cert.bode = bode_integral(tf.h);
            cert.bode_valid = true;
        } catch (const std::exception&) {
            cert.bode_valid = false;
        }
    }
    if (cert.hinf.value < 1.0) {
        cert.status = StabilityStatus::stable;
        cert.reason = "sup |H(j omega)| = " + detail::fmt_g(cert.hinf.value) + " < 1";
        if (cert.coeffs_valid && cert.coeffs.all_positive)
            cert.reason += "; coefficient condition a6,a4,a2,a0 > 0 also holds";
        else
            cert.reason += "; sufficient coefficient condition not met (numeric verdict only)";
    } else {
        cert.status = StabilityStatus::unstable_hinf;
        cert.reason = "sup |H(j omega)| = " + detail::fmt_g(cert.hinf.value) + " >= 1 at omega = " +
                      detail::fmt_g(cert.hinf.omega) + " rad/m";
    }
    if (integral_inapplicable)
        cert.reason += "; a right-half-plane zero made the sensitivity-integral argument "
                       "inapplicable, numeric verdict only";
    return cert;
}

}  // namespace latstab
