#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "analysis.hpp"
#include "control.hpp"
#include "path.hpp"
#include "simulate.hpp"

namespace latstab {

namespace detail {

// Fixed, locale-independent number formatting keeps outputs byte-identical
// across runs.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

}  // namespace detail

/// One row per (vehicle, grid node), vehicle-major. Units in the header.
inline void write_trajectory_csv(const std::string& path, const PlatoonTrajectory& traj) {
    auto out = detail::open_out(path);
    out << "l_d_m,vehicle,e_lat_m,theta_err_rad,e_lat_prime,theta_err_prime_radpm,u_rad,x_m,y_m\n";
    for (size_t v = 0; v < traj.vehicles.size(); ++v) {
        const auto& ch = traj.vehicles[v];
        for (size_t k = 0; k < traj.arc.size(); ++k) {
            out << detail::fmt(traj.arc[k]) << ',' << (v + 1) << ',' << detail::fmt(ch.lat[k])
                << ',' << detail::fmt(ch.heading[k]) << ',' << detail::fmt(ch.lat_prime[k]) << ','
                << detail::fmt(ch.heading_prime[k]) << ',' << detail::fmt(ch.u[k]) << ','
                << detail::fmt(ch.x.empty() ? 0.0 : ch.x[k]) << ','
                << detail::fmt(ch.y.empty() ? 0.0 : ch.y[k]) << '\n';
        }
    }
}

inline void write_norms_csv(const std::string& path, const NormReport& rep) {
    auto out = detail::open_out(path);
    out << "vehicle,norm_elat_m_sqrtm,norm_evec_mixed_sqrtm,ratio_elat,ratio_evec\n";
    for (size_t i = 0; i < rep.norm_lat.size(); ++i) {
        out << (i + 1) << ',' << detail::fmt(rep.norm_lat[i]) << ',' << detail::fmt(rep.norm_vec[i]);
        if (i == 0) {
            out << ",,";
        } else {
            out << ',' << detail::fmt(rep.ratio_lat[i - 1]) << ','
                << detail::fmt(rep.ratio_vec[i - 1]);
        }
        out << '\n';
    }
}

inline void write_path_csv(const std::string& path, const DesiredPath& p) {
    auto out = detail::open_out(path);
    out << "l_d_m,x_m,y_m,theta_rad,kappa_1pm\n";
    const auto& th = p.theta_samples();
    const auto& ka = p.kappa_samples();
    const auto& xs = p.x_samples();
    const auto& ys = p.y_samples();
    for (size_t i = 0; i < th.size(); ++i)
        out << detail::fmt(static_cast<double>(i) * p.step()) << ',' << detail::fmt(xs[i]) << ','
            << detail::fmt(ys[i]) << ',' << detail::fmt(th[i]) << ',' << detail::fmt(ka[i]) << '\n';
}

/// Learned term plus the recorded output and its derivative for one vehicle.
inline void write_learned_csv(const std::string& path, const PlatoonTrajectory& traj,
                              size_t vehicle_index_0based) {
    const auto& ch = traj.vehicles.at(vehicle_index_0based);
    if (ch.u_learned.empty())
        throw std::invalid_argument("write_learned_csv: no learned signals (not an LFP run)");
    GridSignal y{0.0, traj.dl, ch.lat};
    const GridSignal yp = grid_derivative(y);
    auto out = detail::open_out(path);
    out << "l_d_m,u_l_rad,y_m,y_prime\n";
    for (size_t k = 0; k < traj.arc.size(); ++k)
        out << detail::fmt(traj.arc[k]) << ',' << detail::fmt(ch.u_learned[k]) << ','
            << detail::fmt(ch.lat[k]) << ',' << detail::fmt(yp.values[k]) << '\n';
}

inline void write_gains_echo(std::ostream& out, const GainSet& g) {
    out << "gains: k_lat = " << detail::fmt(g.kp[0]) << ", k_heading = " << detail::fmt(g.kp[1])
        << ", k_lat_dot = " << detail::fmt(g.kd[0]) << ", k_heading_dot = " << detail::fmt(g.kd[1])
        << ", k_ff = " << detail::fmt(g.kff) << "\n";
    if (g.output == OutputSelector::lateral) {
        out << "learning: k_lp = " << detail::fmt(g.klp) << ", k_ld = " << detail::fmt(g.kld)
            << " (output: lateral error)\n";
    } else {
        out << "learning: k_lp_row = [" << detail::fmt(g.klp_row[0]) << ", "
            << detail::fmt(g.klp_row[1]) << "], k_ld_row = [" << detail::fmt(g.kld_row[0]) << ", "
            << detail::fmt(g.kld_row[1]) << "] (output: full error vector)\n";
    }
}

/// Structured text certificate: gains echo, Routh verdict, H-infinity value
/// and argmax, coefficient condition, sensitivity integral, final verdict.
inline void write_certificate(std::ostream& out, const Certificate& cert, const GainSet& gains) {
    write_gains_echo(out, gains);
    out << "closed-loop denominator Hurwitz: " << (cert.routh_stable ? "yes" : "no") << "\n";
    if (cert.hinf_valid) {
        out << "H-infinity norm (finite frequencies): " << detail::fmt(cert.hinf.value)
            << " at omega = " << detail::fmt(cert.hinf.omega) << " rad/m, limit at infinity "
            << detail::fmt(cert.hinf.limit_at_infinity);
        if (cert.hinf.boundary_warning) out << " (sweep boundary, value may be bracketed)";
        out << "\n";
    }
    if (cert.witness_valid)
        out << "pointwise witness: sigma1(H(j omega)) = " << detail::fmt(cert.witness_sigma1)
            << " at omega = " << detail::fmt(cert.witness_omega) << " rad/m\n";
    if (cert.dc_valid)
        out << "heading-to-lateral DC gain: " << detail::fmt(cert.dc_gain) << "\n";
    if (cert.coeffs_valid)
        out << "coefficient condition |D|^2-|N|^2 = a6 w^6 + a4 w^4 + a2 w^2 + a0: a6 = "
            << detail::fmt(cert.coeffs.a6) << ", a4 = " << detail::fmt(cert.coeffs.a4)
            << ", a2 = " << detail::fmt(cert.coeffs.a2) << ", a0 = " << detail::fmt(cert.coeffs.a0)
            << " -> " << (cert.coeffs.all_positive ? "all positive (sufficient for sup|H| < 1)"
                                                   : "not all positive (inconclusive)")
            << "\n";
    if (cert.bode_valid)
        out << "sensitivity integral: numeric = " << detail::fmt(cert.bode.numeric)
            << ", predicted -(pi/2) lim sG(s) = " << detail::fmt(cert.bode.predicted) << "\n";
    out << "verdict: " << to_string(cert.status) << "\n";
    out << "reason: " << cert.reason << "\n";
}

inline void write_norm_summary(std::ostream& out, const NormReport& rep) {
    out << "empirical verdict: " << to_string(rep.verdict);
    if (rep.verdict == EmpiricalVerdict::amplifying)
        out << " (first amplifying vehicle: " << rep.first_offending << ")";
    out << "\n";
    if (rep.verdict != EmpiricalVerdict::vacuous)
        out << "max consecutive ratio (selected output): " << detail::fmt(rep.gamma_max) << "\n";
}

}  // namespace latstab
