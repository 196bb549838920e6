#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "control.hpp"
#include "freq.hpp"
#include "tf.hpp"
#include "vehicle.hpp"

namespace latstab {

/// Feedforward gain eliminating the steady-state lateral error on a constant-
/// curvature path:
///   kff = a + b + (m vx^2/(a+b)) (b/cf - a/cr + (a/cr) k_heading) - b k_heading.
inline double kff_formula(const VehicleParams& p, double k_heading) {
    p.validate();
    return p.a + p.b +
           p.m * p.vx * p.vx / (p.a + p.b) *
               (p.b / p.cf - p.a / p.cr + p.a / p.cr * k_heading) -
           p.b * k_heading;
}

/// Learning-gain search box plus the frozen feedback gains. The admissible
/// region for a passing design is k_lp in (-2 k_lat, 0) and k_ld < 0; the
/// box may be anything structurally valid and candidates outside the
/// admissible region simply fail, with diagnostics explaining why.
struct DesignSpec {
    VehicleParams params;
    Vec2 kp{};  // candidate feedback gains (step (a) of the procedure)
    Vec2 kd{};
    double kff = 0.0;

    double klp_min = 0.0, klp_max = 0.0;
    double kld_min = 0.0, kld_max = 0.0;
    int coarse_points = 21;  // grid resolution per dimension, first pass
    int refine_points = 21;  // resolution of each of the two refinement passes

    void validate() const {
        params.validate();
        if (!(klp_min <= klp_max) || !(kld_min <= kld_max))
            throw std::invalid_argument("DesignSpec: empty search interval");
        if (!std::isfinite(klp_min) || !std::isfinite(klp_max) || !std::isfinite(kld_min) ||
            !std::isfinite(kld_max))
            throw std::invalid_argument("DesignSpec: search bounds must be finite");
        if (coarse_points < 1 || refine_points < 1)
            throw std::invalid_argument("DesignSpec: grid resolutions must be >= 1");
    }
};

struct DesignResult {
    bool found = false;
    bool numeric_only = false;  // passed the H-infinity test but not the coefficient condition
    GainSet gains{};
    Certificate certificate{};
    std::string diagnostics;
};

namespace detail {

inline std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<size_t>(n));
    if (n == 1) {
        v[0] = 0.5 * (lo + hi);
        return v;
    }
    for (int i = 0; i < n; ++i)
        v[static_cast<size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    return v;
}

struct Candidate {
    double klp, kld;
};

// Fixed deterministic ordering: minimal |k_ld| first, then minimal |k_lp|
// (prefer the least learning effort that passes).
inline std::vector<Candidate> ordered_grid(const std::vector<double>& lps,
                                           const std::vector<double>& lds) {
    std::vector<Candidate> grid;
    grid.reserve(lps.size() * lds.size());
    for (double ld : lds)
        for (double lp : lps) grid.push_back({lp, ld});
    std::stable_sort(grid.begin(), grid.end(), [](const Candidate& a, const Candidate& b) {
        if (std::abs(a.kld) != std::abs(b.kld)) return std::abs(a.kld) < std::abs(b.kld);
        return std::abs(a.klp) < std::abs(b.klp);
    });
    return grid;
}

}  // namespace detail

/// Grid search for learning gains passing the coefficient condition, coarse
/// grid plus two refinement passes around the first (ordering-minimal) hit.
/// When the sufficient condition fails everywhere, candidates are re-scanned
/// against the numeric H-infinity norm and a passing one is returned tagged
/// numeric-only. Feedback gains must already stabilize the closed loop.
inline DesignResult design_lfp(const DesignSpec& spec) {
    spec.validate();
    GainSet base;
    base.kp = spec.kp;
    base.kd = spec.kd;
    base.kff = spec.kff;
    base.output = OutputSelector::lateral;

    const Poly den = det_adj(closed_loop_matrix(spec.params, base)).det;
    if (!routh_hurwitz(den))
        throw std::invalid_argument(
            "design_lfp: feedback gains do not stabilize the closed loop, retune them first");

    auto passes_coeff = [&](double klp, double kld, CoefficientCondition* out) {
        GainSet g = base;
        g.klp = klp;
        g.kld = kld;
        const CoefficientCondition cc = coefficient_condition(spec.params, g);
        if (out) *out = cc;
        return cc.all_positive;
    };

    auto search = [&](double lp_lo, double lp_hi, double ld_lo, double ld_hi, int n,
                      detail::Candidate* hit) {
        const auto grid =
            detail::ordered_grid(detail::linspace(lp_lo, lp_hi, n), detail::linspace(ld_lo, ld_hi, n));
        for (const auto& c : grid) {
            if (passes_coeff(c.klp, c.kld, nullptr)) {
                *hit = c;
                return true;
            }
        }
        return false;
    };

    detail::Candidate hit{0.0, 0.0};
    bool found = search(spec.klp_min, spec.klp_max, spec.kld_min, spec.kld_max,
                        spec.coarse_points, &hit);
    if (found) {
        // Two refinement passes: shrink to the coarse cell around the hit
        // (clipped to the original box), keeping the same ordering.
        double lp_cell = (spec.klp_max - spec.klp_min) /
                         std::max(1, spec.coarse_points - 1);
        double ld_cell = (spec.kld_max - spec.kld_min) /
                         std::max(1, spec.coarse_points - 1);
        for (int level = 0; level < 2; ++level) {
            if (lp_cell == 0.0 && ld_cell == 0.0) break;
            detail::Candidate refined = hit;
            const bool ok = search(std::max(spec.klp_min, hit.klp - lp_cell),
                                   std::min(spec.klp_max, hit.klp + lp_cell),
                                   std::max(spec.kld_min, hit.kld - ld_cell),
                                   std::min(spec.kld_max, hit.kld + ld_cell),
                                   spec.refine_points, &refined);
            if (ok) hit = refined;
            lp_cell = 2.0 * lp_cell / std::max(1, spec.refine_points - 1);
            ld_cell = 2.0 * ld_cell / std::max(1, spec.refine_points - 1);
        }
        DesignResult res;
        res.found = true;
        res.gains = base;
        res.gains.klp = hit.klp;
        res.gains.kld = hit.kld;
        res.certificate = verdict(spec.params, res.gains, Strategy::lfp_dt, OutputSelector::lateral);
        return res;
    }

    // Sufficient condition failed everywhere; the condition is not necessary,
    // so fall back to the numeric norm in the same deterministic order.
    const auto grid = detail::ordered_grid(
        detail::linspace(spec.klp_min, spec.klp_max, spec.coarse_points),
        detail::linspace(spec.kld_min, spec.kld_max, spec.coarse_points));
    for (const auto& c : grid) {
        GainSet g = base;
        g.klp = c.klp;
        g.kld = c.kld;
        const LfpScalarTF tf = build_H_lfp_scalar(spec.params, g);
        const HinfResult hn = hinf_norm(tf.h);
        if (hn.value < 1.0) {
            DesignResult res;
            res.found = true;
            res.numeric_only = true;
            res.gains = g;
            res.certificate = verdict(spec.params, g, Strategy::lfp_dt, OutputSelector::lateral);
            res.diagnostics =
                "coefficient condition failed on the whole grid; accepted by the numeric "
                "H-infinity test only (NUMERIC-ONLY)";
            return res;
        }
    }

    DesignResult res;
    res.found = false;
    const double k_lat = spec.kp[0];
    std::string why;
    if (spec.klp_min >= 0.0)
        why += "k_lp >= 0 forces |H(0)| = |(k_lat + k_lp)/k_lat| >= 1; ";
    if (spec.klp_max <= -2.0 * k_lat)
        why += "k_lp <= -2 k_lat forces |H(0)| >= 1; ";
    if (spec.kld_min == 0.0 && spec.kld_max == 0.0)
        why +=
            "k_ld = 0 leaves the open loop at relative degree 2, where the zero sensitivity "
            "integral forces sup|H| >= 1; ";
    if (why.empty()) why = "no candidate in the box passed the coefficient or H-infinity test; ";
    res.diagnostics = why + "admissible region: -2 k_lat < k_lp < 0 and k_ld < 0";
    return res;
}

}  // namespace latstab
