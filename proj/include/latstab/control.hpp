#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "linalg.hpp"
#include "vehicle.hpp"

namespace latstab {

/// Which predecessor output the learned term feeds on: the scalar lateral
/// error, or the full (lateral, heading) error vector.
enum class OutputSelector { lateral, full_vector };

/// Feedback, feedforward, and learning gains. Learning gains are scalars for
/// the lateral output and 1x2 row vectors for the full-vector output; the
/// *_row fields are ignored in lateral mode.
struct GainSet {
    Vec2 kp{};  // proportional feedback on (e_lat, heading_err)
    Vec2 kd{};  // derivative feedback (time-domain gains, applied as vx*kd*e')
    double kff = 0.0;

    OutputSelector output = OutputSelector::lateral;
    double klp = 0.0;
    double kld = 0.0;
    Vec2 klp_row{};
    Vec2 kld_row{};

    // Learning gain composed with the output selection, as a row acting on the
    // full error vector.
    Vec2 learning_row_p() const {
        return output == OutputSelector::lateral ? Vec2{klp, 0.0} : klp_row;
    }
    Vec2 learning_row_d() const {
        return output == OutputSelector::lateral ? Vec2{kld, 0.0} : kld_row;
    }

    void validate() const {
        for (int i = 0; i < 2; ++i)
            if (!std::isfinite(kp[i]) || !std::isfinite(kd[i]))
                throw std::invalid_argument("GainSet: feedback gains must be finite");
        if (!std::isfinite(kff)) throw std::invalid_argument("GainSet: kff must be finite");
    }
};

namespace detail {

// C1 (Catmull-Rom) interpolation of uniform samples, linear in the first and
// last cells. Linear interpolation would put a derivative kink at every node
// of every consumed record; those kinks dominate the equation residual of the
// integrated trajectories by orders of magnitude, so recorded signals are
// read through this C1 interpolant instead.
inline double sampled_at(const std::vector<double>& v, double l0, double dl, double l) {
    if (v.empty()) throw std::logic_error("sampled_at: empty signal");
    if (v.size() == 1) return v.front();
    const double pos = (l - l0) / dl;
    if (pos <= 0.0) return v.front();
    if (pos >= static_cast<double>(v.size() - 1)) return v.back();
    size_t i = static_cast<size_t>(pos);
    const double t = pos - static_cast<double>(i);
    if (i == 0 || i + 2 >= v.size()) return v[i] + t * (v[i + 1] - v[i]);
    const double a = v[i - 1], b = v[i], c = v[i + 1], d = v[i + 2];
    return 0.5 * (2.0 * b + t * ((c - a) + t * ((2.0 * a - 5.0 * b + 4.0 * c - d) +
                                                t * (3.0 * (b - c) + d - a))));
}

}  // namespace detail

/// Uniformly sampled function of arc length; between-sample reads use the C1
/// interpolant above.
struct GridSignal {
    double l0 = 0.0;
    double dl = 0.0;
    std::vector<double> values;

    double at(double l) const { return detail::sampled_at(values, l0, dl, l); }
};

/// Central finite differences on the grid, one-sided at the endpoints. This is
/// how recorded outputs are differentiated before transmission.
inline GridSignal grid_derivative(const GridSignal& s) {
    const size_t n = s.values.size();
    if (n < 2) throw std::invalid_argument("grid_derivative: need at least 2 samples");
    GridSignal d{s.l0, s.dl, std::vector<double>(n, 0.0)};
    d.values[0] = (s.values[1] - s.values[0]) / s.dl;
    d.values[n - 1] = (s.values[n - 1] - s.values[n - 2]) / s.dl;
    for (size_t i = 1; i + 1 < n; ++i)
        d.values[i] = (s.values[i + 1] - s.values[i - 1]) / (2.0 * s.dl);
    return d;
}

/// Predecessor output records transmitted over V2V: the learned control term
/// plus the recorded output and its arc-length derivative, all on the shared
/// grid. For the lateral output only channel 0 of y is populated.
struct LearnedSignal {
    GridSignal u_l;
    GridSignal y0, y1;
    GridSignal y0_prime, y1_prime;
    bool vector_output = false;
};

/// Feedback-feedforward law: u = -K_P e_ref - vx K_D e_ref' + kff theta_ref'.
inline double ff_control(const GainSet& g, double vx, const ErrorState& ref_error,
                         double ref_heading_prime) {
    return -dot(g.kp, ref_error.e()) - vx * dot(g.kd, ref_error.e_prime()) +
           g.kff * ref_heading_prime;
}

/// Reference quantities consumed by ff_control under predecessor tracking.
struct ReferenceFrame {
    ErrorState error;            // error relative to the reference path
    double ref_heading_prime;    // heading rate of the reference path [rad/m]
};

/// Predecessor-tracking reference: the lead vehicle tracks the desired path
/// directly; followers track their predecessor, so reference error is the
/// difference of desired-path errors and the reference heading rate picks up
/// the predecessor's heading-error rate. Vehicle indices are 1-based.
inline ReferenceFrame ff_reference_error(int vehicle_index, const ErrorState& own,
                                         const ErrorState* predecessor,
                                         double desired_heading_prime) {
    if (vehicle_index < 1)
        throw std::invalid_argument("ff_reference_error: vehicle indices start at 1");
    if (vehicle_index == 1) return {own, desired_heading_prime};
    if (predecessor == nullptr)
        throw std::invalid_argument("ff_reference_error: missing predecessor record");
    ErrorState rel;
    rel.lat = own.lat - predecessor->lat;
    rel.heading = own.heading - predecessor->heading;
    rel.lat_prime = own.lat_prime - predecessor->lat_prime;
    rel.heading_prime = own.heading_prime - predecessor->heading_prime;
    return {rel, desired_heading_prime + predecessor->heading_prime};
}

/// Learn-from-predecessor law: u = -K_P e - vx K_D e' + u_l(l). The learned
/// term must already be sealed at l (see delay_margin).
inline double lfp_control(const GainSet& g, double vx, const ErrorState& own_error,
                          double u_learned_at_l) {
    return -dot(g.kp, own_error.e()) - vx * dot(g.kd, own_error.e_prime()) + u_learned_at_l;
}

/// Learned-term recursion: u_{l,i} = u_{l,i-1} + K_LP y_{i-1} + K_LD y'_{i-1},
/// pointwise on the shared grid.
inline GridSignal learned_update(const GainSet& g, const GridSignal& u_l_prev,
                                 const LearnedSignal& prev) {
    auto check = [&](const GridSignal& s) {
        if (s.values.size() != u_l_prev.values.size() || s.dl != u_l_prev.dl ||
            s.l0 != u_l_prev.l0)
            throw std::invalid_argument("learned_update: grid mismatch");
    };
    const Vec2 row_p = g.learning_row_p();
    const Vec2 row_d = g.learning_row_d();
    check(prev.y0);
    check(prev.y0_prime);
    if (prev.vector_output) {
        check(prev.y1);
        check(prev.y1_prime);
    }
    GridSignal out = u_l_prev;
    for (size_t k = 0; k < out.values.size(); ++k) {
        double inc = row_p[0] * prev.y0.values[k] + row_d[0] * prev.y0_prime.values[k];
        if (prev.vector_output)
            inc += row_p[1] * prev.y1.values[k] + row_d[1] * prev.y1_prime.values[k];
        out.values[k] += inc;
    }
    return out;
}

/// Spatially induced time gap check: information recorded at a point is needed
/// only once the follower reaches it, delta_l/v seconds later. Feasible iff
/// the delay is strictly below that gap.
struct DelayMargin {
    bool feasible;
    double margin_s;
};

inline DelayMargin delay_margin(double delta_l_m, double follower_speed_mps, double delay_s) {
    if (!(delta_l_m > 0.0) || !(follower_speed_mps > 0.0))
        throw std::invalid_argument("delay_margin: spacing and speed must be positive");
    const double margin = delta_l_m / follower_speed_mps - delay_s;
    return {margin > 0.0, margin};
}

}  // namespace latstab
