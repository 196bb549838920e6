#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace latstab {

// Sign convention used throughout: positive lateral offset means left of the
// path when facing the direction of increasing arc length.

/// Arc-length-parameterized planar path. Heading and coordinates are obtained
/// by integrating the curvature profile onto a dense grid (default spacing
/// 0.01 m); queries interpolate linearly between grid samples.
class DesiredPath {
public:
    static constexpr double kDefaultStep = 0.01;

    struct Point {
        double theta;  // heading [rad]
        double kappa;  // curvature [1/m]
        double x;      // [m]
        double y;      // [m]
    };

    DesiredPath() = default;

    /// Integrates theta' = kappa(l), x' = cos(theta), y' = sin(theta) with
    /// fixed-step RK4 on the dense grid. length must be a multiple of step.
    /// breakpoints lists arc positions where the curvature profile loses
    /// smoothness (segment junctions); consumers verifying smoothness-based
    /// approximations use them to stay clear of the corners.
    static DesiredPath from_curvature(const std::function<double(double)>& kappa, double length,
                                      double step = kDefaultStep,
                                      std::vector<double> breakpoints = {}) {
        if (!(length > 0.0)) throw std::invalid_argument("DesiredPath: length must be positive");
        if (!(step > 0.0)) throw std::invalid_argument("DesiredPath: step must be positive");
        const long long n = std::llround(length / step);
        if (n < 1 || std::abs(static_cast<double>(n) * step - length) > 1e-9)
            throw std::invalid_argument("DesiredPath: length must be a multiple of the grid step");

        DesiredPath p;
        p.step_ = step;
        p.length_ = static_cast<double>(n) * step;
        p.kappa_fn_ = kappa;
        p.breakpoints_ = std::move(breakpoints);
        const size_t count = static_cast<size_t>(n) + 1;
        p.kappa_.resize(count);
        p.theta_.resize(count);
        p.x_.resize(count);
        p.y_.resize(count);

        double theta = 0.0, x = 0.0, y = 0.0;
        p.kappa_[0] = kappa(0.0);
        p.theta_[0] = 0.0;
        p.x_[0] = 0.0;
        p.y_[0] = 0.0;
        for (size_t i = 1; i < count; ++i) {
            const double l0 = static_cast<double>(i - 1) * step;
            // RK4 on (theta, x, y)
            const double k1t = kappa(l0);
            const double k1x = std::cos(theta);
            const double k1y = std::sin(theta);
            const double km = kappa(l0 + 0.5 * step);
            const double t2 = theta + 0.5 * step * k1t;
            const double k2x = std::cos(t2), k2y = std::sin(t2);
            const double t3 = theta + 0.5 * step * km;
            const double k3x = std::cos(t3), k3y = std::sin(t3);
            const double ke = kappa(l0 + step);
            const double t4 = theta + step * km;
            const double k4x = std::cos(t4), k4y = std::sin(t4);
            theta += step / 6.0 * (k1t + 4.0 * km + ke);
            x += step / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
            y += step / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            p.kappa_[i] = ke;
            p.theta_[i] = theta;
            p.x_[i] = x;
            p.y_[i] = y;
        }
        return p;
    }

    double length() const { return length_; }
    double step() const { return step_; }
    size_t sample_count() const { return kappa_.size(); }

    Point query(double l) const {
        if (kappa_.empty()) throw std::logic_error("DesiredPath: empty path");
        if (l < -1e-12 || l > length_ + 1e-12)
            throw std::out_of_range("DesiredPath::query: arc position outside [0, length]");
        l = std::min(std::max(l, 0.0), length_);
        const double pos = l / step_;
        size_t i = static_cast<size_t>(pos);
        if (i + 1 >= kappa_.size()) i = kappa_.size() - 2;
        const double t = pos - static_cast<double>(i);
        auto lerp = [t](double a, double b) { return a + t * (b - a); };
        return {lerp(theta_[i], theta_[i + 1]), lerp(kappa_[i], kappa_[i + 1]),
                lerp(x_[i], x_[i + 1]), lerp(y_[i], y_[i + 1])};
    }

    double heading(double l) const { return query(l).theta; }
    double curvature(double l) const { return query(l).kappa; }

    /// Curvature from the defining profile rather than the interpolated grid;
    /// the integrator consumes this so its forcing is smooth between
    /// breakpoints instead of piecewise linear between samples.
    double curvature_exact(double l) const {
        if (l < -1e-12 || l > length_ + 1e-12)
            throw std::out_of_range("DesiredPath::curvature_exact: outside [0, length]");
        return kappa_fn_(std::min(std::max(l, 0.0), length_));
    }

    const std::vector<double>& breakpoints() const { return breakpoints_; }

    const std::vector<double>& kappa_samples() const { return kappa_; }
    const std::vector<double>& theta_samples() const { return theta_; }
    const std::vector<double>& x_samples() const { return x_; }
    const std::vector<double>& y_samples() const { return y_; }

    /// Span of |1/kappa| over the dense samples. Straight stretches make the
    /// maximum infinite.
    struct RadiusSpan {
        double min_radius;
        double max_radius;
    };
    RadiusSpan radius_span() const {
        double kmax = 0.0;
        double kmin = std::numeric_limits<double>::infinity();
        for (double k : kappa_) {
            kmax = std::max(kmax, std::abs(k));
            kmin = std::min(kmin, std::abs(k));
        }
        const double inf = std::numeric_limits<double>::infinity();
        return {kmax > 0.0 ? 1.0 / kmax : inf, kmin > 1e-12 ? 1.0 / kmin : inf};
    }

private:
    double step_ = kDefaultStep;
    double length_ = 0.0;
    std::function<double(double)> kappa_fn_ = [](double) { return 0.0; };
    std::vector<double> breakpoints_;
    std::vector<double> kappa_, theta_, x_, y_;
};

inline DesiredPath make_constant_curvature(double kappa0, double length,
                                           double step = DesiredPath::kDefaultStep) {
    return DesiredPath::from_curvature([kappa0](double) { return kappa0; }, length, step);
}

namespace detail {

// Heading inside a sinusoidal-curvature lane change of length lc:
// kappa(xi) = kp*sin(2*pi*xi/lc)  =>  theta(xi) = kp*lc/(2*pi)*(1 - cos(2*pi*xi/lc)).
inline double lane_change_heading(double kp, double lc, double xi) {
    const double w = 2.0 * std::acos(-1.0) / lc;
    return kp / w * (1.0 - std::cos(w * xi));
}

// Net lateral offset produced by the lane change, by Simpson quadrature.
inline double lane_change_offset(double kp, double lc) {
    const int n = 2000;  // even
    const double h = lc / n;
    double acc = std::sin(lane_change_heading(kp, lc, 0.0)) +
                 std::sin(lane_change_heading(kp, lc, lc));
    for (int i = 1; i < n; ++i)
        acc += (i % 2 == 1 ? 4.0 : 2.0) * std::sin(lane_change_heading(kp, lc, i * h));
    return acc * h / 3.0;
}

// Peak curvature achieving the requested offset, or throw when the geometry
// would need a peak beyond the 0.2 1/m sanity cap (or a heading past pi/2).
inline double solve_lane_change_peak(double offset, double lc) {
    const double pi = std::acos(-1.0);
    if (offset == 0.0) return 0.0;
    const double target = std::abs(offset);
    // keep peak heading <= pi/2 so the offset is monotone in the peak curvature
    const double cap = std::min(0.2, pi * pi / (2.0 * lc));
    if (lane_change_offset(cap, lc) < target)
        throw std::invalid_argument(
            "lane change geometrically impossible: requested offset " + std::to_string(offset) +
            " m over " + std::to_string(lc) + " m needs peak curvature beyond 0.2 1/m");
    double lo = 0.0, hi = cap;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (lane_change_offset(mid, lc) < target)
            lo = mid;
        else
            hi = mid;
    }
    const double kp = 0.5 * (lo + hi);
    return offset > 0.0 ? kp : -kp;
}

}  // namespace detail

/// Track made of straight stretches alternating with sinusoidal-curvature lane
/// changes (one full sine period each: zero net heading, exact lateral offset).
/// Offsets alternate sign change-to-change so the track stays in a corridor.
/// Per-change variant: offsets[i] and change_lengths[i] describe change i.
inline DesiredPath make_lane_change_track(const std::vector<double>& offsets,
                                          const std::vector<double>& change_lengths,
                                          double straight_length,
                                          double step = DesiredPath::kDefaultStep) {
    if (offsets.empty() || offsets.size() != change_lengths.size())
        throw std::invalid_argument("make_lane_change_track: need one length per offset");
    if (!(straight_length > 0.0))
        throw std::invalid_argument("make_lane_change_track: straight_length must be positive");

    struct Segment {
        double length;
        double kp;  // 0 for straights
    };
    std::vector<Segment> segs;
    segs.push_back({straight_length, 0.0});
    for (size_t i = 0; i < offsets.size(); ++i) {
        if (!(change_lengths[i] > 0.0))
            throw std::invalid_argument("make_lane_change_track: change length must be positive");
        segs.push_back({change_lengths[i], detail::solve_lane_change_peak(offsets[i], change_lengths[i])});
        segs.push_back({straight_length, 0.0});
    }

    double total = 0.0;
    std::vector<double> junctions;  // curvature-derivative corners
    for (const auto& s : segs) {
        if (std::abs(std::round(s.length / step) * step - s.length) > 1e-9)
            throw std::invalid_argument(
                "make_lane_change_track: segment lengths must be multiples of the grid step");
        if (total > 0.0) junctions.push_back(total);
        total += s.length;
    }

    const double pi = std::acos(-1.0);
    auto kappa = [segs, pi](double l) {
        for (const auto& s : segs) {
            if (l <= s.length) {
                if (s.kp == 0.0) return 0.0;
                return s.kp * std::sin(2.0 * pi * l / s.length);
            }
            l -= s.length;
        }
        return 0.0;
    };
    return DesiredPath::from_curvature(kappa, total, step, std::move(junctions));
}

/// Uniform-geometry variant: n_changes lane changes of the same length with
/// alternating offset sign, separated by equal straights.
inline DesiredPath make_lane_change_track(int n_changes, double lane_offset, double change_length,
                                          double straight_length,
                                          double step = DesiredPath::kDefaultStep) {
    if (n_changes < 1) throw std::invalid_argument("make_lane_change_track: need n_changes >= 1");
    std::vector<double> offsets(static_cast<size_t>(n_changes));
    std::vector<double> lengths(static_cast<size_t>(n_changes), change_length);
    for (int i = 0; i < n_changes; ++i)
        offsets[static_cast<size_t>(i)] = (i % 2 == 0) ? lane_offset : -lane_offset;
    return make_lane_change_track(offsets, lengths, straight_length, step);
}

/// Default test track: four alternating 3.5 m lane changes whose lengths span
/// tight urban maneuvers to gentle highway drifts, separated by 200 m
/// straights. The tightest change bottoms out near a 7.4 m turning radius
/// while the straights are flat, so the radius span stretches to infinity.
inline DesiredPath default_lane_change_track(double step = DesiredPath::kDefaultStep) {
    return make_lane_change_track({3.5, -3.5, 3.5, -3.5}, {13.0, 30.0, 60.0, 120.0}, 200.0, step);
}

struct Polyline {
    std::vector<double> x, y;
};

struct ProjectionResult {
    double arc;      // arc position of the closest point [m]
    double offset;   // signed lateral offset, left positive [m]
    double heading;  // heading of the winning segment [rad]
};

/// Closest-point projection onto a recorded polyline: global minimum over all
/// segments with linear interpolation inside the winning segment.
inline ProjectionResult nearest_point(const Polyline& line, double qx, double qy) {
    const size_t n = line.x.size();
    if (n < 2 || line.y.size() != n)
        throw std::invalid_argument("nearest_point: polyline needs at least 2 consistent samples");

    double best_d2 = std::numeric_limits<double>::infinity();
    ProjectionResult best{0.0, 0.0, 0.0};
    double arc_acc = 0.0;
    bool found = false;
    for (size_t i = 0; i + 1 < n; ++i) {
        const double ax = line.x[i], ay = line.y[i];
        const double dx = line.x[i + 1] - ax, dy = line.y[i + 1] - ay;
        const double seg_len2 = dx * dx + dy * dy;
        if (seg_len2 <= 0.0) continue;  // skip degenerate piece
        found = true;
        double t = ((qx - ax) * dx + (qy - ay) * dy) / seg_len2;
        t = std::min(std::max(t, 0.0), 1.0);
        const double fx = ax + t * dx, fy = ay + t * dy;
        const double d2 = (qx - fx) * (qx - fx) + (qy - fy) * (qy - fy);
        if (d2 < best_d2) {
            best_d2 = d2;
            const double seg_len = std::sqrt(seg_len2);
            const double cross = dx * (qy - fy) - dy * (qx - fx);
            best.arc = arc_acc + t * seg_len;
            best.offset = (cross >= 0.0 ? 1.0 : -1.0) * std::sqrt(d2);
            best.heading = std::atan2(dy, dx);
        }
        arc_acc += std::sqrt(seg_len2);
    }
    if (!found) throw std::invalid_argument("nearest_point: degenerate polyline");
    return best;
}

}  // namespace latstab
