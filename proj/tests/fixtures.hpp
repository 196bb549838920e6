#pragma once

// Shared benchmark fixtures: a Lincoln MKZ parameter set at 10 m/s and the
// string-stable learn-from-predecessor gain design used across the suites.

#include "latstab/control.hpp"
#include "latstab/vehicle.hpp"

namespace fixtures {

inline latstab::VehicleParams mkz_params(double vx = 10.0) {
    latstab::VehicleParams p;
    p.m = 1896.0;
    p.iz = 3803.0;
    p.cf = 400000.0;
    p.cr = 381900.0;
    p.a = 1.2682;
    p.b = 1.5818;
    p.vx = vx;
    return p;
}

inline latstab::GainSet designed_lfp_gains() {
    latstab::GainSet g;
    g.kp = {0.06, 0.96};
    g.kd = {0.0, 0.08};
    g.kff = 1.59;
    g.output = latstab::OutputSelector::lateral;
    g.klp = -0.04;
    g.kld = -0.3;
    return g;
}

}  // namespace fixtures
