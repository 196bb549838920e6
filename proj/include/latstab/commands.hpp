#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "analysis.hpp"
#include "config.hpp"
#include "design.hpp"
#include "io.hpp"
#include "simulate.hpp"

namespace latstab {

// Process exit codes shared by the command implementations and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitBlowUp = 2;
inline constexpr int kExitAnalysisPrecondition = 3;
inline constexpr int kExitDesignNotFound = 4;

namespace detail {

inline std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

}  // namespace detail

/// simulate: run the configured platoon, write trajectory/norms CSVs and a
/// certificate. Returns 0, or 2 when the blow-up guard fires.
inline int cmd_simulate(const ScenarioConfig& cfg, const std::string& out_dir, bool quiet,
                        std::ostream& err = std::cerr) {
    std::filesystem::create_directories(out_dir);
    Scenario sc = cfg.build_scenario();
    PlatoonTrajectory traj;
    try {
        traj = simulate(sc);
    } catch (const BlowUpError& e) {
        err << "error: " << e.what() << "\n";
        return kExitBlowUp;
    }
    reconstruct_xy(traj, sc.path);
    const NormReport rep = attenuation_report(traj, cfg.gains.output);

    if (cfg.outputs.trajectory_csv)
        write_trajectory_csv(detail::join(out_dir, "trajectory.csv"), traj);
    if (cfg.outputs.norms_csv) write_norms_csv(detail::join(out_dir, "norms.csv"), rep);
    if (cfg.outputs.path_csv) write_path_csv(detail::join(out_dir, "path.csv"), sc.path);
    if (cfg.outputs.learned_csv && sc.strategy == Strategy::lfp_dt)
        for (size_t v = 0; v < traj.vehicles.size(); ++v) {
            char name[32];
            std::snprintf(name, sizeof(name), "learned_v%02zu.csv", v + 1);
            write_learned_csv(detail::join(out_dir, name), traj, v);
        }
    if (cfg.outputs.certificate) {
        auto out = detail::open_out(detail::join(out_dir, "certificate.txt"));
        const Certificate cert = verdict(cfg.params, cfg.gains, cfg.strategy, cfg.gains.output);
        write_certificate(out, cert, cfg.gains);
        write_norm_summary(out, rep);
        out << "residual (max over grid): " << detail::fmt(residual_check(traj, sc)) << "\n";
        if (traj.small_angle_exceeded)
            out << "note: heading error exceeded " << kSmallAngleLimitRad
                << " rad; small-angle model validity is doubtful\n";
    }
    if (!quiet) {
        std::ostream& os = err;
        os << "simulated " << sc.platoon_size << " vehicles over " << sc.path.length()
           << " m; " << to_string(rep.verdict) << "\n";
    }
    return kExitOk;
}

/// analyze: frequency-domain certificate only. Returns 0, or 3 when a
/// polynomial precondition fails (e.g. unstable closed loop).
inline int cmd_analyze(const ScenarioConfig& cfg, const std::string& out_dir, bool quiet,
                       std::ostream& err = std::cerr) {
    std::filesystem::create_directories(out_dir);
    Certificate cert;
    try {
        cert = verdict(cfg.params, cfg.gains, cfg.strategy, cfg.gains.output);
    } catch (const std::domain_error& e) {
        err << "error: analysis precondition failed: " << e.what() << "\n";
        return kExitAnalysisPrecondition;
    }
    auto out = detail::open_out(detail::join(out_dir, "certificate.txt"));
    write_certificate(out, cert, cfg.gains);
    if (!quiet) err << "verdict: " << to_string(cert.status) << "\n";
    return kExitOk;
}

/// design: learning-gain search per the iterative design procedure. Returns 0
/// with the accepted gains, or 4 when no candidate passes.
inline int cmd_design(const ScenarioConfig& cfg, const std::string& out_dir, bool quiet,
                      std::ostream& err = std::cerr) {
    if (!cfg.design) {
        err << "error: design command needs a [design] section\n";
        return kExitConfigError;
    }
    std::filesystem::create_directories(out_dir);
    DesignResult res;
    try {
        res = design_lfp(*cfg.design);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    auto out = detail::open_out(detail::join(out_dir, "design.txt"));
    if (!res.found) {
        out << "design: NOT-FOUND\n" << res.diagnostics << "\n";
        err << "design not found: " << res.diagnostics << "\n";
        return kExitDesignNotFound;
    }
    out << "design: ACCEPTED" << (res.numeric_only ? " (NUMERIC-ONLY)" : "") << "\n";
    if (!res.diagnostics.empty()) out << res.diagnostics << "\n";
    write_certificate(out, res.certificate, res.gains);
    if (!quiet)
        err << "accepted k_lp = " << res.gains.klp << ", k_ld = " << res.gains.kld << "\n";
    return kExitOk;
}

}  // namespace latstab
