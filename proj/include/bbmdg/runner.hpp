#pragma once

// Experiment driver: builds the problem from a RunConfig, advances the chosen
// scheme with optional r-adaptivity every step and writes CSV output.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "bbmdg/config.hpp"
#include "bbmdg/diagnostics.hpp"
#include "bbmdg/steppers.hpp"
#include "bbmdg/transfer.hpp"

namespace bbmdg {

enum class ExitStatus : int { ok = 0, validation_error = 1, solver_failure = 2 };

struct SeriesRow {
    double t = 0.0;
    double H1 = 0.0;
    double H2 = 0.0;
    double phase_error = std::numeric_limits<double>::quiet_NaN();
    double shape_error = std::numeric_limits<double>::quiet_NaN();
    int newton_iters = 0;
};

struct RunResult {
    ExitStatus status = ExitStatus::ok;
    std::string message;
    std::vector<SeriesRow> series;
    /// Node positions at each output time (t, nodes).
    std::vector<std::pair<double, std::vector<double>>> meshes;
    std::vector<std::string> snapshot_files;
    State final_state;
    std::size_t dof_count = 0;
    std::size_t transfer_fallbacks = 0;
    bool meshes_ordered = true;
};

namespace detail {

inline std::string format_real(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string snapshot_name(double t)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "snapshot_%g.csv", t);
    return buf;
}

inline void write_snapshot(const std::filesystem::path& path, const State& state,
                           std::size_t per_element)
{
    std::ofstream out(path);
    out << "x,u\n";
    const Mesh1D& mesh = state.basis().mesh();
    for (std::size_t e = 0; e < mesh.elements(); ++e) {
        for (std::size_t s = 0; s < per_element; ++s) {
            const double x = mesh.left(e) + mesh.width(e) * static_cast<double>(s) /
                                                static_cast<double>(per_element);
            out << format_real(x) << ',' << format_real(state.basis().eval_field(state.u, x))
                << '\n';
        }
    }
    out << format_real(mesh.half_length()) << ','
        << format_real(state.basis().eval_field(state.u, mesh.half_length())) << '\n';
}

inline SeriesRow measure(const State& state, const RunConfig& cfg, int iters)
{
    const AssemblyCache& cache = *state.cache;
    SeriesRow row;
    row.t = state.t;
    row.H1 = h1(state.u, cache.A(), cache.E());
    row.H2 = h2(state.u, cache.A(), cache.D());
    row.newton_iters = iters;
    if (cfg.problem == Problem::soliton) {
        try {
            row.phase_error = phase_error(state, cfg.wave);
            row.shape_error = shape_error(state, cfg.wave);
        } catch (const DegeneratePeakError&) {
            // Left as NaN.
        }
    }
    return row;
}

inline StepResult fixed_step(Scheme scheme, const Vector& u, const AssemblyCache& cache,
                             double dt, const SolverConfig& solver)
{
    switch (scheme) {
    case Scheme::DG1: return dg1_step_fixed(u, cache, dt, solver);
    case Scheme::DG2: return dg2_step_fixed(u, cache, dt, solver);
    case Scheme::TR: return trapezoidal_step(u, cache, dt, solver);
    case Scheme::IM: return implicit_midpoint_step(u, cache, dt, solver);
    case Scheme::RK4: return rk4_step(u, cache, dt);
    }
    throw ParameterError("unknown scheme");
}

} // namespace detail

/// Advance one configured experiment. Files are written when cfg.output_dir is non-empty.
inline RunResult run(const RunConfig& cfg, std::ostream* log = nullptr)
{
    namespace fs = std::filesystem;
    RunResult result;
    const bool write = !cfg.output_dir.empty();
    const fs::path dir(cfg.output_dir);
    std::ofstream series_out;
    std::ofstream mesh_out;
    if (write) {
        fs::create_directories(dir);
        series_out.open(dir / "series.csv");
        series_out << "t,H1_p,H2_p,phase_error,shape_error,newton_iters\n";
        mesh_out.open(dir / "mesh.csv");
        mesh_out << "t";
        for (std::size_t i = 0; i <= cfg.M; ++i) {
            mesh_out << ",x" << i;
        }
        mesh_out << '\n';
    }

    auto initial = [&cfg](double x) {
        return cfg.problem == Problem::soliton ? exact_soliton(x, 0.0, cfg.wave)
                                               : initial_two_wave(x, cfg.wave);
    };

    State state;
    state.cache = std::make_shared<const AssemblyCache>(
        BasisSet(cfg.basis(), Mesh1D::uniform(cfg.wave.L, cfg.M)));
    state.u = discretize(*state.cache, initial);
    state.t = 0.0;
    result.dof_count = state.cache->dofs();
    if (log) {
        *log << "scheme " << to_string(cfg.scheme) << (cfg.moving_mesh ? "MM" : "") << ", "
             << cfg.M << " elements, " << result.dof_count << " dofs ("
             << to_string(cfg.basis()) << ")\n";
    }

    std::vector<bool> snapped(cfg.snapshot_times.size(), false);
    auto record = [&](const State& s, int iters, std::size_t step, bool force) {
        if (force || step % cfg.output_every == 0) {
            SeriesRow row = detail::measure(s, cfg, iters);
            result.series.push_back(row);
            const auto nodes = s.basis().mesh().nodes();
            result.meshes.emplace_back(s.t, std::vector<double>(nodes.begin(), nodes.end()));
            if (write) {
                series_out << detail::format_real(row.t) << ',' << detail::format_real(row.H1)
                           << ',' << detail::format_real(row.H2) << ','
                           << detail::format_real(row.phase_error) << ','
                           << detail::format_real(row.shape_error) << ',' << row.newton_iters
                           << '\n';
                mesh_out << detail::format_real(s.t);
                for (double x : nodes) {
                    mesh_out << ',' << detail::format_real(x);
                }
                mesh_out << '\n';
            }
        }
        for (std::size_t k = 0; k < cfg.snapshot_times.size(); ++k) {
            if (!snapped[k] && std::abs(s.t - cfg.snapshot_times[k]) <= 0.5 * cfg.dt) {
                snapped[k] = true;
                const std::string name = detail::snapshot_name(cfg.snapshot_times[k]);
                if (write) {
                    detail::write_snapshot(dir / name, s, cfg.snapshot_samples_per_element);
                }
                result.snapshot_files.push_back(name);
            }
        }
    };

    const std::size_t steps = cfg.steps();
    record(state, 0, 0, true);
    const Hamiltonian ham = cfg.hamiltonian();

    for (std::size_t n = 1; n <= steps; ++n) {
        try {
            StepResult step;
            const bool remesh = cfg.moving_mesh && (n - 1) % cfg.remesh_every == 0;
            if (remesh) {
                const BasisSet& basis = state.basis();
                const auto nodal = basis.nodal_values(state.u);
                MonitorSamples monitor = monitor_arc_length(nodal, basis.mesh(), cfg.monitor_k);
                if (cfg.monitor_smoothing) {
                    monitor = smooth_monitor(monitor);
                }
                Mesh1D next_mesh = equidistribute_deboor(basis.mesh(), monitor, cfg.equidistribution);
                auto next_cache =
                    std::make_shared<const AssemblyCache>(BasisSet(cfg.basis(), std::move(next_mesh)));
                const double I_old = hamiltonian_value(ham, state.u, *state.cache);
                Vector u_hat;
                bool conservative = false;
                if (cfg.transfer == TransferKind::conservative) {
                    try {
                        u_hat = conservative_transfer(state.u, *state.cache, *next_cache, ham,
                                                      cfg.solver)
                                    .u;
                        conservative = true;
                    } catch (const Error& e) {
                        ++result.transfer_fallbacks;
                        if (log) {
                            *log << "t = " << state.t
                                 << ": conservative transfer failed, falling back to interpolation ("
                                 << e.what() << ")\n";
                        }
                    }
                }
                if (!conservative) {
                    u_hat = interp_transfer(state.u, state.basis(), *next_cache);
                }
                if (is_discrete_gradient(cfg.scheme)) {
                    step = dg_moving_step(u_hat, I_old, *next_cache, ham, cfg.dt, cfg.solver,
                                          conservative);
                } else {
                    step = detail::fixed_step(cfg.scheme, u_hat, *next_cache, cfg.dt, cfg.solver);
                }
                state.cache = std::move(next_cache);
            } else {
                step = detail::fixed_step(cfg.scheme, state.u, *state.cache, cfg.dt, cfg.solver);
            }
            state.u = std::move(step.u_next);
            state.t = static_cast<double>(n) * cfg.dt;
            const auto nodes = state.basis().mesh().nodes();
            for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
                if (!(nodes[i + 1] > nodes[i])) {
                    result.meshes_ordered = false;
                }
            }
            if (!state.u.allFinite()) {
                throw NewtonFailure("non-finite state", state.u, std::numeric_limits<double>::infinity(), 0);
            }
            record(state, step.newton_iters, n, n == steps);
        } catch (const Error& e) {
            result.status = ExitStatus::solver_failure;
            result.message = "step " + std::to_string(n) + " (t = " +
                             detail::format_real(static_cast<double>(n) * cfg.dt) +
                             ") failed: " + e.what();
            if (write) {
                detail::write_snapshot(dir / "snapshot_failure.csv", state,
                                       cfg.snapshot_samples_per_element);
            }
            if (log) {
                *log << result.message << '\n';
            }
            break;
        }
    }
    result.final_state = state;
    return result;
}

} // namespace bbmdg
