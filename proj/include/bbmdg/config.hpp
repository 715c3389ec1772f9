#pragma once

// Flat `key = value` experiment descriptions.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bbmdg/errors.hpp"
#include "bbmdg/basis.hpp"
#include "bbmdg/bbm.hpp"
#include "bbmdg/mesh.hpp"
#include "bbmdg/newton.hpp"

namespace bbmdg {

enum class Problem { soliton, two_wave };
enum class Scheme { DG1, DG2, TR, IM, RK4 };
enum class TransferKind { interpolate, conservative };

inline const char* to_string(Scheme s)
{
    switch (s) {
    case Scheme::DG1: return "DG1";
    case Scheme::DG2: return "DG2";
    case Scheme::TR: return "TR";
    case Scheme::IM: return "IM";
    case Scheme::RK4: return "RK4";
    }
    return "?";
}

/// Basis each scheme is paired with.
inline BasisKind basis_for(Scheme s)
{
    return (s == Scheme::DG1 || s == Scheme::TR) ? BasisKind::CubicLagrange
                                                 : BasisKind::PeriodicCubicBSpline;
}

/// Hamiltonian the scheme is built around (preserved by DG1/DG2, monitored for the others).
inline Hamiltonian designated_hamiltonian(Scheme s)
{
    return (s == Scheme::DG1 || s == Scheme::TR) ? Hamiltonian::H1 : Hamiltonian::H2;
}

inline bool is_discrete_gradient(Scheme s) { return s == Scheme::DG1 || s == Scheme::DG2; }

struct RunConfig {
    Problem problem = Problem::soliton;
    Scheme scheme = Scheme::DG1;
    bool moving_mesh = false;
    TransferKind transfer = TransferKind::interpolate;
    SolitonParams wave;
    std::size_t M = 200;
    double dt = 0.1;
    double t_end = 50.0;
    double monitor_k = 1.0;
    bool monitor_smoothing = false;
    EquidistributionOptions equidistribution;
    std::size_t remesh_every = 1;
    SolverConfig solver;
    std::string output_dir = "out";
    std::vector<double> snapshot_times;
    std::size_t snapshot_samples_per_element = 10;
    std::size_t output_every = 1;

    BasisKind basis() const { return basis_for(scheme); }
    Hamiltonian hamiltonian() const { return designated_hamiltonian(scheme); }
    std::size_t steps() const
    {
        return static_cast<std::size_t>(std::llround(t_end / dt));
    }
};

namespace detail {

inline std::string trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

class ConfigBuilder {
public:
    void set(const std::string& key, const std::string& value, const std::string& where)
    {
        where_[key] = where;
        auto fail = [&](const std::string& msg) { throw ConfigError(where + ": " + msg); };
        auto real = [&]() {
            double v = 0.0;
            const char* first = value.data();
            const char* last = value.data() + value.size();
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
                fail("expected a real number for '" + key + "', got '" + value + "'");
            }
            return v;
        };
        auto integer = [&]() {
            long long v = 0;
            const char* first = value.data();
            const char* last = value.data() + value.size();
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr != last || v < 0) {
                fail("expected a nonnegative integer for '" + key + "', got '" + value + "'");
            }
            return v;
        };
        auto boolean = [&]() {
            const std::string v = lower(value);
            if (v == "true" || v == "1" || v == "yes" || v == "on") {
                return true;
            }
            if (v == "false" || v == "0" || v == "no" || v == "off") {
                return false;
            }
            fail("expected a boolean for '" + key + "', got '" + value + "'");
            return false;
        };

        const std::string v = lower(value);
        if (key == "problem") {
            if (v == "soliton") {
                cfg_.problem = Problem::soliton;
            } else if (v == "two_wave") {
                cfg_.problem = Problem::two_wave;
            } else {
                fail("unknown problem '" + value + "' (soliton, two_wave)");
            }
        } else if (key == "scheme") {
            if (v == "dg1") {
                cfg_.scheme = Scheme::DG1;
            } else if (v == "dg2") {
                cfg_.scheme = Scheme::DG2;
            } else if (v == "tr") {
                cfg_.scheme = Scheme::TR;
            } else if (v == "im") {
                cfg_.scheme = Scheme::IM;
            } else if (v == "rk4") {
                cfg_.scheme = Scheme::RK4;
            } else {
                fail("unknown scheme '" + value + "' (DG1, DG2, TR, IM, RK4)");
            }
        } else if (key == "basis") {
            if (v == "cubic_lagrange" || v == "lagrange") {
                basis_ = BasisKind::CubicLagrange;
            } else if (v == "bspline" || v == "b_spline") {
                basis_ = BasisKind::PeriodicCubicBSpline;
            } else {
                fail("unknown basis '" + value + "' (cubic_lagrange, bspline)");
            }
        } else if (key == "transfer") {
            if (v == "interpolate") {
                transfer_ = TransferKind::interpolate;
            } else if (v == "conservative") {
                transfer_ = TransferKind::conservative;
            } else {
                fail("unknown transfer '" + value + "' (interpolate, conservative)");
            }
        } else if (key == "moving_mesh") {
            cfg_.moving_mesh = boolean();
        } else if (key == "c") {
            cfg_.wave.c = real();
        } else if (key == "c_r") {
            cfg_.wave.c_r = real();
        } else if (key == "c_s") {
            cfg_.wave.c_s = real();
        } else if (key == "x_r") {
            cfg_.wave.x_r = real();
        } else if (key == "x_s") {
            cfg_.wave.x_s = real();
        } else if (key == "L") {
            cfg_.wave.L = real();
        } else if (key == "M") {
            cfg_.M = static_cast<std::size_t>(integer());
        } else if (key == "dt") {
            cfg_.dt = real();
        } else if (key == "t_end") {
            cfg_.t_end = real();
        } else if (key == "monitor_k") {
            cfg_.monitor_k = real();
        } else if (key == "monitor_smoothing") {
            cfg_.monitor_smoothing = boolean();
        } else if (key == "deboor_tol") {
            cfg_.equidistribution.tol = real();
        } else if (key == "deboor_max_sweeps") {
            cfg_.equidistribution.max_sweeps = static_cast<std::size_t>(integer());
        } else if (key == "deboor_relaxation") {
            cfg_.equidistribution.relaxation = real();
        } else if (key == "remesh_every") {
            cfg_.remesh_every = static_cast<std::size_t>(integer());
        } else if (key == "newton_tol") {
            cfg_.solver.newton_tol = real();
        } else if (key == "max_newton_iters") {
            cfg_.solver.max_newton_iters = static_cast<int>(integer());
        } else if (key == "jacobian_mode") {
            if (v == "analytic") {
                cfg_.solver.jacobian_mode = JacobianMode::analytic;
            } else if (v == "finite_difference") {
                cfg_.solver.jacobian_mode = JacobianMode::finite_difference;
            } else {
                fail("unknown jacobian_mode '" + value + "' (analytic, finite_difference)");
            }
        } else if (key == "fd_epsilon") {
            cfg_.solver.fd_epsilon = real();
        } else if (key == "frozen_operator") {
            cfg_.solver.frozen_operator = boolean();
        } else if (key == "euler_predictor") {
            cfg_.solver.euler_predictor = boolean();
        } else if (key == "output_dir") {
            cfg_.output_dir = value;
        } else if (key == "snapshot_times") {
            cfg_.snapshot_times.clear();
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                item = trim(item);
                if (item.empty()) {
                    continue;
                }
                double t = 0.0;
                auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), t);
                if (ec != std::errc() || ptr != item.data() + item.size()) {
                    fail("bad snapshot time '" + item + "'");
                }
                cfg_.snapshot_times.push_back(t);
            }
        } else if (key == "snapshot_samples_per_element") {
            cfg_.snapshot_samples_per_element = static_cast<std::size_t>(integer());
        } else if (key == "output_every") {
            cfg_.output_every = static_cast<std::size_t>(integer());
        } else {
            fail("unknown key '" + key + "'");
        }
    }

    RunConfig finish()
    {
        RunConfig cfg = cfg_;
        cfg.transfer = transfer_.value_or(cfg.scheme == Scheme::DG2 ? TransferKind::conservative
                                                                    : TransferKind::interpolate);
        auto at = [this](const char* key) {
            auto it = where_.find(key);
            return it == where_.end() ? std::string("config") : it->second;
        };
        if (basis_ && *basis_ != cfg.basis()) {
            throw ConfigError(at("basis") + ": scheme " + to_string(cfg.scheme) + " requires basis " +
                              to_string(cfg.basis()) + ", config asks for " + to_string(*basis_));
        }
        if (!(cfg.dt > 0.0)) {
            throw ConfigError(at("dt") + ": dt must be positive");
        }
        if (!(cfg.t_end >= 0.0)) {
            throw ConfigError(at("t_end") + ": t_end must be nonnegative");
        }
        if (!(cfg.wave.L > 0.0)) {
            throw ConfigError(at("L") + ": L must be positive");
        }
        if (cfg.M < Mesh1D::min_elements) {
            throw ConfigError(at("M") + ": M must be at least 4 elements");
        }
        if (cfg.problem == Problem::soliton && !(cfg.wave.c > 1.0)) {
            throw ConfigError(at("c") + ": soliton speed c must exceed 1");
        }
        if (cfg.problem == Problem::two_wave && (!(cfg.wave.c_r > 1.0) || !(cfg.wave.c_s > 1.0))) {
            throw ConfigError(at("c_r") + ": wave speeds c_r and c_s must exceed 1");
        }
        if (!(cfg.monitor_k >= 0.0)) {
            throw ConfigError(at("monitor_k") + ": monitor_k must be nonnegative");
        }
        if (cfg.remesh_every < 1) {
            throw ConfigError(at("remesh_every") + ": remesh_every must be at least 1");
        }
        if (cfg.output_every < 1) {
            throw ConfigError(at("output_every") + ": output_every must be at least 1");
        }
        if (cfg.snapshot_samples_per_element < 1) {
            throw ConfigError(at("snapshot_samples_per_element") + ": must be at least 1");
        }
        if (!(cfg.equidistribution.tol > 0.0)) {
            throw ConfigError(at("deboor_tol") + ": deboor_tol must be positive");
        }
        if (!(cfg.equidistribution.relaxation > 0.0 && cfg.equidistribution.relaxation <= 1.0)) {
            throw ConfigError(at("deboor_relaxation") + ": deboor_relaxation must lie in (0, 1]");
        }
        try {
            validate(cfg.solver);
        } catch (const ParameterError& e) {
            throw ConfigError(std::string("solver settings: ") + e.what());
        }
        return cfg;
    }

private:
    RunConfig cfg_;
    std::optional<BasisKind> basis_;
    std::optional<TransferKind> transfer_;
    std::map<std::string, std::string> where_;
};

inline std::pair<std::string, std::string> split_assignment(const std::string& line,
                                                            const std::string& where)
{
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
        throw ConfigError(where + ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) {
        throw ConfigError(where + ": missing key");
    }
    return {std::move(key), std::move(value)};
}

} // namespace detail

/// Parse a config document, then apply `key=value` overrides in order.
inline RunConfig parse_config(std::string_view text,
                              const std::vector<std::string>& overrides = {})
{
    detail::ConfigBuilder builder;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) {
            raw.erase(hash);
        }
        const std::string line = detail::trim(raw);
        if (line.empty()) {
            continue;
        }
        const std::string where = "line " + std::to_string(line_no);
        auto [key, value] = detail::split_assignment(line, where);
        builder.set(key, value, where);
    }
    for (std::size_t i = 0; i < overrides.size(); ++i) {
        const std::string where = "override " + std::to_string(i + 1);
        auto [key, value] = detail::split_assignment(overrides[i], where);
        builder.set(key, value, where);
    }
    return builder.finish();
}

} // namespace bbmdg
