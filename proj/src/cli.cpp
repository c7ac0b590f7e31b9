#include "urnldp/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "urnldp/io.hpp"
#include "urnldp/kron_embedding.hpp"
#include "urnldp/mogulskii.hpp"
#include "urnldp/stats.hpp"
#include "urnldp/variational.hpp"

namespace urnldp::cli {

using nlohmann::json;

namespace {

struct CommandName {
    Command command;
    const char* name;
};

constexpr CommandName kCommands[] = {
    {Command::validate, "validate"},
    {Command::simulate, "simulate"},
    {Command::exact_dist, "exact-dist"},
    {Command::mogulskii_table, "mogulskii-table"},
    {Command::lagrangian_table, "lagrangian-table"},
    {Command::rate_endpoint, "rate-endpoint"},
    {Command::zero_cost, "zero-cost"},
    {Command::compare_cramer, "compare-cramer"},
    {Command::verify, "verify"},
};

template <class T>
T require(const std::optional<T>& v, const char* flag, Command c) {
    if (!v) throw ConfigError(command_name(c) + " requires " + flag);
    return *v;
}

UrnSpec load_validated(const RunConfig& cfg, std::ostream& err, bool& invalid) {
    const auto spec = io::load_spec(require(cfg.spec_path, "--spec", cfg.command));
    const auto report = validate_spec(spec);
    invalid = !report.ok();
    if (invalid) {
        err << "spec validation failed: " << report.violations.size() << " violation(s); first: "
            << report.violations.front().message << " at alpha = " << report.violations.front().alpha << '\n';
    }
    return spec;
}

json extended_to_json(ExtendedReal x) {
    if (x.is_finite()) return x.value();
    return x.to_string();
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e", x);
    return buf;
}

// ---------------------------------------------------------------------------
// verify

class CheckLog {
public:
    explicit CheckLog(std::ostream& out) : out_(out) {}
    void check(const std::string& name, bool pass, const std::string& detail) {
        out_ << (pass ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
        if (!pass) ++failures_;
    }
    [[nodiscard]] int failures() const { return failures_; }

private:
    std::ostream& out_;
    int failures_{0};
};

UrnSpec linear_k1(double a, double b) { return UrnSpec(1, {UrnCurve::polynomial({a, b})}); }

}  // namespace

Command parse_command(const std::string& name) {
    for (const auto& c : kCommands)
        if (name == c.name) return c.command;
    throw ConfigError("unknown command \"" + name + "\"");
}

std::string command_name(Command c) {
    for (const auto& e : kCommands)
        if (e.command == c) return e.name;
    return "?";
}

Format parse_format(const std::string& name) {
    if (name == "csv") return Format::csv;
    if (name == "json") return Format::json;
    throw ConfigError("--format must be csv or json");
}

EndpointEvent parse_event(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw ConfigError("--event expects LO,HI");
    try {
        std::size_t used_lo = 0, used_hi = 0;
        const std::string lo_s = text.substr(0, comma), hi_s = text.substr(comma + 1);
        const double lo = std::stod(lo_s, &used_lo);
        const double hi = std::stod(hi_s, &used_hi);
        if (used_lo != lo_s.size() || used_hi != hi_s.size()) throw ConfigError("--event expects LO,HI");
        return EndpointEvent(lo, hi);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("--event expects LO,HI with LO <= HI");
    }
}

int verify(std::uint64_t seed, std::ostream& out) {
    CheckLog log(out);
    const int grid = 512;

    // --- K = 1: binary urn -------------------------------------------------
    {
        double xi_err = 0.0, l0_err = 0.0;
        for (int i = 1; i < grid; ++i) {
            const double a = static_cast<double>(i) / grid;
            xi_err = std::max(xi_err, std::abs(xi_invert(a, 1).xi - a / (1.0 - a)));
            const double closed = std::log(2.0) + a * std::log(a) + (1.0 - a) * std::log(1.0 - a);
            l0_err = std::max(l0_err, std::abs(mogulskii_lagrangian(a, 1) - closed));
        }
        log.check("k1.xi_closed_form", xi_err <= 1e-10, "max |xi - a/(1-a)| = " + fmt(xi_err));
        log.check("k1.mogulskii_closed_form", l0_err <= 1e-10, "max |L0 - (log2 + a log a + (1-a) log(1-a))| = " + fmt(l0_err));
    }
    {
        const auto spec = linear_k1(0.2, 0.6);
        double err = 0.0;
        for (int i = 0; i <= 64; ++i) {
            for (int j = 0; j <= 64; ++j) {
                const double a = i / 64.0, b = j / 64.0;
                const double p = 0.2 + 0.6 * b;
                const double two_term = a * std::log(p) + (1.0 - a) * std::log(1.0 - p);
                err = std::max(err, std::abs(scaled_lagrangian(spec, a, b).value() - two_term));
            }
        }
        log.check("k1.scaled_lagrangian_two_term", err <= 1e-14, "max deviation = " + fmt(err));

        const auto flow = zero_cost_flow(spec, 200);
        double worst = 0.0;
        for (const auto& c : flow.cells) worst = std::max(worst, std::abs(c.local_rate.value()));
        log.check("k1.zero_cost_flow_rate", worst <= 1e-10, "max |local rate| along flow = " + fmt(worst));
    }
    {
        const auto spec = constant_spec({0.5});
        const EndpointEvent ev(0.25, 0.255);
        OptimizeOptions opt;
        opt.seed = seed;
        const auto res = optimize_endpoint(spec, ev, 200, opt);
        const std::size_t sizes[] = {500, 1000, 2000};
        const auto ex = extrapolate_event_rate(spec, ev, sizes);
        const double gap = std::abs(-res.entropy_density - ex.intercept);
        log.check("k1.endpoint_rate_vs_enumeration", gap <= 5e-3,
                  "entropy density " + fmt(res.entropy_density) + ", enumeration " + fmt(-ex.intercept) +
                      ", gap " + fmt(gap));
    }
    {
        const auto spec = linear_k1(0.2, 0.6);
        const std::size_t N = 30, runs = 20000;
        const auto freq = simulate_histogram(spec, N, runs, seed);
        const auto exact = exact_distribution(spec, N);
        const auto chi = chi_square_test(freq, exact, runs);
        log.check("k1.monte_carlo_vs_exact", chi.p_value > 1e-4,
                  "chi2 = " + fmt(chi.statistic) + ", dof = " + std::to_string(chi.degrees_of_freedom) +
                      ", p = " + fmt(chi.p_value));
    }

    // --- K = 2 -------------------------------------------------------------
    {
        double err = 0.0, unity = 0.0;
        for (int i = 0; i <= grid; ++i) {
            const double a = -1.0 + 4.0 * i / grid;
            err = std::max(err, std::abs(kron_delta(2, 0, a) - (1.0 - a) * (1.0 - 0.5 * a)));
            err = std::max(err, std::abs(kron_delta(2, 1, a) - a * (2.0 - a)));
            err = std::max(err, std::abs(kron_delta(2, 2, a) - 0.5 * a * (a - 1.0)));
            unity = std::max(unity, std::abs(kron_delta(2, 0, a) + kron_delta(2, 1, a) + kron_delta(2, 2, a) - 1.0));
        }
        log.check("k2.kron_delta_closed_forms", err <= 1e-12 && unity <= 1e-12,
                  "max deviation " + fmt(err) + ", partition of unity " + fmt(unity));
    }
    {
        // The cubic (2-a) xi^3 - xi^2 - xi + a = 0 has the root xi = 1; the
        // remaining quadratic (2-a) xi^2 + (1-a) xi - a = 0 has one positive root.
        double err = 0.0, cubic = 0.0;
        for (int i = 1; i < grid; ++i) {
            const double a = 2.0 * i / grid;
            const double closed = a == 1.0 ? 1.0
                                           : (-(1.0 - a) + std::sqrt((1.0 - a) * (1.0 - a) + 4.0 * a * (2.0 - a))) /
                                                 (2.0 * (2.0 - a));
            const double xi = xi_invert(a, 2).xi;
            err = std::max(err, std::abs(xi - closed));
            cubic = std::max(cubic, std::abs((2.0 - a) * xi * xi * xi - xi * xi - xi + a));
        }
        log.check("k2.cubic_xi", err <= 1e-10 && cubic <= 1e-9,
                  "max |xi - quadratic root| = " + fmt(err) + ", cubic residual " + fmt(cubic));
    }
    {
        const double l3 = std::log(3.0);
        double sym = 0.0;
        for (int i = 0; i <= grid; ++i) {
            const double a = 2.0 * i / grid;
            sym = std::max(sym, std::abs(mogulskii_lagrangian(a, 2) - mogulskii_lagrangian(2.0 - a, 2)));
        }
        const bool ok = std::abs(mogulskii_lagrangian(0.0, 2) - l3) <= 1e-12 &&
                        std::abs(mogulskii_lagrangian(1.0, 2)) <= 1e-12 &&
                        std::abs(mogulskii_lagrangian(2.0, 2) - l3) <= 1e-12 &&
                        std::abs(mogulskii_lagrangian(1.0, 2, true) + l3) <= 1e-12 && sym <= 1e-9;
        log.check("k2.mogulskii_table", ok,
                  "L0(0) = " + fmt(mogulskii_lagrangian(0.0, 2)) + ", L0(1) = " + fmt(mogulskii_lagrangian(1.0, 2)) +
                      ", L0(2) = " + fmt(mogulskii_lagrangian(2.0, 2)) + ", symmetry " + fmt(sym));
    }
    {
        const auto degenerate = constant_spec({0.0, 0.5});
        const auto local = local_rate(degenerate, 1.0, 0.7);
        const double cr = cramer_local_rate(degenerate, 1.0, 0.7);
        log.check("k2.cramer_discrepancy_degenerate", local.is_pos_inf() && cr == 0.0,
                  "local rate " + local.to_string(6) + ", cramer rate " + fmt(cr));

        const UrnSpec smooth(2, {UrnCurve::polynomial({0.3, 0.1}), UrnCurve::polynomial({0.2, 0.1})});
        const auto cmp = compare_cramer(smooth, 64);
        log.check("k2.cramer_comparison_report", cmp.points.size() == 64u * 64u,
                  std::to_string(cmp.finite_points) + " finite points, " + std::to_string(cmp.undercut_points) +
                      " with local < cramer - 1e-9, max undercut " + fmt(cmp.max_undercut));
    }
    {
        const UrnSpec spec(2, {UrnCurve::polynomial({0.0, 0.25}), UrnCurve::polynomial({0.0, 0.25})});
        const auto flow = zero_cost_flow(spec, 200);
        double max_local = 0.0, max_cramer = 0.0;
        bool finite = true;
        for (const auto& c : flow.cells) {
            finite = finite && c.local_rate.is_finite();
            if (c.local_rate.is_finite()) max_local = std::max(max_local, std::abs(c.local_rate.value()));
            max_cramer = std::max(max_cramer, c.cramer_rate);
        }
        log.check("k2.zero_cost_flow_diagnostic", finite && max_cramer <= 1e-10,
                  "endpoint " + fmt(flow.path.endpoint_average()) + ", max |local rate| " + fmt(max_local) +
                      ", max cramer rate " + fmt(max_cramer));
    }
    out << (log.failures() == 0 ? "verify: all checks passed\n"
                                : "verify: " + std::to_string(log.failures()) + " check(s) failed\n");
    return log.failures();
}

// ---------------------------------------------------------------------------
// run

int run(const RunConfig& cfg, std::ostream& out_default, std::ostream& err) {
    std::unique_ptr<std::ofstream> file;
    std::ostream* out = &out_default;
    if (cfg.out_path) {
        file = std::make_unique<std::ofstream>(*cfg.out_path);
        if (!*file) throw io::IoError("cannot open output file " + *cfg.out_path);
        out = file.get();
    }
    if (cfg.threads < 1) throw ConfigError("--threads must be >= 1");
    if (cfg.grid && *cfg.grid < 2) throw ConfigError("--grid must be >= 2");
    if (cfg.floor < 0.0) throw ConfigError("--floor must be >= 0");

    int status = kOk;
    bool invalid = false;
    switch (cfg.command) {
        case Command::validate: {
            const auto spec = io::load_spec(require(cfg.spec_path, "--spec", cfg.command));
            const auto report = validate_spec(spec);
            if (cfg.format.value_or(Format::csv) == Format::json) {
                json doc = json::array();
                for (const auto& v : report.violations)
                    doc.push_back({{"k", v.k}, {"alpha", v.alpha}, {"value", v.value}, {"message", v.message}});
                *out << json{{"ok", report.ok()}, {"violations", doc}}.dump(2) << '\n';
            } else {
                io::CsvWriter w(*out, {"k", "alpha", "value"});
                for (const auto& v : report.violations) w.row({static_cast<double>(v.k), v.alpha, v.value});
            }
            if (!report.ok()) status = kValidationError;
            break;
        }
        case Command::simulate: {
            const auto spec = load_validated(cfg, err, invalid);
            if (invalid) return kValidationError;
            const auto N = require(cfg.N, "--N", cfg.command);
            if (N < 1 || cfg.runs < 1) throw ConfigError("--N and --runs must be positive");
            const auto freq = simulate_histogram(spec, N, cfg.runs, cfg.seed, cfg.threads);
            if (cfg.format.value_or(Format::csv) == Format::json) {
                const auto first = simulate(spec, N, derive_seed(cfg.seed, 0));
                *out << json{{"N", N}, {"runs", cfg.runs}, {"seed", cfg.seed}, {"first_history", first.steps()},
                             {"histogram", freq}}
                            .dump(2)
                     << '\n';
            } else {
                io::write_distribution_csv(*out, freq, N);
            }
            break;
        }
        case Command::exact_dist: {
            const auto spec = load_validated(cfg, err, invalid);
            if (invalid) return kValidationError;
            const auto N = require(cfg.N, "--N", cfg.command);
            if (N < 1) throw ConfigError("--N must be positive");
            const auto dist = exact_distribution(spec, N);
            if (cfg.format.value_or(Format::csv) == Format::json) {
                *out << json{{"N", N}, {"K", spec.capacity()}, {"probability", dist}}.dump(2) << '\n';
            } else {
                io::write_distribution_csv(*out, dist, N);
            }
            break;
        }
        case Command::mogulskii_table: {
            int K = 0;
            if (cfg.K) {
                K = *cfg.K;
            } else if (cfg.spec_path) {
                K = io::load_spec(*cfg.spec_path).capacity();
            } else {
                throw ConfigError("mogulskii-table requires --K or --spec");
            }
            if (K < 1) throw ConfigError("--K must be >= 1");
            const auto rows = mogulskii_table(K, cfg.grid.value_or(100));
            if (cfg.format.value_or(Format::csv) == Format::json) {
                json doc = json::array();
                for (const auto& r : rows)
                    doc.push_back({{"alpha", r.alpha},
                                   {"xi", extended_to_json(r.xi)},
                                   {"beta_star", extended_to_json(r.beta_star)},
                                   {"L0_unshifted", r.l0_unshifted},
                                   {"L0_shifted", r.l0_shifted}});
                *out << doc.dump(2) << '\n';
            } else {
                io::write_mogulskii_csv(*out, rows);
            }
            break;
        }
        case Command::lagrangian_table: {
            const auto spec = load_validated(cfg, err, invalid);
            if (invalid) return kValidationError;
            const int g = cfg.grid.value_or(64);
            const double K = spec.capacity();
            io::CsvWriter w(*out, {"alpha", "beta", "lagrangian", "local_rate"});
            for (int ib = 0; ib < g; ++ib) {
                for (int ia = 0; ia < g; ++ia) {
                    const double a = K * ia / (g - 1), b = K * ib / (g - 1);
                    w.row({a, b, scaled_lagrangian(spec, a, b, cfg.floor), local_rate(spec, a, b, cfg.floor)});
                }
            }
            break;
        }
        case Command::rate_endpoint: {
            const auto spec = load_validated(cfg, err, invalid);
            if (invalid) return kValidationError;
            const auto event = require(cfg.event, "--event", cfg.command);
            const auto T = cfg.T.value_or(200);
            OptimizeOptions opt;
            opt.seed = cfg.seed;
            opt.threads = cfg.threads;
            if (cfg.floor > 0.0) opt.floor = cfg.floor;
            const auto result = optimize_endpoint(spec, event, T, opt);
            if (cfg.format.value_or(Format::json) == Format::json) {
                *out << io::rate_result_to_json(result) << '\n';
            } else {
                const auto cells = rate_profile(spec, result.optimal_path, opt.floor);
                io::write_profile_csv(*out, cells);
            }
            if (!result.converged) {
                err << "rate-endpoint: optimizer did not converge (restart spread "
                    << result.restarts_agreement << ")\n";
                status = kNonConvergence;
            }
            break;
        }
        case Command::zero_cost: {
            const auto spec = load_validated(cfg, err, invalid);
            if (invalid) return kValidationError;
            const auto flow = zero_cost_flow(spec, cfg.T.value_or(200), cfg.floor);
            if (cfg.format.value_or(Format::csv) == Format::json) {
                json cells = json::array();
                for (const auto& c : flow.cells)
                    cells.push_back({{"j", c.j},
                                     {"velocity", c.velocity},
                                     {"psi", c.psi},
                                     {"local_rate", extended_to_json(c.local_rate)},
                                     {"cramer_rate", extended_to_json(c.cramer_rate)}});
                *out << json{{"initial_fixed_points", flow.initial_fixed_points},
                             {"velocities", flow.path.velocities()},
                             {"cells", cells}}
                            .dump(2)
                     << '\n';
            } else {
                io::write_profile_csv(*out, flow.cells);
            }
            break;
        }
        case Command::compare_cramer: {
            const auto spec = load_validated(cfg, err, invalid);
            if (invalid) return kValidationError;
            const auto cmp = compare_cramer(spec, cfg.grid.value_or(64), cfg.floor);
            if (cfg.format.value_or(Format::csv) == Format::json) {
                *out << json{{"points", cmp.points.size()},
                             {"finite_points", cmp.finite_points},
                             {"undercut_points", cmp.undercut_points},
                             {"max_undercut", cmp.max_undercut}}
                            .dump(2)
                     << '\n';
            } else {
                io::write_cramer_csv(*out, cmp);
            }
            break;
        }
        case Command::verify: {
            if (verify(cfg.seed, *out) != 0) status = kNonConvergence;
            break;
        }
    }
    out->flush();
    if (!*out) throw io::IoError("write failed");
    return status;
}

int run_guarded(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    auto fail = [&](const std::exception& e, int code) {
        err << "error: " << e.what() << '\n';
        return code;
    };
    try {
        return run(cfg, out, err);
    } catch (const ConfigError& e) {
        return fail(e, kConfigError);
    } catch (const io::SpecFormatError& e) {
        return fail(e, kConfigError);
    } catch (const io::IoError& e) {
        return fail(e, kIoError);
    } catch (const std::length_error& e) {
        return fail(e, kConfigError);
    } catch (const std::invalid_argument& e) {
        return fail(e, kConfigError);
    } catch (const std::out_of_range& e) {
        return fail(e, kConfigError);
    } catch (const std::domain_error& e) {
        return fail(e, kValidationError);
    } catch (const std::exception& e) {
        return fail(e, kNonConvergence);
    }
}

}  // namespace urnldp::cli
