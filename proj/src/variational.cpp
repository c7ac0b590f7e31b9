#include "urnldp/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "urnldp/mogulskii.hpp"
#include "urnldp/root_finding.hpp"

namespace urnldp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double l0_term(double alpha, int K, Gauge gauge) {
    if (gauge == Gauge::shifted) return mogulskii_lagrangian(alpha, K, true);
    return mogulskii_lagrangian(alpha, K, false) + (-std::log(K + 1.0));
}

ExtendedReal local_rate_from(int K, double alpha, std::span<const double> probs, double floor, Gauge gauge) {
    return ExtendedReal(l0_term(alpha, K, gauge)) - scaled_lagrangian_from(K, alpha, probs, floor);
}

double clamp_unit(double x, int K) { return std::clamp(x, 0.0, static_cast<double>(K)); }

}  // namespace

ExtendedReal local_rate(const UrnSpec& spec, double alpha, double beta, double floor) {
    std::vector<double> probs(static_cast<std::size_t>(spec.capacity() + 1));
    urn_vector(spec, beta, probs);
    return local_rate_from(spec.capacity(), alpha, probs, floor, Gauge::shifted);
}

double cramer_rate(std::span<const double> probs, double alpha) {
    int k_min = -1, k_max = -1;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        if (probs[k] > 0.0) {
            if (k_min < 0) k_min = static_cast<int>(k);
            k_max = static_cast<int>(k);
        }
    }
    if (k_min < 0) throw std::invalid_argument("cramer_rate: law has no mass");
    const double edge_tol = 1e-12;
    if (alpha < k_min - edge_tol || alpha > k_max + edge_tol) return kInf;
    if (k_min == k_max) return 0.0;
    if (std::abs(alpha - k_min) <= edge_tol) return -std::log(probs[static_cast<std::size_t>(k_min)]);
    if (std::abs(alpha - k_max) <= edge_tol) return -std::log(probs[static_cast<std::size_t>(k_max)]);

    // log sum_k p_k e^{k l}, shifted by the dominant exponent
    auto log_mgf = [&](double l) {
        const double shift = l > 0.0 ? k_max * l : k_min * l;
        double z = 0.0;
        for (int k = k_min; k <= k_max; ++k) {
            const double p = probs[static_cast<std::size_t>(k)];
            if (p > 0.0) z += p * std::exp(k * l - shift);
        }
        return shift + std::log(z);
    };
    auto tilted = [&](double l) {
        const double shift = l > 0.0 ? k_max * l : k_min * l;
        double z = 0.0, m1 = 0.0, m2 = 0.0;
        for (int k = k_min; k <= k_max; ++k) {
            const double p = probs[static_cast<std::size_t>(k)];
            if (p <= 0.0) continue;
            const double w = p * std::exp(k * l - shift);
            z += w;
            m1 += k * w;
            m2 += static_cast<double>(k) * k * w;
        }
        const double mean = m1 / z;
        return std::pair{mean, std::max(m2 / z - mean * mean, 0.0)};
    };
    const auto root = solve_increasing(tilted, alpha, 1e-12, 1.0, 4096.0);
    if (!root.bracketed) {
        const int edge = root.x < 0.0 ? k_min : k_max;
        return -std::log(probs[static_cast<std::size_t>(edge)]);
    }
    return std::max(alpha * root.x - log_mgf(root.x), 0.0);
}

double cramer_local_rate(const UrnSpec& spec, double alpha, double beta) {
    std::vector<double> probs(static_cast<std::size_t>(spec.capacity() + 1));
    urn_vector(spec, beta, probs);
    return cramer_rate(probs, alpha);
}

ExtendedReal rate_functional(const UrnSpec& spec, const DiscretePath& path, double floor) {
    if (path.capacity() != spec.capacity()) throw std::invalid_argument("path/spec capacity mismatch");
    const int K = spec.capacity();
    std::vector<double> probs(static_cast<std::size_t>(K + 1));
    ExtendedReal acc = 0.0;
    for (std::size_t j = 0; j < path.grid_size(); ++j) {
        urn_vector(spec, clamp_unit(path.psi_mid(j), K), probs);
        acc += local_rate_from(K, path.velocity(j), probs, floor, Gauge::shifted);
    }
    return (1.0 / static_cast<double>(path.grid_size())) * acc;
}

double cramer_functional(const UrnSpec& spec, const DiscretePath& path) {
    const int K = spec.capacity();
    std::vector<double> probs(static_cast<std::size_t>(K + 1));
    double acc = 0.0;
    for (std::size_t j = 0; j < path.grid_size(); ++j) {
        urn_vector(spec, clamp_unit(path.psi_mid(j), K), probs);
        acc += cramer_rate(probs, path.velocity(j));
    }
    return acc / static_cast<double>(path.grid_size());
}

// ---------------------------------------------------------------------------
// objective

EndpointObjective::EndpointObjective(const UrnSpec& spec, std::size_t T, double floor, Gauge gauge)
    : spec_(&spec),
      T_(T),
      floor_(floor),
      gauge_(gauge),
      probs_(static_cast<std::size_t>(spec.capacity() + 1)),
      da_(T),
      db_(T) {}

double EndpointObjective::cell(double alpha, double beta) {
    const int K = spec_->capacity();
    urn_vector(*spec_, clamp_unit(beta, K), probs_);
    const auto r = local_rate_from(K, clamp_unit(alpha, K), probs_, floor_, gauge_);
    return r.is_finite() ? r.value() : kInf;
}

double EndpointObjective::value(std::span<const double> v) {
    double prefix = 0.0, acc = 0.0;
    for (std::size_t j = 0; j < T_; ++j) {
        const double r = cell(v[j], cell_psi(prefix, v[j], j));
        if (!std::isfinite(r)) return kInf;
        acc += r;
        prefix += v[j];
    }
    return acc / static_cast<double>(T_);
}

void EndpointObjective::gradient(std::span<const double> v, std::span<double> out) {
    const int K = spec_->capacity();
    const double Kd = K;
    const double h = 1e-6 * Kd;
    auto partial = [&](auto&& f, double x) {
        const double lo = std::max(0.0, x - h), hi = std::min(Kd, x + h);
        const double fl = f(lo), fh = f(hi);
        const double d = (fh - fl) / (hi - lo);
        return std::isfinite(d) ? d : 0.0;
    };
    double prefix = 0.0;
    for (std::size_t j = 0; j < T_; ++j) {
        const double a = v[j];
        const double b = clamp_unit(cell_psi(prefix, a, j), K);
        da_[j] = partial([&](double x) { return cell(x, b); }, a);
        db_[j] = partial([&](double y) { return cell(a, y); }, b);
        prefix += a;
    }
    // psi_mid_i depends on v_j with weight 1/(i+1/2) for i > j and (1/2)/(j+1/2) for i = j
    double tail = 0.0;
    for (std::size_t jj = T_; jj-- > 0;) {
        const double w = 1.0 / (static_cast<double>(jj) + 0.5);
        out[jj] = (da_[jj] + 0.5 * w * db_[jj] + tail) / static_cast<double>(T_);
        tail += w * db_[jj];
    }
}

void project_onto_event(std::span<double> v, int K, double lo, double hi) {
    const double Kd = K;
    const double n = static_cast<double>(v.size());
    auto clipped_sum = [&](double shift) {
        double s = 0.0;
        for (double x : v) s += std::clamp(x + shift, 0.0, Kd);
        return s;
    };
    const double s0 = clipped_sum(0.0);
    double target;
    if (s0 < lo * n) target = lo * n;
    else if (s0 > hi * n) target = hi * n;
    else {
        for (double& x : v) x = std::clamp(x, 0.0, Kd);
        return;
    }
    // sum clip(v + shift) is nondecreasing in shift; bisect for the target.
    double a = -Kd, b = Kd;
    for (double x : v) {
        a = std::min(a, -x - Kd);
        b = std::max(b, Kd - x + Kd);
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        if (clipped_sum(mid) < target) a = mid;
        else b = mid;
        if (b - a <= 1e-16 * std::max(1.0, Kd)) break;
    }
    const double shift = target < s0 ? a : b;  // land on the feasible side
    for (double& x : v) x = std::clamp(x + shift, 0.0, Kd);
}

// ---------------------------------------------------------------------------
// optimizer

namespace {

struct RestartOutcome {
    std::vector<double> v;
    double objective{kInf};
    int iterations{0};
    bool converged{false};
};

RestartOutcome run_restart(const UrnSpec& spec, std::size_t T, double lo, double hi, std::vector<double> v0,
                           const OptimizeOptions& opt) {
    const int K = spec.capacity();
    EndpointObjective obj(spec, T, opt.floor, opt.gauge);
    RestartOutcome out;
    std::vector<double> v = std::move(v0);
    project_onto_event(v, K, lo, hi);
    double f = obj.value(v);
    if (!std::isfinite(f)) {
        out.v = v;
        return out;
    }

    std::vector<double> g(T), gn(T), vn(T), trial(T);
    obj.gradient(v, g);
    const double gmax = std::abs(*std::max_element(g.begin(), g.end(), [](double x, double y) {
        return std::abs(x) < std::abs(y);
    }));
    double step = gmax > 0.0 ? 0.1 * K / gmax : 1.0;

    bool converged = false;
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        double t = step;
        bool accepted = false;
        double fn = f;
        for (int backtrack = 0; backtrack < 60; ++backtrack) {
            for (std::size_t j = 0; j < T; ++j) vn[j] = v[j] - t * g[j];
            project_onto_event(vn, K, lo, hi);
            double move = 0.0, decrease = 0.0;
            for (std::size_t j = 0; j < T; ++j) {
                move = std::max(move, std::abs(vn[j] - v[j]));
                decrease += g[j] * (vn[j] - v[j]);
            }
            if (move < 1e-15) break;
            fn = obj.value(vn);
            if (std::isfinite(fn) && fn <= f + 1e-4 * decrease) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            converged = true;  // projected step vanished or no descent left
            break;
        }
        obj.gradient(vn, gn);
        double ss = 0.0, sy = 0.0;
        for (std::size_t j = 0; j < T; ++j) {
            const double s = vn[j] - v[j], y = gn[j] - g[j];
            ss += s * s;
            sy += s * y;
        }
        step = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e12) : std::min(2.0 * t, 1e12);
        const double improvement = f - fn;
        v.swap(vn);
        g.swap(gn);
        f = fn;
        if (improvement < opt.tol_obj) {
            converged = true;
            ++it;
            break;
        }
    }

    // Coordinate-descent polish: single-coordinate moves followed by re-projection.
    double delta = 1e-3 * K;
    for (int sweep = 0; sweep < opt.polish_sweeps && delta > 1e-9 * K; ++sweep) {
        bool improved = false;
        for (std::size_t j = 0; j < T; ++j) {
            for (double dir : {1.0, -1.0}) {
                trial = v;
                trial[j] += dir * delta;
                project_onto_event(trial, K, lo, hi);
                const double ft = obj.value(trial);
                if (ft < f) {
                    v.swap(trial);
                    f = ft;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) delta *= 0.1;
    }

    out.v = std::move(v);
    out.objective = f;
    out.iterations = it;
    out.converged = converged;
    return out;
}

}  // namespace

RateResult optimize_endpoint(const UrnSpec& spec, const EndpointEvent& event, std::size_t T,
                             const OptimizeOptions& options) {
    if (T < 1) throw std::invalid_argument("optimize_endpoint needs T >= 1");
    if (options.restarts < 1) throw std::invalid_argument("optimize_endpoint needs at least one restart");
    const int K = spec.capacity();
    const double Kd = K;
    const double Td = static_cast<double>(T);

    double lo = event.lo, hi = event.hi;
    if (hi - lo <= 0.0) {
        lo -= 0.5 / Td;
        hi += 0.5 / Td;
    }
    if (hi < 0.0 || lo > Kd) throw std::domain_error("endpoint event does not intersect [0, K]");
    lo = std::max(lo, 0.0);
    hi = std::min(hi, Kd);

    if (!options.allow_degenerate && !(options.floor > 0.0 && min_probability(spec) >= options.floor))
        throw std::domain_error("spec leaves the smooth regime (some pi_k < floor); set allow_degenerate");

    // Initial paths: straight lines across [lo, hi], seeded perturbations of
    // them, and the zero-cost flow pushed into the event.
    const int R = options.restarts;
    std::vector<std::vector<double>> starts;
    starts.reserve(static_cast<std::size_t>(R));
    const int straight = std::max(1, R - 1);
    for (int i = 0; i < straight; ++i) {
        const double slope = straight == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (straight - 1);
        std::vector<double> v(T, slope);
        if (i > 0) {
            std::mt19937_64 rng(derive_seed(options.seed, static_cast<std::uint64_t>(i)));
            for (double& x : v) x += (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * 0.1 * Kd;
        }
        starts.push_back(std::move(v));
    }
    if (R > 1) starts.push_back(zero_cost_flow(spec, T, options.floor).path.velocities());

    std::vector<RestartOutcome> outcomes(starts.size());
    const auto workers = static_cast<std::size_t>(std::clamp(options.threads, 1, R));
    auto work = [&](std::size_t w) {
        for (std::size_t i = w; i < starts.size(); i += workers)
            outcomes[i] = run_restart(spec, T, lo, hi, starts[i], options);
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }

    // Lowest objective wins; ties go to the lower index.
    std::size_t best = 0;
    for (std::size_t i = 1; i < outcomes.size(); ++i)
        if (outcomes[i].objective < outcomes[best].objective) best = i;
    if (!std::isfinite(outcomes[best].objective))
        throw std::domain_error("optimize_endpoint: no restart reached a finite objective");

    std::vector<double> sorted;
    for (const auto& o : outcomes) sorted.push_back(o.objective);
    std::sort(sorted.begin(), sorted.end());
    const double agreement = sorted.size() > 1 ? sorted[1] - sorted[0] : 0.0;

    RateResult result;
    result.event = event;
    result.solved_event = EndpointEvent(lo, hi);
    result.optimal_path = DiscretePath::from_velocities(K, outcomes[best].v);
    result.entropy_density = -outcomes[best].objective;
    result.iterations = outcomes[best].iterations;
    result.restarts_agreement = agreement;
    result.converged = outcomes[best].converged && agreement < options.tol_agree;
    for (const auto& o : outcomes) result.restart_objectives.push_back(o.objective);
    result.oracle_gap = outcomes[best].objective - cramer_functional(spec, result.optimal_path);
    return result;
}

// ---------------------------------------------------------------------------
// diagnostics

std::vector<CellRate> rate_profile(const UrnSpec& spec, const DiscretePath& path, double floor) {
    const int K = spec.capacity();
    std::vector<double> probs(static_cast<std::size_t>(K + 1));
    std::vector<CellRate> cells;
    cells.reserve(path.grid_size());
    for (std::size_t j = 0; j < path.grid_size(); ++j) {
        const double psi = clamp_unit(path.psi_mid(j), K);
        urn_vector(spec, psi, probs);
        cells.push_back({j, path.tau(j), path.velocity(j), psi,
                         local_rate_from(K, path.velocity(j), probs, floor, Gauge::shifted),
                         cramer_rate(probs, path.velocity(j))});
    }
    return cells;
}

ZeroCostFlow zero_cost_flow(const UrnSpec& spec, std::size_t T, double floor) {
    if (T < 1) throw std::invalid_argument("zero_cost_flow needs T >= 1");
    const int K = spec.capacity();
    const double Kd = K;

    const auto fp = fixed_points(spec, 4096, 1e-12);
    std::vector<double> candidates = fp.roots;
    candidates.insert(candidates.end(), fp.tangential.begin(), fp.tangential.end());
    for (const auto& [a, b] : fp.degenerate_intervals) candidates.push_back(a);
    std::sort(candidates.begin(), candidates.end());

    // Smallest root of h on [0,K], given h(0) <= 0 <= h(K).
    auto smallest_root = [&](auto&& h) {
        constexpr int scan = 256;
        double prev_x = 0.0, prev_h = h(0.0);
        if (prev_h >= 0.0) return 0.0;
        for (int i = 1; i <= scan; ++i) {
            const double x = Kd * i / scan;
            const double hx = h(x);
            if (hx >= 0.0) {
                double a = prev_x, b = x;
                for (int it = 0; it < 200 && b - a > 1e-16 * Kd; ++it) {
                    const double m = 0.5 * (a + b);
                    if (h(m) < 0.0) a = m;
                    else b = m;
                }
                return 0.5 * (a + b);
            }
            prev_x = x;
            prev_h = hx;
        }
        return Kd;
    };

    std::vector<double> v(T);
    double prefix = 0.0;
    for (std::size_t j = 0; j < T; ++j) {
        if (j == 0 && !candidates.empty()) {
            v[0] = candidates.front();
        } else {
            v[j] = smallest_root(
                [&](double x) { return x - mean_step(spec, clamp_unit(cell_psi(prefix, x, j), K)); });
        }
        prefix += v[j];
    }
    ZeroCostFlow flow{DiscretePath::from_velocities(K, v), candidates, {}};
    flow.cells = rate_profile(spec, flow.path, floor);
    return flow;
}

CramerComparison compare_cramer(const UrnSpec& spec, int grid, double floor) {
    if (grid < 2) throw std::invalid_argument("compare_cramer needs grid >= 2");
    const int K = spec.capacity();
    CramerComparison cmp;
    std::vector<double> probs(static_cast<std::size_t>(K + 1));
    for (int ib = 0; ib < grid; ++ib) {
        const double beta = static_cast<double>(K) * ib / (grid - 1);
        urn_vector(spec, beta, probs);
        for (int ia = 0; ia < grid; ++ia) {
            const double alpha = static_cast<double>(K) * ia / (grid - 1);
            const auto local = local_rate_from(K, alpha, probs, floor, Gauge::shifted);
            const double cr = cramer_rate(probs, alpha);
            cmp.points.push_back({alpha, beta, local, cr});
            if (local.is_finite()) {
                ++cmp.finite_points;
                const double under = cr - local.value();
                if (under > 1e-9) {
                    ++cmp.undercut_points;
                    cmp.max_undercut = std::max(cmp.max_undercut, under);
                }
            }
        }
    }
    return cmp;
}

}  // namespace urnldp
