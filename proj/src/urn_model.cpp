#include "urnldp/urn_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace urnldp {

namespace {

constexpr double kProbTol = 1e-12;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Transitions summed over all steps; above this the DP is refused.
constexpr double kMaxTransitions = 4e9;

double clamp_probability(double p, int k, double alpha) {
    if (p < -kProbTol || p > 1.0 + kProbTol || std::isnan(p)) {
        std::ostringstream os;
        os << "pi_" << k << "(" << alpha << ") = " << p << " is not a probability";
        throw std::domain_error(os.str());
    }
    return std::clamp(p, 0.0, 1.0);
}

double check_alpha(const UrnSpec& spec, double alpha) {
    const double K = spec.capacity();
    const double slack = kProbTol * std::max(1.0, K);
    if (!(alpha >= -slack && alpha <= K + slack)) {
        std::ostringstream os;
        os << "alpha = " << alpha << " outside [0, " << spec.capacity() << "]";
        throw std::out_of_range(os.str());
    }
    return std::clamp(alpha, 0.0, K);
}

// Uniform double in [0,1) from the top 53 bits; portable across standard libraries.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int sample_increment(std::span<const double> probs, double u) {
    double cum = 0.0;
    int last_positive = 0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        if (probs[k] <= 0.0) continue;
        last_positive = static_cast<int>(k);
        cum += probs[k];
        if (u < cum) return static_cast<int>(k);
    }
    return last_positive;
}

double log_sum_exp(std::span<const double> xs) {
    double mx = kNegInf;
    for (double x : xs) mx = std::max(mx, x);
    if (mx == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - mx);
    return mx + std::log(s);
}

}  // namespace

// ---------------------------------------------------------------------------
// UrnCurve

UrnCurve UrnCurve::polynomial(std::vector<double> coeffs) {
    if (coeffs.empty()) throw std::invalid_argument("polynomial curve needs at least one coefficient");
    UrnCurve c;
    c.kind_ = Kind::polynomial;
    c.coeffs_ = std::move(coeffs);
    return c;
}

UrnCurve UrnCurve::piecewise_linear(std::vector<std::pair<double, double>> knots) {
    if (knots.empty()) throw std::invalid_argument("piecewise-linear curve needs at least one knot");
    for (std::size_t i = 1; i < knots.size(); ++i) {
        if (!(knots[i].first > knots[i - 1].first))
            throw std::invalid_argument("piecewise-linear knots must have strictly increasing alpha");
    }
    UrnCurve c;
    c.kind_ = Kind::piecewise_linear;
    c.knots_ = std::move(knots);
    return c;
}

double UrnCurve::operator()(double alpha) const {
    if (kind_ == Kind::polynomial) {
        double acc = 0.0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * alpha + *it;
        return acc;
    }
    if (alpha <= knots_.front().first) return knots_.front().second;
    if (alpha >= knots_.back().first) return knots_.back().second;
    auto hi = std::upper_bound(knots_.begin(), knots_.end(), alpha,
                               [](double a, const auto& knot) { return a < knot.first; });
    auto lo = hi - 1;
    const double t = (alpha - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
}

// ---------------------------------------------------------------------------
// UrnSpec

UrnSpec::UrnSpec(int capacity, std::vector<UrnCurve> components, double psi_init,
                 int validation_grid_size)
    : capacity_(capacity),
      components_(std::move(components)),
      psi_init_(psi_init < 0.0 ? 0.5 * capacity : psi_init),
      validation_grid_size_(validation_grid_size) {
    if (capacity_ < 1) throw std::invalid_argument("urn capacity K must be >= 1");
    if (components_.size() != static_cast<std::size_t>(capacity_))
        throw std::invalid_argument("urn spec needs exactly K component curves (k = 1..K)");
    if (psi_init_ > capacity_) throw std::invalid_argument("psi_init must lie in [0, K]");
    if (validation_grid_size_ < 1) throw std::invalid_argument("validation grid size must be positive");
}

const UrnCurve& UrnSpec::component(int k) const {
    if (k < 1 || k > capacity_) throw std::out_of_range("component index must be in 1..K");
    return components_[static_cast<std::size_t>(k - 1)];
}

UrnSpec UrnSpec::with_psi_init(double psi_init) const {
    return UrnSpec(capacity_, components_, psi_init, validation_grid_size_);
}

EndpointEvent::EndpointEvent(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi)
        throw std::invalid_argument("endpoint event needs finite lo <= hi");
}

UrnSpec constant_spec(std::vector<double> probabilities, double psi_init) {
    std::vector<UrnCurve> curves;
    curves.reserve(probabilities.size());
    for (double p : probabilities) curves.push_back(UrnCurve::constant(p));
    const int K = static_cast<int>(probabilities.size());
    return UrnSpec(K, std::move(curves), psi_init);
}

UrnSpec uniform_spec(int capacity, double psi_init) {
    return constant_spec(std::vector<double>(static_cast<std::size_t>(capacity), 1.0 / (capacity + 1)),
                         psi_init);
}

// ---------------------------------------------------------------------------
// validation and evaluation

ValidationReport validate_spec(const UrnSpec& spec) {
    ValidationReport report;
    const int K = spec.capacity();
    const int n = spec.validation_grid_size();
    for (int i = 0; i <= n; ++i) {
        const double alpha = static_cast<double>(K) * i / n;
        double sum = 0.0;
        for (int k = 1; k <= K; ++k) {
            const double v = spec.component(k)(alpha);
            sum += v;
            if (std::isnan(v) || v < 0.0 || v > 1.0) {
                std::ostringstream os;
                os << "pi_" << k << " = " << v << " outside [0,1]";
                report.violations.push_back({k, alpha, v, os.str()});
            }
        }
        if (sum > 1.0) {
            std::ostringstream os;
            os << "sum of pi_k = " << sum << " > 1";
            report.violations.push_back({0, alpha, 1.0 - sum, os.str()});
        }
    }
    return report;
}

void urn_vector(const UrnSpec& spec, double alpha, std::span<double> out) {
    const int K = spec.capacity();
    if (out.size() != static_cast<std::size_t>(K + 1))
        throw std::invalid_argument("urn_vector output must have K+1 entries");
    alpha = check_alpha(spec, alpha);
    double sum = 0.0;
    for (int k = 1; k <= K; ++k) {
        const double p = clamp_probability(spec.component(k)(alpha), k, alpha);
        out[static_cast<std::size_t>(k)] = p;
        sum += p;
    }
    out[0] = clamp_probability(1.0 - sum, 0, alpha);
}

double eval_pi(const UrnSpec& spec, int k, double alpha) {
    const int K = spec.capacity();
    if (k < 0 || k > K) throw std::out_of_range("increment k must be in 0..K");
    alpha = check_alpha(spec, alpha);
    if (k > 0) return clamp_probability(spec.component(k)(alpha), k, alpha);
    double sum = 0.0;
    for (int j = 1; j <= K; ++j) sum += clamp_probability(spec.component(j)(alpha), j, alpha);
    return clamp_probability(1.0 - sum, 0, alpha);
}

double min_probability(const UrnSpec& spec) {
    const int K = spec.capacity();
    const int n = spec.validation_grid_size();
    std::vector<double> probs(static_cast<std::size_t>(K + 1));
    double lo = 1.0;
    for (int i = 0; i <= n; ++i) {
        urn_vector(spec, static_cast<double>(K) * i / n, probs);
        lo = std::min(lo, *std::min_element(probs.begin(), probs.end()));
    }
    return lo;
}

double mean_step(const UrnSpec& spec, double alpha) {
    alpha = check_alpha(spec, alpha);
    double m = 0.0;
    for (int k = 1; k <= spec.capacity(); ++k)
        m += k * clamp_probability(spec.component(k)(alpha), k, alpha);
    return m;
}

FixedPointReport fixed_points(const UrnSpec& spec, int grid_size, double tol) {
    if (grid_size < 2) throw std::invalid_argument("fixed_points grid needs at least 2 cells");
    const double K = spec.capacity();
    auto gap = [&](double a) { return mean_step(spec, a) - a; };

    std::vector<double> xs(static_cast<std::size_t>(grid_size) + 1);
    std::vector<double> gs(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] = K * static_cast<double>(i) / grid_size;
        gs[i] = gap(xs[i]);
    }
    auto is_zero = [&](std::size_t i) { return std::abs(gs[i]) < tol; };

    FixedPointReport report;
    const std::size_t n = xs.size();
    std::size_t i = 0;
    while (i < n) {
        if (!is_zero(i)) {
            if (i + 1 < n && !is_zero(i + 1) && gs[i] * gs[i + 1] < 0.0) {
                double lo = xs[i], hi = xs[i + 1];
                double glo = gs[i];
                for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, K); ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double gm = gap(mid);
                    if (std::abs(gm) <= tol * 1e-3) {
                        lo = hi = mid;
                        break;
                    }
                    if ((gm < 0.0) == (glo < 0.0)) {
                        lo = mid;
                        glo = gm;
                    } else {
                        hi = mid;
                    }
                }
                report.roots.push_back(0.5 * (lo + hi));
            }
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && is_zero(j + 1)) ++j;
        if (j > i) {
            report.degenerate_intervals.emplace_back(xs[i], xs[j]);
        } else {
            // Single zero grid point: a crossing if the neighbours disagree in sign.
            const double left = i > 0 ? gs[i - 1] : -gs[std::min(i + 1, n - 1)];
            const double right = i + 1 < n ? gs[i + 1] : -left;
            if (left * right < 0.0) report.roots.push_back(xs[i]);
            else report.tangential.push_back(xs[i]);
        }
        i = j + 1;
    }
    return report;
}

// ---------------------------------------------------------------------------
// histories and simulation

MarketHistory::MarketHistory(int capacity, std::vector<int> steps, double psi_init, std::uint64_t seed)
    : capacity_(capacity), steps_(std::move(steps)), psi_init_(psi_init), seed_(seed) {
    if (capacity_ < 1) throw std::invalid_argument("history capacity must be >= 1");
    for (int s : steps_) {
        if (s < 0 || s > capacity_) throw std::invalid_argument("history entry outside {0,...,K}");
    }
    if (psi_init_ < 0.0 || psi_init_ > capacity_) throw std::invalid_argument("psi_init must lie in [0, K]");
}

std::vector<std::int64_t> MarketHistory::running_sums() const {
    std::vector<std::int64_t> m(steps_.size() + 1, 0);
    for (std::size_t n = 0; n < steps_.size(); ++n) m[n + 1] = m[n] + steps_[n];
    return m;
}

std::vector<double> MarketHistory::averages() const {
    const auto m = running_sums();
    std::vector<double> psi(m.size());
    psi[0] = psi_init_;
    for (std::size_t n = 1; n < m.size(); ++n) psi[n] = static_cast<double>(m[n]) / static_cast<double>(n);
    return psi;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

MarketHistory simulate(const UrnSpec& spec, std::size_t N, std::uint64_t seed, double psi_init) {
    if (N < 1) throw std::invalid_argument("simulate needs N >= 1");
    const double psi0 = psi_init < 0.0 ? spec.psi_init() : psi_init;
    const int K = spec.capacity();
    std::mt19937_64 rng(seed);
    std::vector<double> probs(static_cast<std::size_t>(K + 1));
    std::vector<int> steps(N);
    std::int64_t total = 0;
    double psi = psi0;
    for (std::size_t n = 0; n < N; ++n) {
        urn_vector(spec, psi, probs);
        const int k = sample_increment(probs, unit_uniform(rng));
        steps[n] = k;
        total += k;
        psi = static_cast<double>(total) / static_cast<double>(n + 1);
    }
    return MarketHistory(K, std::move(steps), psi0, seed);
}

std::vector<double> simulate_histogram(const UrnSpec& spec, std::size_t N, std::size_t runs,
                                       std::uint64_t seed, int threads, double psi_init) {
    const std::size_t bins = static_cast<std::size_t>(spec.capacity()) * N + 1;
    if (runs == 0) return std::vector<double>(bins, 0.0);
    const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, runs);

    std::vector<std::vector<std::uint64_t>> counts(workers, std::vector<std::uint64_t>(bins, 0));
    auto work = [&](std::size_t w) {
        for (std::size_t r = w; r < runs; r += workers) {
            const auto h = simulate(spec, N, derive_seed(seed, r), psi_init);
            const auto m = h.running_sums().back();
            ++counts[w][static_cast<std::size_t>(m)];
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }
    std::vector<double> freq(bins, 0.0);
    for (std::size_t b = 0; b < bins; ++b) {
        std::uint64_t c = 0;
        for (const auto& cw : counts) c += cw[b];
        freq[b] = static_cast<double>(c) / static_cast<double>(runs);
    }
    return freq;
}

// ---------------------------------------------------------------------------
// weights

double step_weight(const UrnSpec& spec, int k, double psi_prev) { return eval_pi(spec, k, psi_prev); }

double path_weight(const UrnSpec& spec, const MarketHistory& history) {
    if (history.capacity() != spec.capacity()) throw std::invalid_argument("history/spec capacity mismatch");
    const auto psi = history.averages();
    double w = 1.0;
    for (std::size_t n = 0; n < history.size(); ++n) w *= step_weight(spec, history.steps()[n], psi[n]);
    return w;
}

double action(const UrnSpec& spec, const MarketHistory& history) {
    if (history.capacity() != spec.capacity()) throw std::invalid_argument("history/spec capacity mismatch");
    const auto psi = history.averages();
    double a = 0.0;
    for (std::size_t n = 0; n < history.size(); ++n) {
        const double p = step_weight(spec, history.steps()[n], psi[n]);
        if (p <= 0.0) return kNegInf;
        a += std::log(p);
    }
    return a;
}

// ---------------------------------------------------------------------------
// exact law of M_N

std::vector<double> exact_log_distribution(const UrnSpec& spec, std::size_t N, double psi_init) {
    if (N < 1) throw std::invalid_argument("exact distribution needs N >= 1");
    const auto K = static_cast<std::size_t>(spec.capacity());
    const double Nd = static_cast<double>(N);
    const double transitions = 0.5 * static_cast<double>(K * (K + 1)) * Nd * (Nd + 1.0);
    if (transitions > kMaxTransitions) throw std::length_error("exact distribution: resource limit exceeded");

    const double psi0 = psi_init < 0.0 ? spec.psi_init() : psi_init;
    std::vector<double> cur(K * N + 1, kNegInf), next(K * N + 1, kNegInf);
    std::vector<double> probs(K + 1);
    std::vector<double> log_probs((K * N + 1) * (K + 1));
    std::vector<double> terms(K + 1);

    cur[0] = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        const std::size_t top = K * n;  // reachable M_n in 0..K*n
        for (std::size_t m = 0; m <= top; ++m) {
            const double psi = n == 0 ? psi0 : static_cast<double>(m) / static_cast<double>(n);
            urn_vector(spec, psi, probs);
            for (std::size_t k = 0; k <= K; ++k)
                log_probs[m * (K + 1) + k] = probs[k] > 0.0 ? std::log(probs[k]) : kNegInf;
        }
        const std::size_t next_top = top + K;
        for (std::size_t m = 0; m <= next_top; ++m) {
            std::size_t count = 0;
            const std::size_t k_lo = m > top ? m - top : 0;
            const std::size_t k_hi = std::min(K, m);
            for (std::size_t k = k_lo; k <= k_hi; ++k) {
                const std::size_t src = m - k;
                terms[count++] = cur[src] + log_probs[src * (K + 1) + k];
            }
            next[m] = log_sum_exp(std::span<const double>(terms.data(), count));
        }
        std::swap(cur, next);
    }
    return cur;
}

std::vector<double> exact_distribution(const UrnSpec& spec, std::size_t N, double psi_init) {
    auto lp = exact_log_distribution(spec, N, psi_init);
    for (double& x : lp) x = std::exp(x);
    return lp;
}

double log_event_probability(std::span<const double> log_distribution, std::size_t N, double lo, double hi) {
    const double Nd = static_cast<double>(N);
    // m/N in [lo, hi], with a relative slack for lattice points that sit on the boundary
    const double eps = 1e-9;
    std::vector<double> terms;
    for (std::size_t m = 0; m < log_distribution.size(); ++m) {
        const double psi = static_cast<double>(m) / Nd;
        if (psi >= lo - eps / Nd && psi <= hi + eps / Nd) terms.push_back(log_distribution[m]);
    }
    return log_sum_exp(terms);
}

RateExtrapolation extrapolate_event_rate(const UrnSpec& spec, const EndpointEvent& event,
                                         std::span<const std::size_t> sizes, double psi_init) {
    if (sizes.empty()) throw std::invalid_argument("extrapolation needs at least one N");
    RateExtrapolation ex;
    bool infinite = false;
    for (std::size_t N : sizes) {
        const auto lp = exact_log_distribution(spec, N, psi_init);
        const double rate = -log_event_probability(lp, N, event.lo, event.hi) / static_cast<double>(N);
        infinite = infinite || !std::isfinite(rate);
        ex.sizes.push_back(N);
        ex.rates.push_back(rate);
    }
    if (infinite) {
        ex.intercept = std::numeric_limits<double>::infinity();
        ex.slope = 0.0;
        return ex;
    }
    if (sizes.size() == 1) {
        ex.intercept = ex.rates[0];
        return ex;
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(sizes.size());
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const double x = 1.0 / static_cast<double>(sizes[i]);
        sx += x;
        sy += ex.rates[i];
        sxx += x * x;
        sxy += x * ex.rates[i];
    }
    ex.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    ex.intercept = (sy - ex.slope * sx) / n;
    return ex;
}

}  // namespace urnldp
