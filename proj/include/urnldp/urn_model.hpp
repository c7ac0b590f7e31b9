#pragma once
/*
Generalized Hill-Lane-Sudderth urn with increments in {0,...,K}.

At step n+1 an increment sigma in {0,...,K} is drawn with probability
pi_k(psi_n), where psi_n = M_n / n is the running average of the increments
seen so far (psi_0 := psi_init). The urn vector is given by K curves
pi_1..pi_K on [0,K]; pi_0 = 1 - sum_k pi_k is derived.

The step law depends on the history only through (n, M_n), so the exact
law of M_N is computed by dynamic programming over that state.
*/

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace urnldp {

// One urn-function curve on [0,K]: a polynomial in alpha (ascending
// coefficients) or a piecewise-linear table with flat extrapolation.
class UrnCurve {
public:
    enum class Kind { polynomial, piecewise_linear };

    static UrnCurve polynomial(std::vector<double> coeffs);
    static UrnCurve constant(double value) { return polynomial({value}); }
    static UrnCurve piecewise_linear(std::vector<std::pair<double, double>> knots);

    [[nodiscard]] double operator()(double alpha) const;

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] const std::vector<double>& coeffs() const { return coeffs_; }
    [[nodiscard]] const std::vector<std::pair<double, double>>& knots() const { return knots_; }

private:
    UrnCurve() = default;
    Kind kind_{Kind::polynomial};
    std::vector<double> coeffs_;
    std::vector<std::pair<double, double>> knots_;
};

class UrnSpec {
public:
    // psi_init < 0 selects the default K/2.
    UrnSpec(int capacity, std::vector<UrnCurve> components, double psi_init = -1.0,
            int validation_grid_size = 1024);

    [[nodiscard]] int capacity() const { return capacity_; }
    // k in 1..K
    [[nodiscard]] const UrnCurve& component(int k) const;
    [[nodiscard]] const std::vector<UrnCurve>& components() const { return components_; }
    [[nodiscard]] double psi_init() const { return psi_init_; }
    [[nodiscard]] int validation_grid_size() const { return validation_grid_size_; }

    [[nodiscard]] UrnSpec with_psi_init(double psi_init) const;

private:
    int capacity_;
    std::vector<UrnCurve> components_;
    double psi_init_;
    int validation_grid_size_;
};

// Target interval for the final average psi_N (or psi(1) in the scaling limit).
struct EndpointEvent {
    double lo{0.0};
    double hi{0.0};

    EndpointEvent() = default;
    // Throws std::invalid_argument unless lo <= hi (both finite).
    EndpointEvent(double lo_, double hi_);

    [[nodiscard]] bool contains(double psi) const { return psi >= lo && psi <= hi; }
    [[nodiscard]] double width() const { return hi - lo; }
};

// Convenience constructors used throughout tests and the CLI.
UrnSpec constant_spec(std::vector<double> probabilities, double psi_init = -1.0);  // pi_1..pi_K
UrnSpec uniform_spec(int capacity, double psi_init = -1.0);

struct Violation {
    int k;           // 1..K for a component, 0 for the derived pi_0
    double alpha;
    double value;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    [[nodiscard]] bool ok() const { return violations.empty(); }
};

// Checks pi_k in [0,1] and sum_k pi_k <= 1 on a uniform grid of [0,K].
ValidationReport validate_spec(const UrnSpec& spec);

// pi_k(alpha) for k in 0..K. Values within 1e-12 of [0,1] are clamped;
// anything further out throws std::domain_error. alpha outside [0,K]
// throws std::out_of_range.
double eval_pi(const UrnSpec& spec, int k, double alpha);

// Fills out[0..K] with the urn vector at alpha (same clamping rules).
void urn_vector(const UrnSpec& spec, double alpha, std::span<double> out);

// Minimum over k and the validation grid of pi_k; used to check the smooth regime.
double min_probability(const UrnSpec& spec);

// sum_k k * pi_k(alpha)
double mean_step(const UrnSpec& spec, double alpha);

struct FixedPointReport {
    std::vector<double> roots;                              // sign change, bisected
    std::vector<double> tangential;                         // |pi_bar - id| < tol, no sign change
    std::vector<std::pair<double, double>> degenerate_intervals;  // pi_bar == id on an interval
    [[nodiscard]] bool isolation_violated() const { return !degenerate_intervals.empty(); }
};

FixedPointReport fixed_points(const UrnSpec& spec, int grid_size = 4096, double tol = 1e-10);

class MarketHistory {
public:
    MarketHistory(int capacity, std::vector<int> steps, double psi_init, std::uint64_t seed = 0);

    [[nodiscard]] int capacity() const { return capacity_; }
    [[nodiscard]] std::size_t size() const { return steps_.size(); }
    [[nodiscard]] const std::vector<int>& steps() const { return steps_; }
    [[nodiscard]] double psi_init() const { return psi_init_; }
    [[nodiscard]] std::uint64_t seed() const { return seed_; }

    // M_0..M_N (M_0 = 0)
    [[nodiscard]] std::vector<std::int64_t> running_sums() const;
    // psi_0..psi_N with psi_0 = psi_init
    [[nodiscard]] std::vector<double> averages() const;

private:
    int capacity_;
    std::vector<int> steps_;
    double psi_init_;
    std::uint64_t seed_;
};

// Uses spec.psi_init() when psi_init < 0.
MarketHistory simulate(const UrnSpec& spec, std::size_t N, std::uint64_t seed, double psi_init = -1.0);

// Empirical law of M_N over `runs` independent histories. Run r uses a seed
// derived from (seed, r), so the result does not depend on `threads`.
std::vector<double> simulate_histogram(const UrnSpec& spec, std::size_t N, std::size_t runs,
                                       std::uint64_t seed, int threads = 1, double psi_init = -1.0);

double step_weight(const UrnSpec& spec, int k, double psi_prev);
double path_weight(const UrnSpec& spec, const MarketHistory& history);
// log path_weight; -inf when some step has probability zero
double action(const UrnSpec& spec, const MarketHistory& history);

// log P(M_N = m) for m = 0..K*N, computed in log space so deep tails stay
// representable. Throws std::length_error beyond the resource limit.
std::vector<double> exact_log_distribution(const UrnSpec& spec, std::size_t N, double psi_init = -1.0);
// P(M_N = m) for m = 0..K*N
std::vector<double> exact_distribution(const UrnSpec& spec, std::size_t N, double psi_init = -1.0);

// log P(psi_N in [lo, hi]) from a log distribution over m = 0..K*N.
double log_event_probability(std::span<const double> log_distribution, std::size_t N, double lo,
                             double hi);

// -(1/N) log P(psi_N in event) at several N, fitted by a + b/N (least squares).
// intercept is +inf when the event has probability zero at some N.
struct RateExtrapolation {
    std::vector<std::size_t> sizes;
    std::vector<double> rates;
    double intercept{0.0};
    double slope{0.0};
};

RateExtrapolation extrapolate_event_rate(const UrnSpec& spec, const EndpointEvent& event,
                                         std::span<const std::size_t> sizes, double psi_init = -1.0);

// Deterministic per-index seed derivation (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace urnldp
