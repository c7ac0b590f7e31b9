#pragma once
/*
Candidate rate functional for the urn and the endpoint-event optimizer.

The local rate of a cell with velocity a and average b is

    R(a, b) = L0(a) - log(K+1) - sum_k delta_k(a) log pi_k(b),

i.e. the shifted Mogulskii Lagrangian minus the interpolated-Kronecker
Lagrangian. For K = 1 this is the binary relative entropy D(a || pi_1(b)).
The entropy density of an endpoint event {psi(1) in [lo, hi]} is -inf I
over K-Lipschitz paths ending in the event, I = sum_j (1/T) R(v_j, psi_j).

The classical Cramer transform of the step law at fixed b is provided as an
independent oracle; for K >= 2 the two rates need not agree.
*/

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "urnldp/extended_real.hpp"
#include "urnldp/kron_embedding.hpp"
#include "urnldp/urn_model.hpp"

namespace urnldp {

ExtendedReal local_rate(const UrnSpec& spec, double alpha, double beta, double floor = 0.0);

// sup_l { a l - log sum_k p_k e^{k l} } for a law p on {0,...,K}; +inf outside its support hull.
double cramer_rate(std::span<const double> probs, double alpha);
double cramer_local_rate(const UrnSpec& spec, double alpha, double beta);

// sum_j (1/T) R(v_j, psi_mid_j)
ExtendedReal rate_functional(const UrnSpec& spec, const DiscretePath& path, double floor = 0.0);
// Same quadrature with the Cramer local rate in place of R.
double cramer_functional(const UrnSpec& spec, const DiscretePath& path);

// How the log(K+1) constant is booked inside the objective. Both give the
// same numbers; the second carries the unshifted L0 plus the explicit
// change-of-measure constant.
enum class Gauge { shifted, unshifted_compensated };

struct OptimizeOptions {
    int restarts = 8;
    double floor = 1e-12;
    double tol_obj = 1e-9;
    double tol_agree = 1e-4;
    int max_iterations = 5000;
    int polish_sweeps = 12;
    std::uint64_t seed = 0;
    int threads = 1;
    // Required when some pi_k drops below `floor` on [0,K].
    bool allow_degenerate = false;
    Gauge gauge = Gauge::shifted;
};

struct RateResult {
    EndpointEvent event;          // as requested
    EndpointEvent solved_event;   // after widening / clipping to [0,K]
    double entropy_density{0.0};  // -I(optimal_path)
    DiscretePath optimal_path = DiscretePath::from_velocities(1, {0.0});
    int iterations{0};
    bool converged{false};
    double restarts_agreement{0.0};  // gap between the two best restarts
    std::vector<double> restart_objectives;
    std::optional<double> oracle_gap;  // I(optimal) - Cramer functional(optimal)
};

// Minimizes I over velocity vectors in [0,K]^T whose mean lies in the event.
// Throws std::domain_error for an event that misses [0,K] or a spec outside
// the smooth regime without `allow_degenerate`.
RateResult optimize_endpoint(const UrnSpec& spec, const EndpointEvent& event, std::size_t T,
                             const OptimizeOptions& options = {});

// The objective used by the optimizer, exposed for tests.
class EndpointObjective {
public:
    EndpointObjective(const UrnSpec& spec, std::size_t T, double floor, Gauge gauge = Gauge::shifted);

    // +inf when any cell is infinite or indeterminate
    [[nodiscard]] double value(std::span<const double> velocities);
    // Chain-rule gradient with central-difference partials of R in (a, b).
    void gradient(std::span<const double> velocities, std::span<double> out);
    [[nodiscard]] double cell(double alpha, double beta);

private:
    const UrnSpec* spec_;
    std::size_t T_;
    double floor_;
    Gauge gauge_;
    std::vector<double> probs_;
    std::vector<double> da_, db_;
};

// Euclidean projection onto {v in [0,K]^T : T lo <= sum v <= T hi}.
void project_onto_event(std::span<double> v, int K, double lo, double hi);

struct CellRate {
    std::size_t j;
    double tau;
    double velocity;
    double psi;
    ExtendedReal local_rate;
    double cramer_rate;
};

std::vector<CellRate> rate_profile(const UrnSpec& spec, const DiscretePath& path, double floor = 0.0);

struct ZeroCostFlow {
    DiscretePath path;
    std::vector<double> initial_fixed_points;  // all solutions of v = pi_bar(v); the smallest is used
    std::vector<CellRate> cells;
};

// Velocity v_j = pi_bar(psi_mid_j), solved cell by cell (implicitly in v_j)
// from phi_0 = 0; v_0 solves v = pi_bar(v).
ZeroCostFlow zero_cost_flow(const UrnSpec& spec, std::size_t T, double floor = 0.0);

struct CramerPoint {
    double alpha, beta;
    ExtendedReal local;
    double cramer;
};

struct CramerComparison {
    std::vector<CramerPoint> points;
    std::size_t finite_points{0};
    std::size_t undercut_points{0};  // finite local < cramer - 1e-9
    double max_undercut{0.0};
};

// grid x grid points (alpha, beta) on [0,K]^2, endpoints included.
CramerComparison compare_cramer(const UrnSpec& spec, int grid, double floor = 0.0);

}  // namespace urnldp
