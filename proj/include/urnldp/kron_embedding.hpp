#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "urnldp/extended_real.hpp"
#include "urnldp/urn_model.hpp"

namespace urnldp {

// Lagrange basis polynomial on the nodes {0,...,K}: prod_{z != k} (z - alpha)/(z - k).
// Exactly 1 at alpha = k and exactly 0 at the other nodes.
double kron_delta(int K, int k, double alpha);

// Piecewise-linear K-Lipschitz path on the grid tau_j = j/T with phi_0 = 0.
// Velocities are the primary representation; phi_j is their scaled prefix sum.
class DiscretePath {
public:
    static DiscretePath from_velocities(int K, std::vector<double> velocities);
    // phi_0..phi_T; phi_0 must be 0 and every velocity (phi_{j+1}-phi_j) T must lie in [0,K]
    static DiscretePath from_values(int K, std::span<const double> phi);

    [[nodiscard]] int capacity() const { return capacity_; }
    [[nodiscard]] std::size_t grid_size() const { return velocities_.size(); }
    [[nodiscard]] double tau(std::size_t j) const {
        return static_cast<double>(j) / static_cast<double>(grid_size());
    }
    [[nodiscard]] double phi(std::size_t j) const {
        return prefix_[j] / static_cast<double>(grid_size());
    }
    [[nodiscard]] double velocity(std::size_t j) const { return velocities_[j]; }
    [[nodiscard]] const std::vector<double>& velocities() const { return velocities_; }
    // phi_j / tau_j for j >= 1; psi(0+) = v_0 at j = 0
    [[nodiscard]] double psi(std::size_t j) const;
    // phi / tau at the midpoint of cell j; equals v_0 on the first cell
    [[nodiscard]] double psi_mid(std::size_t j) const;
    [[nodiscard]] double endpoint_average() const { return phi(grid_size()); }
    // Value of the interpolant at an arbitrary tau in [0,1].
    [[nodiscard]] double at(double tau) const;

private:
    DiscretePath(int K, std::vector<double> velocities);
    int capacity_;
    std::vector<double> velocities_;
    std::vector<double> prefix_;  // sum_{i<j} v_i, j = 0..T
};

// Midpoint value of psi on a cell, from the prefix sum S_j = sum_{i<j} v_i.
inline double cell_psi(double prefix, double velocity, std::size_t j) {
    return (prefix + 0.5 * velocity) / (static_cast<double>(j) + 0.5);
}

// sum_k delta_k(alpha) log max(pi_k(beta), floor). With floor = 0 a vanishing
// pi_k contributes -inf or +inf by the sign of delta_k (nothing when delta_k
// is exactly 0); opposite infinities give the indeterminate marker.
ExtendedReal scaled_lagrangian(const UrnSpec& spec, double alpha, double beta, double floor = 0.0);

// Same, with the urn vector at beta already evaluated (K+1 entries).
ExtendedReal scaled_lagrangian_from(int K, double alpha, std::span<const double> urn_probs, double floor);

// phi_j = M_j / N, T = N.
DiscretePath embed_path(const MarketHistory& history);

// sum_j (1/T) L(v_j, psi_mid_j)
ExtendedReal scaled_action(const UrnSpec& spec, const DiscretePath& path, double floor = 0.0);

// max_j |phi_j - phi'_j|; throws std::invalid_argument on grid mismatch.
double path_distance(const DiscretePath& a, const DiscretePath& b);

struct ContinuityProbe {
    std::vector<double> epsilons;
    std::vector<double> action_changes;  // max |Phi(path) - Phi(perturbed)| per epsilon
    std::vector<double> modulus;         // change / (eps + eps log(1/eps))
};

// Perturbs `path` by random velocity noise rescaled to sup-distance eps and
// reports the observed change in the scaled action.
ContinuityProbe continuity_probe(const UrnSpec& spec, const DiscretePath& path,
                                 std::span<const double> epsilons, int trials, std::uint64_t seed,
                                 double floor = 0.0);

}  // namespace urnldp
