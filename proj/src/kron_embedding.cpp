#include "urnldp/kron_embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace urnldp {

namespace {
constexpr double kLipschitzTol = 1e-9;
}

double kron_delta(int K, int k, double alpha) {
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    if (k < 0 || k > K) throw std::out_of_range("kron_delta: k must be in 0..K");
    double prod = 1.0;
    for (int z = 0; z <= K; ++z) {
        if (z == k) continue;
        prod *= (z - alpha) / static_cast<double>(z - k);
    }
    return prod;
}

// ---------------------------------------------------------------------------
// DiscretePath

DiscretePath::DiscretePath(int K, std::vector<double> velocities)
    : capacity_(K), velocities_(std::move(velocities)), prefix_(velocities_.size() + 1, 0.0) {
    if (capacity_ < 1) throw std::invalid_argument("path capacity must be >= 1");
    if (velocities_.empty()) throw std::invalid_argument("path needs at least one cell");
    for (std::size_t j = 0; j < velocities_.size(); ++j) {
        double& v = velocities_[j];
        if (!(v >= -kLipschitzTol && v <= capacity_ + kLipschitzTol))
            throw std::invalid_argument("path velocity outside [0, K]");
        v = std::clamp(v, 0.0, static_cast<double>(capacity_));
        prefix_[j + 1] = prefix_[j] + v;
    }
}

DiscretePath DiscretePath::from_velocities(int K, std::vector<double> velocities) {
    return DiscretePath(K, std::move(velocities));
}

DiscretePath DiscretePath::from_values(int K, std::span<const double> phi) {
    if (phi.size() < 2) throw std::invalid_argument("path needs at least two grid values");
    if (phi[0] != 0.0) throw std::invalid_argument("path must start at phi(0) = 0");
    const double T = static_cast<double>(phi.size() - 1);
    std::vector<double> v(phi.size() - 1);
    for (std::size_t j = 0; j + 1 < phi.size(); ++j) v[j] = (phi[j + 1] - phi[j]) * T;
    return DiscretePath(K, std::move(v));
}

double DiscretePath::psi(std::size_t j) const {
    if (j == 0) return velocities_[0];
    return prefix_[j] / static_cast<double>(j);
}

double DiscretePath::psi_mid(std::size_t j) const { return cell_psi(prefix_[j], velocities_[j], j); }

double DiscretePath::at(double tau) const {
    if (tau <= 0.0) return 0.0;
    const double T = static_cast<double>(grid_size());
    if (tau >= 1.0) return phi(grid_size());
    const auto j = static_cast<std::size_t>(std::floor(tau * T));
    return (prefix_[j] + (tau * T - static_cast<double>(j)) * velocities_[j]) / T;
}

// ---------------------------------------------------------------------------
// Lagrangian and action

ExtendedReal scaled_lagrangian_from(int K, double alpha, std::span<const double> urn_probs, double floor) {
    if (floor < 0.0) throw std::invalid_argument("probability floor must be >= 0");
    double finite = 0.0;
    bool pos = false, neg = false;
    for (int k = 0; k <= K; ++k) {
        const double d = kron_delta(K, k, alpha);
        const double p = std::max(urn_probs[static_cast<std::size_t>(k)], floor);
        if (p > 0.0) {
            finite += d * std::log(p);
        } else if (d > 0.0) {
            neg = true;
        } else if (d < 0.0) {
            pos = true;
        }
    }
    if (pos && neg) return ExtendedReal::indeterminate();
    if (neg) return ExtendedReal::neg_inf();
    if (pos) return ExtendedReal::pos_inf();
    return {finite};
}

ExtendedReal scaled_lagrangian(const UrnSpec& spec, double alpha, double beta, double floor) {
    std::vector<double> probs(static_cast<std::size_t>(spec.capacity() + 1));
    urn_vector(spec, beta, probs);
    return scaled_lagrangian_from(spec.capacity(), alpha, probs, floor);
}

DiscretePath embed_path(const MarketHistory& history) {
    if (history.size() == 0) throw std::invalid_argument("cannot embed an empty history");
    std::vector<double> v(history.steps().begin(), history.steps().end());
    return DiscretePath::from_velocities(history.capacity(), std::move(v));
}

ExtendedReal scaled_action(const UrnSpec& spec, const DiscretePath& path, double floor) {
    if (path.capacity() != spec.capacity()) throw std::invalid_argument("path/spec capacity mismatch");
    const int K = spec.capacity();
    std::vector<double> probs(static_cast<std::size_t>(K + 1));
    ExtendedReal acc = 0.0;
    for (std::size_t j = 0; j < path.grid_size(); ++j) {
        const double beta = std::clamp(path.psi_mid(j), 0.0, static_cast<double>(K));
        urn_vector(spec, beta, probs);
        acc += scaled_lagrangian_from(K, path.velocity(j), probs, floor);
    }
    return (1.0 / static_cast<double>(path.grid_size())) * acc;
}

double path_distance(const DiscretePath& a, const DiscretePath& b) {
    if (a.grid_size() != b.grid_size()) throw std::invalid_argument("path_distance: grid mismatch");
    double d = 0.0;
    for (std::size_t j = 0; j <= a.grid_size(); ++j) d = std::max(d, std::abs(a.phi(j) - b.phi(j)));
    return d;
}

ContinuityProbe continuity_probe(const UrnSpec& spec, const DiscretePath& path,
                                 std::span<const double> epsilons, int trials, std::uint64_t seed,
                                 double floor) {
    const int K = path.capacity();
    const std::size_t T = path.grid_size();
    const double base = scaled_action(spec, path, floor).value();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, K);

    ContinuityProbe probe;
    for (double eps : epsilons) {
        double worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            // Convex combination with a random admissible path stays K-Lipschitz;
            // its sup-distance is linear in the mixing weight.
            std::vector<double> u(T);
            for (auto& x : u) x = unif(rng);
            const auto other = DiscretePath::from_velocities(K, u);
            const double full = path_distance(path, other);
            if (full <= 0.0) continue;
            const double lambda = std::min(1.0, eps / full);
            std::vector<double> mixed(T);
            for (std::size_t j = 0; j < T; ++j) mixed[j] = (1.0 - lambda) * path.velocity(j) + lambda * u[j];
            const auto perturbed = DiscretePath::from_velocities(K, std::move(mixed));
            const auto value = scaled_action(spec, perturbed, floor);
            if (!value.is_finite()) {
                worst = std::numeric_limits<double>::infinity();
                continue;
            }
            worst = std::max(worst, std::abs(value.value() - base));
        }
        probe.epsilons.push_back(eps);
        probe.action_changes.push_back(worst);
        probe.modulus.push_back(worst / (eps + eps * std::log(1.0 / eps)));
    }
    return probe;
}

}  // namespace urnldp
