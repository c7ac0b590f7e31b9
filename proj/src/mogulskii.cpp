#include "urnldp/mogulskii.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "urnldp/root_finding.hpp"

namespace urnldp {

namespace {

constexpr double kSeriesRadius = 1e-4;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_capacity(int K) {
    if (K < 1) throw std::invalid_argument("K must be >= 1");
}

// Cumulants of the uniform law on {0,...,K}: mean K/2, variance K(K+2)/12,
// third cumulant 0, fourth cumulant -((K+1)^4 - 1)/120.
struct UniformCumulants {
    double mean, var, k4;
    explicit UniformCumulants(int K) {
        const double n = K + 1.0;
        mean = 0.5 * K;
        var = (n * n - 1.0) / 12.0;
        k4 = -(n * n * n * n - 1.0) / 120.0;
    }
};

// zeta0 for beta < 0 (no overflow, no cancellation at large |beta|).
double zeta0_negative(double beta, int K) {
    return std::log(-std::expm1((K + 1) * beta)) - std::log(-std::expm1(beta)) - std::log(K + 1.0);
}

// dzeta0 for beta < 0: 1/(e^{-b}-1) - (K+1)/(e^{-(K+1)b}-1)
double dzeta0_negative(double beta, int K) {
    return 1.0 / std::expm1(-beta) - (K + 1) / std::expm1(-(K + 1) * beta);
}

}  // namespace

double zeta0(double beta, int K) {
    check_capacity(K);
    if (std::abs(beta) < kSeriesRadius) {
        const UniformCumulants c(K);
        const double b2 = beta * beta;
        return c.mean * beta + 0.5 * c.var * b2 + c.k4 * b2 * b2 / 24.0;
    }
    // Symmetry k -> K - k: zeta0(b) = K b + zeta0(-b)
    if (beta > 0.0) return K * beta + zeta0_negative(-beta, K);
    return zeta0_negative(beta, K);
}

double dzeta0(double beta, int K) {
    check_capacity(K);
    if (std::abs(beta) < kSeriesRadius) {
        const UniformCumulants c(K);
        return c.mean + c.var * beta + c.k4 * beta * beta * beta / 6.0;
    }
    if (beta > 0.0) return K - dzeta0_negative(-beta, K);
    return dzeta0_negative(beta, K);
}

double d2zeta0(double beta, int K) {
    check_capacity(K);
    // Tilted weights e^{b(k - k_top)} with k_top the dominant end, for stability.
    const double shift = beta > 0.0 ? K : 0.0;
    double z = 0.0, m1 = 0.0, m2 = 0.0;
    for (int k = 0; k <= K; ++k) {
        const double w = std::exp(beta * (k - shift));
        z += w;
        m1 += k * w;
        m2 += static_cast<double>(k) * k * w;
    }
    const double mean = m1 / z;
    return std::max(m2 / z - mean * mean, 0.0);
}

XiSolution xi_invert(double alpha, int K) {
    check_capacity(K);
    if (!(alpha > 0.0 && alpha < K)) throw std::out_of_range("xi_invert needs 0 < alpha < K");
    auto eval = [K](double b) { return std::pair{dzeta0(b, K), d2zeta0(b, K)}; };
    const auto root = solve_increasing(eval, alpha, 1e-12, 1.0, 4096.0);
    XiSolution s{};
    s.alpha = alpha;
    s.K = K;
    s.beta_star = root.x;
    s.xi = std::exp(root.x);
    s.residual = std::abs(dzeta0(root.x, K) - alpha);
    return s;
}

double mogulskii_lagrangian(double alpha, int K, bool shifted) {
    check_capacity(K);
    const double gauge = shifted ? std::log(K + 1.0) : 0.0;
    if (alpha < 0.0 || alpha > K) throw std::out_of_range("mogulskii_lagrangian needs alpha in [0, K]");
    // Symmetric about K/2; evaluate on the lower half where beta* <= 0.
    const double a = std::min(alpha, K - alpha);
    if (a <= 0.0) return std::log(K + 1.0) - gauge;
    if (a == 0.5 * K) return -gauge;
    const auto s = xi_invert(a, K);
    const double value = a * s.beta_star - zeta0(s.beta_star, K);
    return std::max(value, 0.0) - gauge;
}

double iid_action(const DiscretePath& path, int K, bool shifted) {
    const auto T = path.grid_size();
    double acc = 0.0;
    for (std::size_t j = 0; j < T; ++j) acc += mogulskii_lagrangian(path.velocity(j), K, shifted);
    return acc / static_cast<double>(T);
}

std::vector<MogulskiiRow> mogulskii_table(int K, int grid) {
    check_capacity(K);
    if (grid < 1) throw std::invalid_argument("grid must be positive");
    std::vector<MogulskiiRow> rows;
    rows.reserve(static_cast<std::size_t>(grid) + 1);
    for (int i = 0; i <= grid; ++i) {
        const double alpha = static_cast<double>(K) * i / grid;
        MogulskiiRow r{};
        r.alpha = alpha;
        if (i == 0) {
            r.xi = 0.0;
            r.beta_star = -kInf;
        } else if (i == grid) {
            r.xi = kInf;
            r.beta_star = kInf;
        } else {
            const auto s = xi_invert(alpha, K);
            r.xi = s.xi;
            r.beta_star = s.beta_star;
        }
        r.l0_unshifted = mogulskii_lagrangian(alpha, K, false);
        r.l0_shifted = mogulskii_lagrangian(alpha, K, true);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace urnldp
