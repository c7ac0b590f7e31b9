#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "urnldp/stats.hpp"
#include "urnldp/urn_model.hpp"

using namespace urnldp;

namespace {

UrnSpec linear_k1() { return UrnSpec(1, {UrnCurve::polynomial({0.0, 1.0})}); }

// Probability of M_N = m by summing path weights over all (K+1)^N histories.
std::vector<double> brute_force(const UrnSpec& spec, std::size_t N) {
    const int K = spec.capacity();
    std::vector<double> dist(K * N + 1, 0.0);
    std::vector<int> steps(N, 0);
    while (true) {
        const MarketHistory h(K, steps, spec.psi_init());
        const int m = std::accumulate(steps.begin(), steps.end(), 0);
        dist[m] += path_weight(spec, h);
        std::size_t i = 0;
        while (i < N && steps[i] == K) steps[i++] = 0;
        if (i == N) break;
        ++steps[i];
    }
    return dist;
}

}  // namespace

TEST_CASE("validate_spec") {
    CHECK(validate_spec(linear_k1()).ok());

    const auto over = validate_spec(constant_spec({0.6, 0.6}));
    REQUIRE_FALSE(over.ok());
    CHECK(over.violations.size() >= 1024);
    for (const auto& v : over.violations) CHECK(v.k == 0);

    const UrnSpec negative(2, {UrnCurve::polynomial({-0.5, 1.0}), UrnCurve::constant(0.0)});
    const auto rep = validate_spec(negative);
    REQUIRE_FALSE(rep.ok());
    bool negative_seen = false;
    for (const auto& v : rep.violations) {
        if (v.k == 1 && v.value < 0.0) {
            negative_seen = true;
            CHECK(v.alpha < 0.5);
        }
    }
    CHECK(negative_seen);
}

TEST_CASE("eval_pi") {
    CHECK(eval_pi(uniform_spec(2), 0, 0.7) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(eval_pi(linear_k1(), 1, 0.25) == 0.25);
    CHECK(eval_pi(constant_spec({0.5, 0.5}), 0, 1.3) == 0.0);
    CHECK_THROWS_AS((void)eval_pi(linear_k1(), 1, 1.5), std::out_of_range);
    CHECK_THROWS_AS((void)eval_pi(constant_spec({0.6, 0.6}), 0, 1.0), std::domain_error);
}

TEST_CASE("normalization of the urn vector") {
    const std::vector<UrnSpec> specs = {
        uniform_spec(2), linear_k1(),
        UrnSpec(2, {UrnCurve::polynomial({0.3, 0.1}), UrnCurve::polynomial({0.2, 0.1})}),
        UrnSpec(3, {UrnCurve::piecewise_linear({{0.0, 0.1}, {3.0, 0.3}}), UrnCurve::constant(0.2),
                    UrnCurve::polynomial({0.05, 0.0, 0.02})})};
    for (const auto& spec : specs) {
        const int K = spec.capacity();
        std::vector<double> p(K + 1);
        for (int i = 0; i <= 1024; ++i) {
            const double a = K * i / 1024.0;
            urn_vector(spec, a, p);
            CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("mean_step") {
    CHECK(mean_step(uniform_spec(2), 0.4) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(mean_step(constant_spec({0.37}), 0.9) == 0.37);
    CHECK(mean_step(constant_spec({0.0, 0.5}), 1.7) == 1.0);
}

TEST_CASE("fixed_points") {
    const auto uni = fixed_points(uniform_spec(2));
    REQUIRE(uni.roots.size() == 1);
    CHECK(uni.roots[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK_FALSE(uni.isolation_violated());

    CHECK(fixed_points(linear_k1()).isolation_violated());

    const UrnSpec reflect(2, {UrnCurve::constant(0.0), UrnCurve::polynomial({1.0, -0.5})});
    const auto r = fixed_points(reflect);
    REQUIRE(r.roots.size() == 1);
    CHECK(std::abs(r.roots[0] - 1.0) <= 1e-10);
}

TEST_CASE("simulate") {
    const auto ones = simulate(constant_spec({1.0}), 50, 3);
    for (int s : ones.steps()) CHECK(s == 1);
    const auto twos = simulate(constant_spec({0.0, 1.0}), 50, 3);
    for (int s : twos.steps()) CHECK(s == 2);

    const std::size_t N = 100000;
    const auto h = simulate(uniform_spec(2), N, 11);
    std::vector<double> count(3, 0.0);
    for (int s : h.steps()) count[s] += 1.0;
    const double sigma = std::sqrt(2.0 / 9.0 / N);
    for (double c : count) CHECK(std::abs(c / N - 1.0 / 3.0) <= 3.0 * sigma);

    const auto again = simulate(uniform_spec(2), 1000, 11);
    CHECK(std::equal(again.steps().begin(), again.steps().end(), h.steps().begin()));
}

TEST_CASE("simulated histories never take zero-probability steps") {
    const auto spec = constant_spec({0.0, 0.5});
    const auto h = simulate(spec, 5000, 5);
    for (int s : h.steps()) CHECK(s != 1);
    CHECK(std::isfinite(action(spec, h)));
}

TEST_CASE("step and path weights") {
    const auto p = constant_spec({0.3});
    CHECK(path_weight(p, MarketHistory(1, {1, 0}, 0.5)) == doctest::Approx(0.3 * 0.7).epsilon(1e-15));

    const std::size_t N = 7;
    const MarketHistory any(2, {0, 2, 1, 1, 2, 0, 0}, 1.0);
    CHECK(path_weight(uniform_spec(2), any) == doctest::Approx(std::pow(3.0, -double(N))).epsilon(1e-13));
    CHECK(action(uniform_spec(2), any) == doctest::Approx(-double(N) * std::log(3.0)).epsilon(1e-13));

    CHECK(path_weight(linear_k1().with_psi_init(0.5), MarketHistory(1, {1, 1}, 0.5)) == 0.5);
    CHECK(step_weight(linear_k1(), 1, 0.25) == 0.25);
    CHECK(action(constant_spec({1.0}), MarketHistory(1, {1, 0}, 0.5)) == -INFINITY);
}

TEST_CASE("constant urn is i.i.d.: action is order invariant") {
    const UrnSpec spec = constant_spec({0.2, 0.5});
    const MarketHistory a(2, {0, 1, 2, 2, 1}, 1.0), b(2, {2, 2, 1, 1, 0}, 1.0);
    const double product = 0.3 * 0.2 * 0.5 * 0.5 * 0.2;
    CHECK(path_weight(spec, a) == doctest::Approx(product).epsilon(1e-14));
    CHECK(action(spec, a) == doctest::Approx(action(spec, b)).epsilon(1e-14));
}

TEST_CASE("exact_distribution examples") {
    const auto b = exact_distribution(constant_spec({0.5}), 4);
    REQUIRE(b.size() == 5);
    CHECK(b[2] == doctest::Approx(0.375).epsilon(1e-14));

    const auto u = exact_distribution(uniform_spec(2), 2);
    REQUIRE(u.size() == 5);
    CHECK(u[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    const auto spec = linear_k1().with_psi_init(0.5);
    const auto dp = exact_distribution(spec, 3);
    const auto bf = brute_force(spec, 3);
    for (std::size_t m = 0; m < dp.size(); ++m) CHECK(std::abs(dp[m] - bf[m]) <= 1e-12);
}

TEST_CASE("exact_distribution agrees with enumeration and sums to one") {
    const std::vector<UrnSpec> specs = {
        linear_k1(), constant_spec({0.3}),
        UrnSpec(1, {UrnCurve::piecewise_linear({{0.0, 0.8}, {0.5, 0.2}, {1.0, 0.6}})}, 0.3),
        uniform_spec(2),
        UrnSpec(2, {UrnCurve::polynomial({0.3, 0.1}), UrnCurve::polynomial({0.2, 0.1})}),
        UrnSpec(2, {UrnCurve::polynomial({0.0, 0.25}), UrnCurve::polynomial({0.0, 0.25})}, 0.4)};
    for (const auto& spec : specs) {
        const std::size_t maxN = spec.capacity() == 1 ? 10 : 7;
        for (std::size_t N = 1; N <= maxN; ++N) {
            const auto dp = exact_distribution(spec, N);
            CHECK(std::abs(std::accumulate(dp.begin(), dp.end(), 0.0) - 1.0) <= 1e-10);
            const auto bf = brute_force(spec, N);
            double err = 0.0;
            for (std::size_t m = 0; m < dp.size(); ++m) err = std::max(err, std::abs(dp[m] - bf[m]));
            CHECK(err <= 1e-12);
        }
    }
}

TEST_CASE("exact log distribution stays finite in deep tails") {
    const auto logd = exact_log_distribution(constant_spec({0.5}), 3000);
    CHECK(logd.front() == doctest::Approx(-3000.0 * std::log(2.0)).epsilon(1e-12));
    CHECK(std::isfinite(logd.back()));
    CHECK_THROWS_AS((void)exact_distribution(uniform_spec(8), 100000), std::length_error);
}

TEST_CASE("event probability from the log distribution") {
    const auto logd = exact_log_distribution(constant_spec({0.5}), 4);
    CHECK(std::exp(log_event_probability(logd, 4, 0.5, 0.5)) == doctest::Approx(0.375).epsilon(1e-14));
    CHECK(std::exp(log_event_probability(logd, 4, 0.0, 1.0)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(log_event_probability(logd, 4, 0.3, 0.4) == -INFINITY);
}

TEST_CASE("Monte Carlo histogram matches the exact law") {
    const std::vector<UrnSpec> specs = {linear_k1(), UrnSpec(2, {UrnCurve::polynomial({0.3, 0.1}),
                                                                 UrnCurve::polynomial({0.2, 0.1})})};
    for (const auto& spec : specs) {
        const std::size_t N = 20, runs = 100000;
        const auto freq = simulate_histogram(spec, N, runs, 2024, 4);
        const auto exact = exact_distribution(spec, N);
        const auto chi = chi_square_test(freq, exact, runs);
        CHECK(chi.p_value > 1e-4);
        CHECK(freq == simulate_histogram(spec, N, runs, 2024, 1));
    }
}

TEST_CASE("stochastic-approximation drift for a constant urn") {
    const auto spec = constant_spec({0.1, 0.6});
    const double drift_target = mean_step(spec, 0.0);
    const std::size_t runs = 4000, N = 50;
    // (n+1)(psi_{n+1} - psi_n) = sigma_{n+1} - psi_n, whose mean is pi_bar - psi_n.
    double sum = 0.0, sum_sq = 0.0, count = 0.0;
    for (std::size_t r = 0; r < runs; ++r) {
        const auto h = simulate(spec, N, derive_seed(99, r));
        const auto psi = h.averages();
        for (std::size_t n = 1; n < N; ++n) {
            const double residual = (n + 1.0) * (psi[n + 1] - psi[n]) - (drift_target - psi[n]);
            sum += residual;
            sum_sq += residual * residual;
            count += 1.0;
        }
    }
    const double mean = sum / count;
    const double se = std::sqrt((sum_sq / count - mean * mean) / count);
    CHECK(std::abs(mean) <= 4.0 * se);
}

TEST_CASE("running sums and averages") {
    const MarketHistory h(2, {2, 0, 1}, 0.7);
    CHECK(h.running_sums() == std::vector<std::int64_t>{0, 2, 2, 3});
    const auto psi = h.averages();
    CHECK(psi[0] == 0.7);
    CHECK(psi[1] == 2.0);
    CHECK(psi[3] == 1.0);
    CHECK_THROWS((void)MarketHistory(2, {3}, 1.0));
}
