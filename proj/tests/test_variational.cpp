#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "urnldp/mogulskii.hpp"
#include "urnldp/variational.hpp"

using namespace urnldp;

namespace {

double binary_kl(double a, double p) {
    double r = 0.0;
    if (a > 0.0) r += a * std::log(a / p);
    if (a < 1.0) r += (1.0 - a) * std::log((1.0 - a) / (1.0 - p));
    return r;
}

// sup_l { a l - log sum_k p_k e^{k l} } by golden-section search on a wide bracket.
double cramer_by_search(const std::vector<double>& p, double a) {
    auto g = [&](double l) {
        double z = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) z += p[k] * std::exp(k * l);
        return a * l - std::log(z);
    };
    double lo = -40.0, hi = 40.0;
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int i = 0; i < 300; ++i) {
        const double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
        if (g(x1) < g(x2)) lo = x1;
        else hi = x2;
    }
    return g(0.5 * (lo + hi));
}

const UrnSpec& smooth_k2() {
    static const UrnSpec s(2, {UrnCurve::polynomial({0.3, 0.1}), UrnCurve::polynomial({0.2, 0.1})});
    return s;
}

}  // namespace

TEST_CASE("local_rate") {
    const double p = 0.35;
    for (double b : {0.0, 0.5, 1.0}) CHECK(std::abs(local_rate(constant_spec({p}), p, b).value()) <= 1e-15);
    for (double a : {0.0, 0.3, 1.0, 1.6, 2.0})
        for (double b : {0.2, 1.9})
            CHECK(local_rate(uniform_spec(2), a, b).value() ==
                  doctest::Approx(mogulskii_lagrangian(a, 2)).epsilon(1e-12).scale(1.0));
    CHECK(local_rate(constant_spec({0.0, 0.5}), 1.0, 0.3).is_pos_inf());
}

TEST_CASE("K=1 local rate is the binary relative entropy") {
    const UrnSpec lin(1, {UrnCurve::polynomial({0.1, 0.8})});
    for (int i = 0; i <= 20; ++i) {
        for (int j = 0; j <= 20; ++j) {
            const double a = i / 20.0, b = j / 20.0;
            const double p = 0.1 + 0.8 * b;
            CHECK(std::abs(local_rate(lin, a, b).value() - binary_kl(a, p)) <= 1e-12);
            CHECK(std::abs(cramer_local_rate(lin, a, b) - binary_kl(a, p)) <= 1e-9);
        }
    }
}

TEST_CASE("cramer_local_rate") {
    CHECK(cramer_local_rate(constant_spec({0.5}), 0.25, 0.0) == doctest::Approx(0.130812035941137).epsilon(1e-10));
    for (double b : {0.0, 0.7, 1.3, 2.0})
        CHECK(std::abs(cramer_local_rate(smooth_k2(), mean_step(smooth_k2(), b), b)) <= 1e-12);
    const auto degenerate = constant_spec({0.0, 0.5});
    CHECK(cramer_local_rate(degenerate, 1.0, 0.4) == 0.0);
    CHECK(cramer_local_rate(constant_spec({1.0, 0.0}), 1.5, 0.4) == INFINITY);
    CHECK(cramer_local_rate(degenerate, 0.0, 0.4) == doctest::Approx(std::log(2.0)));

    std::vector<double> probs(3);
    for (double b : {0.1, 1.0, 1.8}) {
        urn_vector(smooth_k2(), b, probs);
        for (double a : {0.05, 0.4, 1.0, 1.5, 1.95})
            CHECK(cramer_rate(probs, a) == doctest::Approx(cramer_by_search(probs, a)).epsilon(1e-9));
    }
}

TEST_CASE("rate_functional") {
    const double p = 0.4;
    CHECK(std::abs(rate_functional(constant_spec({p}), DiscretePath::from_velocities(1, std::vector<double>(30, p)))
                       .value()) <= 1e-15);
    CHECK(std::abs(rate_functional(uniform_spec(2), DiscretePath::from_velocities(2, std::vector<double>(30, 1.0)))
                       .value()) <= 1e-15);
    CHECK(rate_functional(constant_spec({0.5}), DiscretePath::from_velocities(1, std::vector<double>(30, 0.25)))
              .value() == doctest::Approx(0.130812035941137).epsilon(1e-12));

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    std::vector<double> v(80);
    for (auto& x : v) x = u(rng);
    const auto path = DiscretePath::from_velocities(2, v);
    const double split = iid_action(path, 2, true) - scaled_action(smooth_k2(), path).value();
    CHECK(rate_functional(smooth_k2(), path).value() == doctest::Approx(split).epsilon(1e-12));
    CHECK(rate_functional(uniform_spec(2), path).value() >= 0.0);
}

TEST_CASE("projection onto the event set") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(25);
        for (auto& x : v) x = u(rng);
        const double lo = 0.3 + 0.01 * (trial % 50), hi = lo + 0.05 * (trial % 3);
        auto w = v;
        project_onto_event(w, 2, lo, hi);
        double mean = 0.0;
        for (double x : w) {
            CHECK(x >= 0.0);
            CHECK(x <= 2.0);
            mean += x / 25.0;
        }
        CHECK(mean >= lo - 1e-12);
        CHECK(mean <= hi + 1e-12);
        // the projection is no farther than any feasible point we can name
        std::vector<double> straight(25, lo);
        double dw = 0.0, ds = 0.0;
        for (std::size_t j = 0; j < 25; ++j) {
            dw += (w[j] - v[j]) * (w[j] - v[j]);
            ds += (straight[j] - v[j]) * (straight[j] - v[j]);
        }
        CHECK(dw <= ds + 1e-12);
        auto again = w;
        project_onto_event(again, 2, lo, hi);
        for (std::size_t j = 0; j < 25; ++j) CHECK(std::abs(again[j] - w[j]) <= 1e-12);
    }
}

TEST_CASE("objective gradient matches finite differences of the objective") {
    const std::size_t T = 12;
    EndpointObjective obj(smooth_k2(), T, 1e-12);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.2, 1.8);
    std::vector<double> v(T), g(T);
    for (auto& x : v) x = u(rng);
    obj.gradient(v, g);
    for (std::size_t j = 0; j < T; ++j) {
        const double h = 1e-5;
        auto vp = v, vm = v;
        vp[j] += h;
        vm[j] -= h;
        const double fd = (obj.value(vp) - obj.value(vm)) / (2 * h);
        CHECK(g[j] == doctest::Approx(fd).epsilon(1e-4).scale(1e-3));
    }
}

TEST_CASE("optimize_endpoint on the fair coin") {
    const auto spec = constant_spec({0.5});
    const std::size_t T = 200;
    const auto r = optimize_endpoint(spec, EndpointEvent(0.25, 0.25 + 1.0 / T), T);
    // The cheapest point of [0.25, 0.255] is its upper end.
    CHECK(std::abs(r.entropy_density + binary_kl(0.25 + 1.0 / T, 0.5)) <= 2e-3);
    CHECK(std::abs(r.entropy_density + binary_kl(0.25, 0.5)) <= 6e-3);
    const auto straight = DiscretePath::from_velocities(1, std::vector<double>(T, 0.25));
    CHECK(path_distance(r.optimal_path, straight) <= 1e-2);
    CHECK(r.optimal_path.endpoint_average() >= 0.25 - 1.0 / T);
    CHECK(r.optimal_path.endpoint_average() <= 0.25 + 2.0 / T);
    CHECK(r.converged);
    CHECK(r.restart_objectives.size() == 8);
    CHECK(-r.entropy_density == doctest::Approx(rate_functional(spec, r.optimal_path).value()).epsilon(1e-12));
    REQUIRE(r.oracle_gap.has_value());
    CHECK(std::abs(*r.oracle_gap) <= 1e-9);
}

TEST_CASE("optimize_endpoint on the uniform K=2 urn") {
    const std::size_t T = 100;
    const auto r = optimize_endpoint(uniform_spec(2), EndpointEvent(1.0, 1.0), T);
    CHECK(std::abs(r.entropy_density) <= 1e-6);
    CHECK(r.solved_event.lo == doctest::Approx(1.0 - 0.5 / T));
    CHECK(r.solved_event.hi == doctest::Approx(1.0 + 0.5 / T));
    const auto diag = DiscretePath::from_velocities(2, std::vector<double>(T, 1.0));
    CHECK(path_distance(r.optimal_path, diag) <= 1e-2);
}

TEST_CASE("optimize_endpoint errors") {
    CHECK_THROWS_AS((void)optimize_endpoint(constant_spec({0.5}), EndpointEvent(1.5, 2.0), 20), std::domain_error);
    CHECK_THROWS_AS((void)optimize_endpoint(constant_spec({0.0, 0.5}), EndpointEvent(0.5, 0.6), 20),
                    std::domain_error);
    CHECK_THROWS_AS((void)EndpointEvent(0.6, 0.5), std::invalid_argument);
}

TEST_CASE("gauge bookkeeping gives bit-identical results") {
    OptimizeOptions a, b;
    b.gauge = Gauge::unshifted_compensated;
    a.restarts = b.restarts = 3;
    const auto ra = optimize_endpoint(smooth_k2(), EndpointEvent(0.6, 0.7), 40, a);
    const auto rb = optimize_endpoint(smooth_k2(), EndpointEvent(0.6, 0.7), 40, b);
    CHECK(ra.entropy_density == rb.entropy_density);
    CHECK(ra.optimal_path.velocities() == rb.optimal_path.velocities());
}

TEST_CASE("nested events never increase the optimum") {
    OptimizeOptions opt;
    opt.restarts = 4;
    const std::vector<EndpointEvent> nested = {{0.50, 0.52}, {0.45, 0.55}, {0.40, 0.60}, {0.30, 0.90}};
    double prev = INFINITY;
    for (const auto& e : nested) {
        const double I = -optimize_endpoint(smooth_k2(), e, 40, opt).entropy_density;
        CHECK(I <= prev + 1e-9);
        prev = I;
    }
}

TEST_CASE("restart stability and psi-consistency on a smooth spec") {
    const auto r = optimize_endpoint(smooth_k2(), EndpointEvent(1.5, 1.55), 60);
    REQUIRE(r.restart_objectives.size() >= 8);
    CHECK(r.restarts_agreement < 1e-4);
    for (std::size_t j = 1; j <= 60; ++j) {
        CHECK(r.optimal_path.psi(j) >= 0.0);
        CHECK(r.optimal_path.psi(j) <= 2.0);
    }
}

TEST_CASE("parallel restarts give the same answer") {
    OptimizeOptions one, four;
    four.threads = 4;
    const auto a = optimize_endpoint(smooth_k2(), EndpointEvent(0.4, 0.45), 50, one);
    const auto b = optimize_endpoint(smooth_k2(), EndpointEvent(0.4, 0.45), 50, four);
    CHECK(a.entropy_density == b.entropy_density);
    CHECK(a.restart_objectives == b.restart_objectives);
}

TEST_CASE("zero_cost_flow") {
    const double p = 0.3;
    const auto coin = zero_cost_flow(constant_spec({p}), 50);
    for (double v : coin.path.velocities()) CHECK(v == doctest::Approx(p).epsilon(1e-12));
    for (const auto& c : coin.cells) CHECK(std::abs(c.local_rate.value()) <= 1e-10);

    const auto uni = zero_cost_flow(uniform_spec(2), 50);
    for (double v : uni.path.velocities()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& c : uni.cells) CHECK(std::abs(c.local_rate.value()) <= 1e-10);

    const UrnSpec lin(1, {UrnCurve::polynomial({0.2, 0.6})});
    const auto flow = zero_cost_flow(lin, 100);
    CHECK(flow.path.velocity(0) == doctest::Approx(0.5).epsilon(1e-9));
    for (const auto& c : flow.cells) CHECK(std::abs(c.local_rate.value()) <= 1e-10);

    const UrnSpec quarter(2, {UrnCurve::polynomial({0.0, 0.25}), UrnCurve::polynomial({0.0, 0.25})});
    const auto q = zero_cost_flow(quarter, 40);
    CHECK(q.initial_fixed_points.front() == doctest::Approx(0.0).scale(1.0));
    for (const auto& c : q.cells) {
        CHECK(c.velocity == doctest::Approx(mean_step(quarter, c.psi)).scale(1.0).epsilon(1e-9));
        CHECK(c.local_rate.is_finite());
    }
}

TEST_CASE("Cramer comparison report") {
    const auto cmp = compare_cramer(smooth_k2(), 16);
    CHECK(cmp.points.size() == 256);
    CHECK(cmp.finite_points == 256);
    std::size_t undercut = 0;
    for (const auto& pt : cmp.points)
        if (pt.local.value() < pt.cramer - 1e-9) ++undercut;
    CHECK(undercut == cmp.undercut_points);

    const auto degenerate = compare_cramer(constant_spec({0.0, 0.5}), 3);
    bool found = false;
    for (const auto& pt : degenerate.points)
        if (pt.alpha == 1.0) {
            found = true;
            CHECK(pt.local.is_pos_inf());
            CHECK(pt.cramer == 0.0);
        }
    CHECK(found);
}
