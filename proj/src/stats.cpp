#include "urnldp/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <stdexcept>
#include <vector>

namespace urnldp {

ChiSquareResult chi_square_test(std::span<const double> empirical, std::span<const double> expected,
                                std::size_t runs, double min_expected) {
    if (empirical.size() != expected.size()) throw std::invalid_argument("chi_square_test: size mismatch");
    const double n = static_cast<double>(runs);
    std::vector<double> obs, exp;
    double o = 0.0, e = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        o += empirical[i] * n;
        e += expected[i] * n;
        if (e >= min_expected) {
            obs.push_back(o);
            exp.push_back(e);
            o = e = 0.0;
        }
    }
    if (e > 0.0 || o > 0.0) {
        if (exp.empty()) {
            obs.push_back(o);
            exp.push_back(e);
        } else {
            obs.back() += o;
            exp.back() += e;
        }
    }
    ChiSquareResult r;
    for (std::size_t i = 0; i < exp.size(); ++i) {
        const double d = obs[i] - exp[i];
        r.statistic += d * d / exp[i];
    }
    r.degrees_of_freedom = static_cast<int>(exp.size()) - 1;
    if (r.degrees_of_freedom < 1) return r;
    boost::math::chi_squared dist(r.degrees_of_freedom);
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
    return r;
}

}  // namespace urnldp
