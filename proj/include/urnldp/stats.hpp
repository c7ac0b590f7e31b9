#pragma once

#include <cstddef>
#include <span>

namespace urnldp {

struct ChiSquareResult {
    double statistic{0.0};
    int degrees_of_freedom{0};
    double p_value{1.0};
};

// Pearson goodness of fit of empirical frequencies (over `runs` samples)
// against expected probabilities. Adjacent bins are pooled until each
// pooled bin expects at least `min_expected` samples.
ChiSquareResult chi_square_test(std::span<const double> empirical, std::span<const double> expected,
                                std::size_t runs, double min_expected = 5.0);

}  // namespace urnldp
