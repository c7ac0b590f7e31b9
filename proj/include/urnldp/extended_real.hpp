#pragma once

#include <limits>
#include <string>

namespace urnldp {

// A real number that may also be +inf, -inf, or an explicit "indeterminate"
// marker (the result of adding infinities of opposite sign). NaN never leaks
// out of arithmetic on this type; it is mapped to the indeterminate state.
class ExtendedReal {
public:
    constexpr ExtendedReal() = default;
    constexpr ExtendedReal(double v) : value_(v), indeterminate_(v != v) {}  // NOLINT: implicit on purpose

    static constexpr ExtendedReal indeterminate() {
        ExtendedReal r;
        r.indeterminate_ = true;
        return r;
    }
    static constexpr ExtendedReal pos_inf() { return {std::numeric_limits<double>::infinity()}; }
    static constexpr ExtendedReal neg_inf() { return {-std::numeric_limits<double>::infinity()}; }

    [[nodiscard]] constexpr bool is_indeterminate() const { return indeterminate_; }
    [[nodiscard]] constexpr bool is_pos_inf() const {
        return !indeterminate_ && value_ == std::numeric_limits<double>::infinity();
    }
    [[nodiscard]] constexpr bool is_neg_inf() const {
        return !indeterminate_ && value_ == -std::numeric_limits<double>::infinity();
    }
    [[nodiscard]] constexpr bool is_finite() const {
        return !indeterminate_ && !is_pos_inf() && !is_neg_inf();
    }

    // Throws std::domain_error when indeterminate.
    [[nodiscard]] double value() const;
    [[nodiscard]] constexpr double value_or(double fallback) const {
        return indeterminate_ ? fallback : value_;
    }

    // "inf", "-inf", "indeterminate" or the number with the given significant digits.
    [[nodiscard]] std::string to_string(int digits = 17) const;
    static ExtendedReal parse(const std::string& text);

    friend ExtendedReal operator+(ExtendedReal a, ExtendedReal b);
    friend ExtendedReal operator-(ExtendedReal a);
    friend ExtendedReal operator-(ExtendedReal a, ExtendedReal b) { return a + (-b); }
    // Scaling by a finite factor; 0 * inf is taken as 0.
    friend ExtendedReal operator*(double s, ExtendedReal a);

    ExtendedReal& operator+=(ExtendedReal other) { return *this = *this + other; }

    friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
        if (a.indeterminate_ || b.indeterminate_) return a.indeterminate_ && b.indeterminate_;
        return a.value_ == b.value_;
    }

private:
    double value_{0.0};
    bool indeterminate_{false};
};

}  // namespace urnldp
