#include "urnldp/extended_real.hpp"

#include <cstdio>
#include <stdexcept>

namespace urnldp {

double ExtendedReal::value() const {
    if (indeterminate_) throw std::domain_error("indeterminate extended real (inf - inf)");
    return value_;
}

std::string ExtendedReal::to_string(int digits) const {
    if (indeterminate_) return "indeterminate";
    if (is_pos_inf()) return "inf";
    if (is_neg_inf()) return "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, value_);
    return buf;
}

ExtendedReal ExtendedReal::parse(const std::string& text) {
    if (text == "indeterminate") return indeterminate();
    if (text == "inf" || text == "+inf") return pos_inf();
    if (text == "-inf") return neg_inf();
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("not an extended real: " + text);
    return {v};
}

ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
    if (a.indeterminate_ || b.indeterminate_) return ExtendedReal::indeterminate();
    return {a.value_ + b.value_};  // inf + -inf is NaN, which maps to indeterminate
}

ExtendedReal operator-(ExtendedReal a) {
    if (a.indeterminate_) return a;
    return {-a.value_};
}

ExtendedReal operator*(double s, ExtendedReal a) {
    if (a.indeterminate_) return a;
    if (s == 0.0) return {0.0};
    return {s * a.value_};
}

}  // namespace urnldp
