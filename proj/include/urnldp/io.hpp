#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "urnldp/extended_real.hpp"
#include "urnldp/kron_embedding.hpp"
#include "urnldp/mogulskii.hpp"
#include "urnldp/urn_model.hpp"
#include "urnldp/variational.hpp"

namespace urnldp::io {

// Malformed spec document (bad JSON or schema).
class SpecFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kCsvDigits = 12;
inline constexpr int kJsonDigits = 17;

// {"K": int, "psi_init": number, "pi": [{"kind": "poly", "coeffs": [...]} |
//                                       {"kind": "pwl", "knots": [[alpha, value], ...]}, ...]}
UrnSpec parse_spec(const std::string& text);
UrnSpec load_spec(const std::filesystem::path& path);
std::string spec_to_json(const UrnSpec& spec);

std::string format_number(double x, int digits);

// Rows of extended reals with a fixed header; numbers use kCsvDigits.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::vector<std::string> header);
    void row(std::initializer_list<ExtendedReal> values);
    void row(std::span<const ExtendedReal> values);

private:
    std::ostream& out_;
    std::size_t columns_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<ExtendedReal>> rows;
    // Column index by name; throws std::out_of_range when missing.
    [[nodiscard]] std::size_t column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);

// "m,psi,probability"
void write_distribution_csv(std::ostream& out, std::span<const double> probabilities, std::size_t N);
// "j,tau,phi,velocity,psi"; the j = T row repeats the last velocity
void write_path_csv(std::ostream& out, const DiscretePath& path);
DiscretePath read_path_csv(std::istream& in, int K);
// "alpha,xi,beta_star,L0_unshifted,L0_shifted"
void write_mogulskii_csv(std::ostream& out, std::span<const MogulskiiRow> rows);
// "j,tau,velocity,psi,local_rate,cramer_rate"
void write_profile_csv(std::ostream& out, std::span<const CellRate> cells);
// "alpha,beta,local_rate,cramer_rate,difference"
void write_cramer_csv(std::ostream& out, const CramerComparison& cmp);

// JSON with 17 significant digits; non-finite numbers become strings ("inf", "-inf", "indeterminate").
std::string rate_result_to_json(const RateResult& result);
RateResult rate_result_from_json(const std::string& text);

}  // namespace urnldp::io
