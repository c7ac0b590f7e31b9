#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "urnldp/urn_model.hpp"

namespace urnldp::cli {

enum class Command {
    validate,
    simulate,
    exact_dist,
    mogulskii_table,
    lagrangian_table,
    rate_endpoint,
    zero_cost,
    compare_cramer,
    verify,
};

enum class Format { csv, json };

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kValidationError = 3,
    kNonConvergence = 4,
    kIoError = 5,
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    Command command{Command::verify};
    std::optional<std::string> spec_path;
    std::optional<std::size_t> N;
    std::optional<std::size_t> T;
    std::uint64_t seed{0};
    std::optional<int> grid;
    double floor{0.0};
    std::optional<EndpointEvent> event;
    std::optional<std::string> out_path;
    std::optional<Format> format;
    int threads{1};
    std::optional<int> K;  // mogulskii-table without a spec
    std::size_t runs{1};   // simulate: number of histories in the histogram
};

Command parse_command(const std::string& name);
std::string command_name(Command c);
Format parse_format(const std::string& name);
EndpointEvent parse_event(const std::string& text);  // "LO,HI"

// Runs one command. Output goes to config.out_path when set, else `out`;
// diagnostics go to `err`. Returns an ExitCode.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// run() with every exception mapped to its exit code and reported on `err`.
int run_guarded(const RunConfig& config, std::ostream& out, std::ostream& err);

// End-to-end reproduction checks for K = 1 and K = 2; one PASS/FAIL line per
// check. Returns the number of failed checks. Output is a pure function of seed.
int verify(std::uint64_t seed, std::ostream& out);

}  // namespace urnldp::cli
