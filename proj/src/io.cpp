#include "urnldp/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace urnldp::io {

using nlohmann::json;

namespace {

json number_to_json(double x) {
    if (std::isfinite(x)) return x;
    return ExtendedReal(x).to_string();
}

double number_from_json(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return ExtendedReal::parse(j.get<std::string>()).value();
    throw std::invalid_argument("expected a number");
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// spec documents

UrnSpec parse_spec(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SpecFormatError(std::string("spec is not valid JSON: ") + e.what());
    }
    try {
        if (!doc.is_object()) throw SpecFormatError("spec must be a JSON object");
        const int K = doc.at("K").get<int>();
        const double psi_init = doc.contains("psi_init") ? doc.at("psi_init").get<double>() : -1.0;
        const auto& pis = doc.at("pi");
        if (!pis.is_array()) throw SpecFormatError("\"pi\" must be an array of curves");
        std::vector<UrnCurve> curves;
        for (const auto& c : pis) {
            const auto kind = c.at("kind").get<std::string>();
            if (kind == "poly") {
                curves.push_back(UrnCurve::polynomial(c.at("coeffs").get<std::vector<double>>()));
            } else if (kind == "pwl") {
                std::vector<std::pair<double, double>> knots;
                for (const auto& k : c.at("knots")) {
                    if (!k.is_array() || k.size() != 2) throw SpecFormatError("pwl knots must be [alpha, value] pairs");
                    knots.emplace_back(k[0].get<double>(), k[1].get<double>());
                }
                curves.push_back(UrnCurve::piecewise_linear(std::move(knots)));
            } else {
                throw SpecFormatError("unknown curve kind \"" + kind + "\" (expected poly or pwl)");
            }
        }
        const int grid = doc.contains("validation_grid_size") ? doc.at("validation_grid_size").get<int>() : 1024;
        return UrnSpec(K, std::move(curves), psi_init, grid);
    } catch (const json::exception& e) {
        throw SpecFormatError(std::string("malformed spec: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw SpecFormatError(std::string("invalid spec: ") + e.what());
    }
}

UrnSpec load_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open spec file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_spec(ss.str());
}

std::string spec_to_json(const UrnSpec& spec) {
    json doc;
    doc["K"] = spec.capacity();
    doc["psi_init"] = spec.psi_init();
    doc["validation_grid_size"] = spec.validation_grid_size();
    json pis = json::array();
    for (const auto& c : spec.components()) {
        if (c.kind() == UrnCurve::Kind::polynomial) {
            pis.push_back({{"kind", "poly"}, {"coeffs", c.coeffs()}});
        } else {
            json knots = json::array();
            for (const auto& [a, v] : c.knots()) knots.push_back({a, v});
            pis.push_back({{"kind", "pwl"}, {"knots", knots}});
        }
    }
    doc["pi"] = pis;
    return doc.dump(2);
}

// ---------------------------------------------------------------------------
// CSV

std::string format_number(double x, int digits) { return ExtendedReal(x).to_string(digits); }

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header) : out_(out), columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

void CsvWriter::row(std::initializer_list<ExtendedReal> values) {
    row(std::span<const ExtendedReal>(values.begin(), values.size()));
}

void CsvWriter::row(std::span<const ExtendedReal> values) {
    if (values.size() != columns_) throw std::invalid_argument("csv row width does not match header");
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << values[i].to_string(kCsvDigits);
    out_ << '\n';
    if (!out_) throw IoError("csv write failed");
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw std::out_of_range("csv has no column " + name);
}

CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty csv");
    t.header = split(line, ',');
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != t.header.size()) throw IoError("csv row width does not match header");
        std::vector<ExtendedReal> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(ExtendedReal::parse(c));
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_distribution_csv(std::ostream& out, std::span<const double> probabilities, std::size_t N) {
    CsvWriter w(out, {"m", "psi", "probability"});
    for (std::size_t m = 0; m < probabilities.size(); ++m)
        w.row({static_cast<double>(m), static_cast<double>(m) / static_cast<double>(N), probabilities[m]});
}

void write_path_csv(std::ostream& out, const DiscretePath& path) {
    CsvWriter w(out, {"j", "tau", "phi", "velocity", "psi"});
    const std::size_t T = path.grid_size();
    for (std::size_t j = 0; j <= T; ++j) {
        const double v = path.velocity(j < T ? j : T - 1);
        w.row({static_cast<double>(j), path.tau(j), path.phi(j), v, path.psi(j)});
    }
}

DiscretePath read_path_csv(std::istream& in, int K) {
    const auto t = read_csv(in);
    const auto col = t.column("velocity");
    if (t.rows.size() < 2) throw IoError("path csv needs at least two rows");
    std::vector<double> v;
    for (std::size_t j = 0; j + 1 < t.rows.size(); ++j) v.push_back(t.rows[j][col].value());
    return DiscretePath::from_velocities(K, std::move(v));
}

void write_mogulskii_csv(std::ostream& out, std::span<const MogulskiiRow> rows) {
    CsvWriter w(out, {"alpha", "xi", "beta_star", "L0_unshifted", "L0_shifted"});
    for (const auto& r : rows) w.row({r.alpha, r.xi, r.beta_star, r.l0_unshifted, r.l0_shifted});
}

void write_profile_csv(std::ostream& out, std::span<const CellRate> cells) {
    CsvWriter w(out, {"j", "tau", "velocity", "psi", "local_rate", "cramer_rate"});
    for (const auto& c : cells)
        w.row({static_cast<double>(c.j), c.tau, c.velocity, c.psi, c.local_rate, c.cramer_rate});
}

void write_cramer_csv(std::ostream& out, const CramerComparison& cmp) {
    CsvWriter w(out, {"alpha", "beta", "local_rate", "cramer_rate", "difference"});
    for (const auto& p : cmp.points) w.row({p.alpha, p.beta, p.local, p.cramer, p.local - ExtendedReal(p.cramer)});
}

// ---------------------------------------------------------------------------
// RateResult JSON

std::string rate_result_to_json(const RateResult& r) {
    json doc;
    doc["event"] = {r.event.lo, r.event.hi};
    doc["solved_event"] = {r.solved_event.lo, r.solved_event.hi};
    doc["entropy_density"] = number_to_json(r.entropy_density);
    doc["iterations"] = r.iterations;
    doc["converged"] = r.converged;
    doc["restarts_agreement"] = number_to_json(r.restarts_agreement);
    json objectives = json::array();
    for (double o : r.restart_objectives) objectives.push_back(number_to_json(o));
    doc["restart_objectives"] = objectives;
    doc["oracle_gap"] = r.oracle_gap ? number_to_json(*r.oracle_gap) : json(nullptr);
    doc["K"] = r.optimal_path.capacity();
    doc["T"] = r.optimal_path.grid_size();
    doc["optimal_path"] = r.optimal_path.velocities();
    return doc.dump(2);
}

RateResult rate_result_from_json(const std::string& text) {
    try {
        const auto doc = json::parse(text);
        RateResult r;
        r.event = EndpointEvent(doc.at("event").at(0).get<double>(), doc.at("event").at(1).get<double>());
        r.solved_event =
            EndpointEvent(doc.at("solved_event").at(0).get<double>(), doc.at("solved_event").at(1).get<double>());
        r.entropy_density = number_from_json(doc.at("entropy_density"));
        r.iterations = doc.at("iterations").get<int>();
        r.converged = doc.at("converged").get<bool>();
        r.restarts_agreement = number_from_json(doc.at("restarts_agreement"));
        for (const auto& o : doc.at("restart_objectives")) r.restart_objectives.push_back(number_from_json(o));
        if (!doc.at("oracle_gap").is_null()) r.oracle_gap = number_from_json(doc.at("oracle_gap"));
        r.optimal_path = DiscretePath::from_velocities(doc.at("K").get<int>(),
                                                       doc.at("optimal_path").get<std::vector<double>>());
        return r;
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed rate result: ") + e.what());
    }
}

}  // namespace urnldp::io
