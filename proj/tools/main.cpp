// Batch front-end: reads germ/bundle descriptions from JSON, dispatches to
// the library, and emits one JSON report per input document.
//
// Exit codes: 0 success; 2 domain refusal (resonant input or an obstructed
// connection solve — the report is still emitted); 3 ill-conditioned result;
// 4 input or usage errors (diagnostic on stderr).

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hopf/cohomology.hpp"
#include "hopf/connection.hpp"
#include "hopf/errors.hpp"
#include "hopf/germ.hpp"
#include "hopf/normal_form.hpp"
#include "hopf/parse.hpp"
#include "hopf/spectral.hpp"
#include "hopf/tensor.hpp"

using nlohmann::ordered_json;

namespace {

using hopf::Complex;

// Input-stage failure: diagnostic on stderr, exit 4, no report.
struct CliError {
    std::string message;
};

struct Options {
    std::string command;
    std::string spec_path;
    std::string out_path;
    std::optional<double> tol;
    std::optional<int> degree;
    std::optional<long long> seed;
    bool quiet = false;
    std::vector<std::string> alpha;
    std::string bundle;
};

// ------------------------------------------------------------ JSON helpers

ordered_json complex_json(const Complex& c) {
    return ordered_json::array({c.real(), c.imag()});
}

ordered_json germ_json(const hopf::MapGerm& g) {
    ordered_json arr = ordered_json::array();
    for (const auto& comp : g.components()) arr.push_back(comp.str());
    return arr;
}

ordered_json matrix_json(const hopf::SeriesMatrix& m) {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m.at(i, j).str());
        rows.push_back(std::move(row));
    }
    return rows;
}

ordered_json residual_json(double value, double tolerance) {
    return ordered_json{{"value", value}, {"tolerance", tolerance}};
}

ordered_json relations_json(const hopf::ResonanceScan& scan) {
    ordered_json rels = ordered_json::array();
    for (const auto& rel : scan.relations) {
        ordered_json r;
        r["kind"] = rel.kind == hopf::ResonanceRelation::Kind::matrix ? "matrix" : "bundle";
        r["target"] = rel.target + 1;  // reports index components like z1..zn
        if (rel.source >= 0) r["source"] = rel.source + 1;
        r["exponents"] = rel.exponents.exponents();
        r["residual"] = rel.residual;
        rels.push_back(std::move(r));
    }
    return rels;
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ------------------------------------------------------------ input loading

Complex parse_scalar(const std::string& text, const std::string& field) {
    try {
        const hopf::TruncatedSeries s = hopf::parse_series(text, 1, 2);
        Complex value(0.0, 0.0);
        for (const auto& [key, coeff] : s.raw_terms()) {
            if (hopf::detail::key_degree(key) != 0)
                throw CliError{"field \"" + field + "\": expected a number, got an expression"};
            value = coeff;
        }
        return value;
    } catch (const hopf::Error& e) {
        throw CliError{"field \"" + field + "\": " + e.what()};
    }
}

double parse_real(const ordered_json& node, const std::string& field) {
    if (node.is_number()) return node.get<double>();
    if (node.is_string()) {
        const Complex c = parse_scalar(node.get<std::string>(), field);
        if (c.imag() != 0.0) throw CliError{"field \"" + field + "\": must be real"};
        return c.real();
    }
    throw CliError{"field \"" + field + "\": expected a number or a rational string"};
}

struct LoadedInput {
    int dimension = 0;
    int cap = 0;
    double tol = 1e-9;
    std::vector<std::string> map_exprs;
    std::optional<hopf::MapGerm> germ;
    ordered_json bundle;  // normalized echo; null when absent
    std::vector<Complex> alpha;
    ordered_json echo;
};

ordered_json read_document(const std::string& path) {
    std::string text;
    if (path == "-") {
        std::stringstream buf;
        buf << std::cin.rdbuf();
        text = buf.str();
    } else {
        std::ifstream in(path);
        if (!in) throw CliError{"cannot open input file: " + path};
        std::stringstream buf;
        buf << in.rdbuf();
        text = buf.str();
    }
    try {
        return ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw CliError{std::string("malformed JSON input: ") + e.what()};
    }
}

LoadedInput load_germ_spec(const ordered_json& doc, const Options& opt) {
    if (!doc.is_object()) throw CliError{"input document must be a JSON object"};
    LoadedInput in;

    if (!doc.contains("dimension") || !doc["dimension"].is_number_integer())
        throw CliError{"field \"dimension\": required integer"};
    in.dimension = doc["dimension"].get<int>();
    if (in.dimension < 1) throw CliError{"field \"dimension\": must be at least 1"};

    if (!doc.contains("truncation_degree") || !doc["truncation_degree"].is_number_integer())
        throw CliError{"field \"truncation_degree\": required integer"};
    in.cap = doc["truncation_degree"].get<int>();
    if (opt.degree) in.cap = *opt.degree;
    if (in.cap < 2) throw CliError{"field \"truncation_degree\": must be at least 2"};

    if (!doc.contains("map") || !doc["map"].is_array() ||
        doc["map"].size() != std::size_t(in.dimension))
        throw CliError{"field \"map\": required array of one expression per dimension"};
    for (const auto& entry : doc["map"]) {
        if (!entry.is_string()) throw CliError{"field \"map\": entries must be strings"};
        in.map_exprs.push_back(entry.get<std::string>());
    }

    in.tol = doc.contains("tolerance") ? parse_real(doc["tolerance"], "tolerance") : 1e-9;
    if (opt.tol) in.tol = *opt.tol;
    if (!(in.tol > 0.0)) throw CliError{"field \"tolerance\": must be positive"};

    try {
        in.germ = hopf::parse_germ(in.map_exprs, in.dimension, in.cap);
    } catch (const hopf::Error& e) {
        throw CliError{std::string("field \"map\": ") + e.what()};
    }

    in.bundle = doc.contains("bundle") ? ordered_json(doc["bundle"]) : ordered_json(nullptr);

    in.echo["dimension"] = in.dimension;
    in.echo["truncation_degree"] = in.cap;
    in.echo["map"] = in.map_exprs;
    in.echo["tolerance"] = in.tol;
    if (!in.bundle.is_null()) in.echo["bundle"] = in.bundle;
    if (opt.seed) in.echo["seed"] = *opt.seed;
    return in;
}

void require_contraction_input(const std::vector<Complex>& eigenvalues) {
    if (!hopf::is_contraction(eigenvalues))
        throw CliError{"not a contraction: every eigenvalue modulus must stay below 1"};
}

// ------------------------------------------------------------- report shell

ordered_json conventions_block() {
    return ordered_json{
        {"homological_operator", "degree-d component of A*h - h(A*z); eliminated terms solve "
                                 "it against the opposite sign of the defect"},
        {"frames", "retained resonant monomials are indexed in the unitary upper-triangular "
                   "frame of the linear part"},
        {"weight_convention",
         "a tensor with covariant slots J, contravariant slots I, canonical power k and "
         "character L is invariant when prod(alpha_J)*prod(alpha)^max(k,0)*alpha^m matches "
         "prod(alpha_I)*prod(alpha)^max(-k,0)*L within the relative tolerance"},
        {"indexing", "components, relation targets, and relation sources are 1-based, "
                     "matching the variable names z1..zn; exponent vectors are positional"},
        {"drop_policy", "after each arithmetic step, coefficients smaller than 1e-14 of the "
                        "largest modulus in their own total degree are removed"}};
}

struct ReportBuilder {
    ordered_json report;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    ReportBuilder(const std::string& command, const ordered_json& echo) {
        report["command"] = command;
        report["input"] = echo;
        report["input_hash"] = fnv1a_hex(echo.dump());
        report["conventions"] = conventions_block();
        report["outcome"] = "ok";
    }

    ordered_json finish() {
        const auto elapsed = std::chrono::steady_clock::now() - start;
        report["wall_time_ms"] =
            std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(elapsed)
                .count();
        return std::move(report);
    }
};

struct Outcome {
    ordered_json report;
    int exit_code = 0;
};

// -------------------------------------------------------------- subcommands

ordered_json spectrum_json(const std::vector<Complex>& eigenvalues) {
    ordered_json arr = ordered_json::array();
    for (const Complex& a : eigenvalues) arr.push_back(complex_json(a));
    return arr;
}

Outcome run_resonance(const LoadedInput& in) {
    ReportBuilder rb("resonance", in.echo);
    const hopf::SpectralData s = hopf::eigen_decompose(in.germ->linear_part());
    require_contraction_input(s.eigenvalues);
    const hopf::ResonanceScan scan = hopf::matrix_resonances(s.eigenvalues, in.tol);

    ordered_json payload;
    payload["eigenvalues"] = spectrum_json(s.eigenvalues);
    payload["relations"] = relations_json(scan);
    payload["nearest_miss"] =
        std::isfinite(scan.nearest_miss) ? ordered_json(scan.nearest_miss) : ordered_json(nullptr);
    payload["search_bound"] = scan.bound;

    if (!in.bundle.is_null()) {
        Eigen::MatrixXcd fiber;
        if (in.bundle.is_string() && in.bundle.get<std::string>() == "tangent") {
            fiber = in.germ->linear_part();
        } else {
            throw CliError{"field \"bundle\": resonance accepts only \"tangent\""};
        }
        payload["fiber_relations"] = relations_json(hopf::bundle_resonances(s, fiber, in.tol));
    }
    rb.report["payload"] = std::move(payload);
    rb.report["residuals"] = ordered_json::object();
    rb.report["warnings"] = ordered_json::array();
    return {rb.finish(), 0};
}

Outcome run_linearize(const LoadedInput& in) {
    ReportBuilder rb("linearize", in.echo);
    const hopf::SpectralData s = hopf::eigen_decompose(in.germ->linear_part());
    require_contraction_input(s.eigenvalues);
    rb.report["payload"]["eigenvalues"] = spectrum_json(s.eigenvalues);

    try {
        const hopf::NormalFormReport rep = hopf::linearize(*in.germ, in.tol);
        const double conj = hopf::verify_conjugacy(rep.change, *in.germ, rep.normalized);
        rb.report["payload"]["change"] = germ_json(rep.change);
        rb.report["payload"]["normalized"] = germ_json(rep.normalized);
        rb.report["payload"]["small_divisor"] = rep.small_divisor;
        rb.report["payload"]["ill_conditioned"] = rep.ill_conditioned;
        rb.report["residuals"]["homological"] = residual_json(rep.max_residual, in.tol);
        rb.report["residuals"]["conjugacy"] = residual_json(conj, in.tol);
        rb.report["warnings"] = ordered_json::array();
        if (rep.ill_conditioned) {
            rb.report["outcome"] = "ill_conditioned";
            rb.report["warnings"].push_back(
                "smallest homological divisor below 1e-10; coefficients may be unreliable");
            return {rb.finish(), 3};
        }
        return {rb.finish(), 0};
    } catch (const hopf::Error& e) {
        if (e.code() != hopf::ErrorCode::resonant_input) throw;
        rb.report["outcome"] = "resonant_input";
        rb.report["payload"]["message"] = e.what();
        rb.report["payload"]["relations"] =
            relations_json(hopf::matrix_resonances(s.eigenvalues, in.tol));
        rb.report["residuals"] = ordered_json::object();
        rb.report["warnings"] = ordered_json::array();
        return {rb.finish(), 2};
    }
}

Outcome run_normal_form(const LoadedInput& in) {
    ReportBuilder rb("normal-form", in.echo);
    const hopf::SpectralData s = hopf::eigen_decompose(in.germ->linear_part());
    require_contraction_input(s.eigenvalues);

    const hopf::NormalFormReport rep = hopf::normal_form(*in.germ, in.tol);
    const double conj = hopf::verify_conjugacy(rep.change, *in.germ, rep.normalized);

    ordered_json kept = ordered_json::array();
    for (const auto& [component, monomial] : rep.kept_monomials)
        kept.push_back(ordered_json{{"component", component + 1},
                                    {"exponents", monomial.exponents()}});

    rb.report["payload"]["eigenvalues"] = spectrum_json(s.eigenvalues);
    rb.report["payload"]["change"] = germ_json(rep.change);
    rb.report["payload"]["normalized"] = germ_json(rep.normalized);
    rb.report["payload"]["kept_monomials"] = std::move(kept);
    rb.report["payload"]["small_divisor"] = rep.small_divisor;
    rb.report["payload"]["ill_conditioned"] = rep.ill_conditioned;
    rb.report["residuals"]["homological"] = residual_json(rep.max_residual, in.tol);
    rb.report["residuals"]["conjugacy"] = residual_json(conj, in.tol);
    rb.report["warnings"] = ordered_json::array();
    if (rep.ill_conditioned) {
        rb.report["outcome"] = "ill_conditioned";
        rb.report["warnings"].push_back(
            "smallest homological divisor below 1e-10; coefficients may be unreliable");
        return {rb.finish(), 3};
    }
    return {rb.finish(), 0};
}

hopf::EquivariantBundle build_bundle(const LoadedInput& in) {
    if (in.bundle.is_null() ||
        (in.bundle.is_string() && in.bundle.get<std::string>() == "tangent"))
        return hopf::EquivariantBundle::tangent(*in.germ);
    if (in.bundle.is_object() && in.bundle.contains("rank") && in.bundle.contains("cocycle")) {
        if (!in.bundle["rank"].is_number_integer())
            throw CliError{"field \"bundle.rank\": required integer"};
        const int rank = in.bundle["rank"].get<int>();
        if (rank < 1) throw CliError{"field \"bundle.rank\": must be at least 1"};
        const auto& rows = in.bundle["cocycle"];
        if (!rows.is_array() || rows.size() != std::size_t(rank))
            throw CliError{"field \"bundle.cocycle\": required rank x rank expression matrix"};
        hopf::SeriesMatrix phi(rank, rank, in.dimension, in.cap);
        for (int i = 0; i < rank; ++i) {
            const auto& row = rows[std::size_t(i)];
            if (!row.is_array() || row.size() != std::size_t(rank))
                throw CliError{"field \"bundle.cocycle\": row " + std::to_string(i) +
                               " must have " + std::to_string(rank) + " entries"};
            for (int j = 0; j < rank; ++j) {
                if (!row[std::size_t(j)].is_string())
                    throw CliError{"field \"bundle.cocycle\": entries must be expressions"};
                try {
                    phi.at(i, j) = hopf::parse_series(row[std::size_t(j)].get<std::string>(),
                                                      in.dimension, in.cap);
                } catch (const hopf::Error& e) {
                    throw CliError{std::string("field \"bundle.cocycle\": ") + e.what()};
                }
            }
        }
        try {
            return hopf::EquivariantBundle(*in.germ, std::move(phi));
        } catch (const hopf::Error& e) {
            throw CliError{std::string("field \"bundle\": ") + e.what()};
        }
    }
    throw CliError{"field \"bundle\": expected \"tangent\" or {rank, cocycle}"};
}

Outcome run_connection(const LoadedInput& in) {
    ReportBuilder rb("connection", in.echo);
    const hopf::SpectralData s = hopf::eigen_decompose(in.germ->linear_part());
    require_contraction_input(s.eigenvalues);
    const hopf::EquivariantBundle bundle = build_bundle(in);
    const bool tangent =
        in.bundle.is_null() || (in.bundle.is_string() && in.bundle.get<std::string>() == "tangent");

    try {
        const hopf::ConnectionReport conn = hopf::solve_equivariant_connection(bundle, in.tol);
        const int cap = in.cap;
        const double curv = hopf::curvature(conn.theta).max_abs_coeff_through(cap - 2);

        ordered_json legs = ordered_json::array();
        for (int l = 0; l < in.dimension; ++l) legs.push_back(matrix_json(conn.theta.leg(l)));
        rb.report["payload"]["theta"] = std::move(legs);
        rb.report["payload"]["min_weight_gap"] = conn.min_weight_gap;
        rb.report["payload"]["ill_conditioned"] = conn.ill_conditioned;
        rb.report["residuals"]["fixed_point"] = residual_json(conn.fixed_point_residual, in.tol);
        rb.report["residuals"]["curvature"] = residual_json(curv, in.tol);
        if (bundle.rank() == in.dimension)
            rb.report["residuals"]["torsion"] =
                residual_json(hopf::torsion(conn.theta).max_abs_coeff(), in.tol);

        if (tangent) {
            const hopf::CoframeReport co = hopf::parallel_coframe(conn.theta, in.tol);
            const hopf::DevelopingReport dev = hopf::developing_coordinates(co.omega, in.tol);
            const hopf::MapGerm target = hopf::MapGerm::linear(in.germ->linear_part(), cap);
            const double conj = hopf::verify_conjugacy(dev.coordinates, *in.germ, target);
            rb.report["payload"]["change"] = germ_json(dev.coordinates);
            rb.report["payload"]["normalized"] = germ_json(target);
            rb.report["residuals"]["conjugacy"] = residual_json(conj, in.tol);
            rb.report["residuals"]["coframe_spread"] = residual_json(co.spread, in.tol);
            rb.report["residuals"]["coframe_closedness"] =
                residual_json(co.closedness_residual, in.tol);
            rb.report["residuals"]["antiderivative_spread"] = residual_json(dev.spread, in.tol);
        }

        rb.report["warnings"] = ordered_json::array();
        for (const auto& w : conn.warnings)
            rb.report["warnings"].push_back(
                ordered_json{{"degree", w.degree}, {"note", w.note}});
        if (conn.ill_conditioned) {
            rb.report["outcome"] = "ill_conditioned";
            rb.report["warnings"].push_back(
                "smallest weight gap below 1e-10; coefficients may be unreliable");
            return {rb.finish(), 3};
        }
        return {rb.finish(), 0};
    } catch (const hopf::ResonanceObstructionError& e) {
        rb.report["outcome"] = "resonance_obstruction";
        rb.report["payload"]["message"] = e.what();
        rb.report["payload"]["degree"] = e.degree();
        rb.report["residuals"] = ordered_json::object();
        rb.report["warnings"] = ordered_json::array();
        return {rb.finish(), 2};
    }
}

hopf::TensorBundleSpec named_tensor_spec(const std::string& name) {
    hopf::TensorBundleSpec spec;
    if (name == "trivial" || name == "structure") return spec;
    if (name == "tangent") {
        spec.p = 1;
        return spec;
    }
    if (name == "cotangent") {
        spec.q = 1;
        return spec;
    }
    if (name == "canonical") {
        spec.k_can = 1;
        return spec;
    }
    throw CliError{"bundle \"" + name +
                   "\": expected trivial|tangent|cotangent|canonical, tensor:p,q,k or line:<c>"};
}

Outcome run_cohomology(const Options& opt, const std::optional<LoadedInput>& loaded) {
    // Spectrum: either --alpha values or the diagonal of the germ's linear part.
    std::vector<Complex> alpha;
    ordered_json echo;
    double tol = opt.tol.value_or(1e-9);
    if (!opt.alpha.empty()) {
        for (std::size_t i = 0; i < opt.alpha.size(); ++i)
            alpha.push_back(parse_scalar(opt.alpha[i], "alpha[" + std::to_string(i) + "]"));
        echo["alpha"] = spectrum_json(alpha);
        echo["tolerance"] = tol;
        if (opt.seed) echo["seed"] = *opt.seed;
    } else if (loaded) {
        try {
            alpha = hopf::diagonal_spectrum(loaded->germ->linear_part());
        } catch (const hopf::Error& e) {
            throw CliError{std::string("field \"map\": ") + e.what()};
        }
        tol = opt.tol.value_or(loaded->tol);
        echo = loaded->echo;
    } else {
        throw CliError{"cohomology needs an input file or --alpha"};
    }
    require_contraction_input(alpha);

    // Bundle: --bundle wins, then the input file's bundle field, then trivial.
    hopf::TensorBundleSpec spec;
    std::optional<Complex> line;
    ordered_json bundle_echo;
    const auto apply_named = [&](const std::string& name) {
        if (name.rfind("tensor:", 0) == 0) {
            int p = 0, q = 0, k = 0;
            if (std::sscanf(name.c_str() + 7, "%d,%d,%d", &p, &q, &k) != 3)
                throw CliError{"bundle \"" + name + "\": expected tensor:p,q,k"};
            spec.p = p;
            spec.q = q;
            spec.k_can = k;
            bundle_echo = ordered_json{{"tensor", {{"p", p}, {"q", q}, {"k_can", k}}}};
        } else if (name.rfind("line:", 0) == 0) {
            line = parse_scalar(name.substr(5), "bundle");
            bundle_echo = ordered_json{{"line", name.substr(5)}};
        } else {
            spec = named_tensor_spec(name);
            bundle_echo = name;
        }
    };
    if (!opt.bundle.empty()) {
        apply_named(opt.bundle);
    } else if (loaded && !loaded->bundle.is_null()) {
        const ordered_json& b = loaded->bundle;
        if (b.is_string()) {
            apply_named(b.get<std::string>());
        } else if (b.is_object() && b.contains("tensor")) {
            const auto& t = b["tensor"];
            if (!t.is_object() || !t.contains("p") || !t.contains("q"))
                throw CliError{"field \"bundle.tensor\": required p and q"};
            spec.p = t["p"].get<int>();
            spec.q = t["q"].get<int>();
            spec.k_can = t.contains("k_can") ? t["k_can"].get<int>() : 0;
            bundle_echo = b;
        } else if (b.is_object() && b.contains("line")) {
            if (!b["line"].is_string())
                throw CliError{"field \"bundle.line\": required character string"};
            line = parse_scalar(b["line"].get<std::string>(), "bundle.line");
            bundle_echo = b;
        } else {
            throw CliError{"field \"bundle\": expected a name, {tensor:{p,q,k_can}} or {line}"};
        }
    } else {
        bundle_echo = "trivial";
    }
    echo["bundle"] = bundle_echo;

    ReportBuilder rb("cohomology", echo);
    hopf::CohomologyReport rep;
    try {
        rep = line ? hopf::line_bundle_cohomology(alpha, *line, tol)
                   : hopf::mall_dims(alpha, spec, tol);
    } catch (const hopf::Error& e) {
        if (e.code() == hopf::ErrorCode::dimension_too_small ||
            e.code() == hopf::ErrorCode::invalid_argument)
            throw CliError{e.what()};
        throw;
    }

    ordered_json witnesses = ordered_json::array();
    for (const auto& w : rep.witnesses) {
        std::vector<int> contra = w.contravariant, cova = w.covariant;
        for (int& i : contra) ++i;  // 1-based like z1..zn
        for (int& i : cova) ++i;
        witnesses.push_back(ordered_json{{"contravariant", contra},
                                         {"covariant", cova},
                                         {"exponents", w.monomial.exponents()},
                                         {"weight", complex_json(w.weight)}});
    }

    rb.report["payload"]["alpha"] = spectrum_json(alpha);
    rb.report["payload"]["dims"] = rep.dims;
    rb.report["payload"]["witnesses"] = std::move(witnesses);
    rb.report["payload"]["tolerance"] = rep.tolerance;
    rb.report["residuals"] = ordered_json::object();
    rb.report["warnings"] = ordered_json::array();
    return {rb.finish(), 0};
}

// ------------------------------------------------------------------ driver

void emit(const ordered_json& report, const Options& opt) {
    std::string text = report.dump(2);
    text += '\n';
    if (!opt.out_path.empty()) {
        std::ofstream out(opt.out_path);
        if (!out) throw CliError{"cannot write output file: " + opt.out_path};
        out << text;
    }
    if (!opt.quiet) std::cout << text;
}

Outcome dispatch(const Options& opt) {
    if (opt.command == "cohomology") {
        std::optional<LoadedInput> loaded;
        if (!opt.spec_path.empty())
            loaded = load_germ_spec(read_document(opt.spec_path), opt);
        return run_cohomology(opt, loaded);
    }
    if (opt.spec_path.empty()) throw CliError{opt.command + " needs an input file"};
    const LoadedInput in = load_germ_spec(read_document(opt.spec_path), opt);
    if (opt.command == "resonance") return run_resonance(in);
    if (opt.command == "linearize") return run_linearize(in);
    if (opt.command == "normal-form") return run_normal_form(in);
    if (opt.command == "connection") return run_connection(in);
    throw CliError{"unknown command: " + opt.command};
}

}  // namespace

int main(int argc, char** argv) {
    Options opt;
    CLI::App app{"Truncated-series toolkit: linearization, equivariant flat connections, "
                 "and Hopf-manifold cohomology tables"};
    app.require_subcommand(1);

    double tol_value = 0.0;
    int degree_value = 0;
    long long seed_value = 0;

    const auto add_common = [&](CLI::App* sub, bool wants_file) {
        if (wants_file)
            sub->add_option("spec", opt.spec_path, "JSON input path ('-' for stdin)");
        sub->add_option("--out", opt.out_path, "write the report to this path as well");
        sub->add_option("--tol", tol_value, "override the tolerance")
            ->each([&](const std::string&) { opt.tol = tol_value; });
        sub->add_option("--degree", degree_value, "override the truncation degree")
            ->each([&](const std::string&) { opt.degree = degree_value; });
        sub->add_option("--seed", seed_value, "echoed into the report and its hash")
            ->each([&](const std::string&) { opt.seed = seed_value; });
        sub->add_flag("--quiet", opt.quiet, "suppress the stdout report");
    };

    add_common(app.add_subcommand("resonance", "scan the spectrum for multiplicative relations"),
               true);
    add_common(app.add_subcommand("linearize", "solve for a full linearizing conjugacy"), true);
    add_common(app.add_subcommand("normal-form",
                                  "eliminate all non-resonant terms, keep the resonant ones"),
               true);
    add_common(app.add_subcommand("connection",
                                  "solve the equivariance equation for a flat connection"),
               true);
    CLI::App* coh = app.add_subcommand("cohomology", "cohomology table of a tensor bundle");
    add_common(coh, true);
    coh->add_option("--alpha", opt.alpha, "comma-separated diagonal spectrum")
        ->delimiter(',');
    coh->add_option("--bundle", opt.bundle,
                    "trivial|tangent|cotangent|canonical, tensor:p,q,k or line:<c>");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 4;
    }
    opt.command = app.get_subcommands().front()->get_name();

    try {
        const Outcome outcome = dispatch(opt);
        emit(outcome.report, opt);
        return outcome.exit_code;
    } catch (const CliError& e) {
        std::cerr << "error: " << e.message << "\n";
        return 4;
    } catch (const hopf::Error& e) {
        std::cerr << "error: " << hopf::error_code_name(e.code()) << ": " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
