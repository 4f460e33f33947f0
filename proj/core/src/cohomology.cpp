#include "hopf/cohomology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "hopf/errors.hpp"
#include "hopf/spectral.hpp"

namespace hopf {

namespace {

constexpr std::int64_t kSearchGuard = 50'000'000;

// Weak compositions of a fixed degree, starting from (d, 0, .., 0).
bool next_composition(std::vector<int>& e) {
    const int n = int(e.size());
    int i = n - 2;
    while (i >= 0 && e[std::size_t(i)] == 0) --i;
    if (i < 0) return false;
    const int rest = e[std::size_t(n - 1)];
    --e[std::size_t(i)];
    e[std::size_t(n - 1)] = 0;
    e[std::size_t(i + 1)] = rest + 1;
    return true;
}

// Odometer over slot assignments in [0, n)^slots; empty vector = one tuple.
bool next_tuple(std::vector<int>& t, int n) {
    for (std::size_t i = t.size(); i-- > 0;) {
        if (++t[i] < n) return true;
        t[i] = 0;
    }
    return false;
}

void validate_spectrum(const std::vector<Complex>& alpha) {
    if (alpha.empty())
        throw Error(ErrorCode::invalid_argument, "empty spectrum");
    for (const Complex& a : alpha)
        if (a == Complex(0.0, 0.0))
            throw Error(ErrorCode::invalid_argument, "zero eigenvalue in spectrum");
    require_contraction(alpha);
}

double max_modulus(const std::vector<Complex>& alpha) {
    double m = 0.0;
    for (const Complex& a : alpha) m = std::max(m, std::abs(a));
    return m;
}

}  // namespace

TensorBundleSpec TensorBundleSpec::dual_serre_twist() const {
    TensorBundleSpec dual;
    dual.p = q;
    dual.q = p;
    dual.k_can = 1 - k_can;
    if (line_character) dual.line_character = Complex(1.0, 0.0) / *line_character;
    return dual;
}

std::vector<Complex> diagonal_spectrum(const Eigen::MatrixXcd& a) {
    if (a.rows() != a.cols())
        throw Error(ErrorCode::dimension_mismatch, "matrix must be square");
    for (int i = 0; i < a.rows(); ++i) {
        const double scale = a.row(i).cwiseAbs().maxCoeff();
        for (int j = 0; j < a.cols(); ++j)
            if (i != j && std::abs(a(i, j)) > 1e-12 * scale)
                throw Error(ErrorCode::not_diagonal,
                            "linear part is not diagonal: section counting needs "
                            "eigen-coordinates");
    }
    std::vector<Complex> alpha;
    alpha.reserve(std::size_t(a.rows()));
    for (int i = 0; i < a.rows(); ++i) alpha.push_back(a(i, i));
    return alpha;
}

SectionCount invariant_section_dim(const std::vector<Complex>& alpha,
                                   const TensorBundleSpec& spec, double tol) {
    if (spec.p < 0 || spec.q < 0)
        throw Error(ErrorCode::invalid_argument, "tensor ranks must be non-negative");
    if (spec.line_character && *spec.line_character == Complex(0.0, 0.0))
        throw Error(ErrorCode::invalid_argument, "line character must be nonzero");
    validate_spectrum(alpha);

    const int n = int(alpha.size());
    const double shrink = max_modulus(alpha);
    std::int64_t visits = 0;
    SectionCount out;

    std::vector<int> contra(std::size_t(spec.p), 0);
    do {
        std::vector<int> cov(std::size_t(spec.q), 0);
        do {
            // Denominator side: contravariant slots, negative canonical
            // power, character. Numerator side: covariant slots, positive
            // canonical power, then the monomial.
            Complex den(1.0, 0.0);
            for (int slot : contra) den *= alpha[std::size_t(slot)];
            for (int r = 0; r < -spec.k_can; ++r)
                for (int i = 0; i < n; ++i) den *= alpha[std::size_t(i)];
            if (spec.line_character) den *= *spec.line_character;

            Complex num0(1.0, 0.0);
            for (int slot : cov) num0 *= alpha[std::size_t(slot)];
            for (int r = 0; r < spec.k_can; ++r)
                for (int i = 0; i < n; ++i) num0 *= alpha[std::size_t(i)];

            const double floor = (1.0 - tol) * std::abs(den);
            double reach = std::abs(num0);
            for (int d = 0; reach >= floor; ++d, reach *= shrink) {
                std::vector<int> exps(std::size_t(n), 0);
                exps[0] = d;
                do {
                    if (++visits > kSearchGuard)
                        throw Error(ErrorCode::capacity_exceeded,
                                    "invariant-section enumeration exceeds the search guard");
                    Complex num = num0;
                    for (int i = 0; i < n; ++i)
                        for (int e = 0; e < exps[std::size_t(i)]; ++e)
                            num *= alpha[std::size_t(i)];
                    if (std::abs(num - den) <= tol * std::abs(den)) {
                        ++out.dim;
                        out.witnesses.push_back(
                            {contra, cov, MonomialIndex(exps), num / den});
                    }
                } while (next_composition(exps));
            }
        } while (next_tuple(cov, n));
    } while (next_tuple(contra, n));

    return out;
}

namespace {

CohomologyReport assemble_table(const std::vector<Complex>& alpha, SectionCount primal,
                                const SectionCount& serre_partner, double tol) {
    const int n = int(alpha.size());
    if (n < 3)
        throw Error(ErrorCode::dimension_too_small,
                    "cohomology table needs dimension at least 3");
    CohomologyReport report;
    report.n = n;
    report.dims.assign(std::size_t(n + 1), 0);
    report.dims[0] = primal.dim;
    report.dims[1] = primal.dim;
    report.dims[std::size_t(n - 1)] = serre_partner.dim;
    report.dims[std::size_t(n)] = serre_partner.dim;
    report.witnesses = std::move(primal.witnesses);
    report.tolerance = tol;
    return report;
}

}  // namespace

CohomologyReport mall_dims(const std::vector<Complex>& alpha, const TensorBundleSpec& spec,
                           double tol) {
    if (alpha.size() < 3)
        throw Error(ErrorCode::dimension_too_small,
                    "cohomology table needs dimension at least 3");
    SectionCount primal = invariant_section_dim(alpha, spec, tol);
    const SectionCount partner = invariant_section_dim(alpha, spec.dual_serre_twist(), tol);
    return assemble_table(alpha, std::move(primal), partner, tol);
}

CohomologyReport line_bundle_cohomology(const std::vector<Complex>& alpha, Complex lambda,
                                        double tol) {
    if (alpha.size() < 3)
        throw Error(ErrorCode::dimension_too_small,
                    "cohomology table needs dimension at least 3");
    validate_spectrum(alpha);
    if (std::abs(lambda) <= tol)
        throw Error(ErrorCode::invalid_argument,
                    "character modulus must exceed the tolerance for a finite count");

    const int n = int(alpha.size());
    const double shrink = max_modulus(alpha);
    std::int64_t visits = 0;
    SectionCount primal;

    const double floor = std::abs(lambda) - tol;
    double reach = 1.0;
    for (int d = 0; reach >= floor; ++d, reach *= shrink) {
        std::vector<int> exps(std::size_t(n), 0);
        exps[0] = d;
        do {
            if (++visits > kSearchGuard)
                throw Error(ErrorCode::capacity_exceeded,
                            "invariant-section enumeration exceeds the search guard");
            Complex value(1.0, 0.0);
            for (int i = 0; i < n; ++i)
                for (int e = 0; e < exps[std::size_t(i)]; ++e)
                    value *= alpha[std::size_t(i)];
            if (std::abs(value - lambda) <= tol) {
                ++primal.dim;
                primal.witnesses.push_back({{}, {}, MonomialIndex(exps), value / lambda});
            }
        } while (next_composition(exps));
    }

    TensorBundleSpec twist;
    twist.line_character = lambda;
    const SectionCount partner = invariant_section_dim(alpha, twist.dual_serre_twist(), tol);
    return assemble_table(alpha, std::move(primal), partner, tol);
}

bool resonance_cohomology_bridge(const std::vector<Complex>& alpha, double tol) {
    const bool scan_side = !matrix_resonances(alpha, tol).relations.empty();
    TensorBundleSpec endo;
    endo.p = 1;
    endo.q = 2;
    const bool section_side = invariant_section_dim(alpha, endo, tol).dim > 0;
    return scan_side == section_side;
}

}  // namespace hopf
