#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "hopf/errors.hpp"
#include "hopf/germ.hpp"
#include "hopf/normal_form.hpp"
#include "hopf/parse.hpp"
#include "helpers.hpp"

using hopf::Complex;
using hopf::MapGerm;
using hopf::MonomialIndex;
using hopf::NormalFormReport;

namespace {

using Kept = std::vector<std::pair<int, std::vector<int>>>;

Kept sorted_kept(const NormalFormReport& report) {
    Kept out;
    for (const auto& [comp, mono] : report.kept_monomials)
        out.emplace_back(comp, mono.exponents());
    std::sort(out.begin(), out.end());
    return out;
}

MapGerm sample_nonresonant(std::mt19937_64& rng, int n, int cap, double min_divisor) {
    for (;;) {
        const Eigen::MatrixXcd a = testutil::random_contraction(rng, n, int(rng() % 3));
        const MapGerm g = testutil::random_polynomial_germ(rng, a, cap, 2, 0.5);
        try {
            const NormalFormReport probe = hopf::linearize(g);
            if (probe.small_divisor >= min_divisor) return g;
        } catch (const hopf::Error&) {
        }
    }
}

}  // namespace

TEST_CASE("triangular shear linearizes with the exact rational coefficient") {
    const MapGerm g = testutil::germ_of({"z1/2 + z2^2", "z2/3"}, 2, 8);
    const NormalFormReport report = hopf::linearize(g);

    const Complex u12 = report.change.component(0).coefficient(MonomialIndex({0, 2}));
    CHECK(std::abs(u12 - Complex(18.0 / 7.0, 0.0)) <= 1e-12);
    CHECK(report.max_residual <= 1e-12);
    // Smallest degree-2 pivot over every direction: |1/3 - 1/4|.
    CHECK(report.small_divisor == doctest::Approx(1.0 / 12.0).epsilon(1e-12));
    CHECK(!report.ill_conditioned);
    CHECK(report.kept_monomials.empty());

    // The normalized output is the bare linear part.
    CHECK(testutil::germ_distance(report.normalized,
                                  MapGerm::linear(g.linear_part(), 8)) == 0.0);
}

TEST_CASE("resonant spectrum rejects linearization but keeps its monomial") {
    const MapGerm g = testutil::germ_of({"z1/2", "z2/4 + z1^2"}, 2, 8);
    CHECK_THROWS_AS(hopf::linearize(g), hopf::Error);
    try {
        hopf::linearize(g);
    } catch (const hopf::Error& e) {
        CHECK(e.code() == hopf::ErrorCode::resonant_input);
    }

    const NormalFormReport report = hopf::normal_form(g);
    const Kept expected{{1, {2, 0}}};
    CHECK(sorted_kept(report) == expected);
    // The obstructed coefficient passes through untouched.
    CHECK(report.normalized.component(1).coefficient(MonomialIndex({2, 0})) ==
          Complex(1.0, 0.0));
    CHECK(report.max_residual <= 1e-13);
    CHECK(testutil::germ_distance(report.change, MapGerm::identity(2, 8)) == 0.0);
}

TEST_CASE("fully resonant input is its own normal form") {
    const MapGerm g =
        testutil::germ_of({"z1/2", "z2/4 + z1^2", "z3/8 + z1*z2 + z1^3"}, 3, 6);
    const NormalFormReport report = hopf::normal_form(g);

    const Kept expected{{1, {2, 0, 0}}, {2, {1, 1, 0}}, {2, {3, 0, 0}}};
    CHECK(sorted_kept(report) == expected);
    CHECK(testutil::germ_distance(report.normalized, g) == 0.0);
    CHECK(testutil::germ_distance(report.change, MapGerm::identity(3, 6)) == 0.0);
}

TEST_CASE("normal form output carries only resonant directions") {
    // Diagonal spectra with descending moduli keep the working frame trivial,
    // so kept directions can be checked against the eigenvalues directly.
    std::mt19937_64 rng(301);
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 2 + int(rng() % 2);
        const int cap = 6;
        std::vector<Complex> alpha;
        if (trial % 4 == 0) {
            alpha = {Complex(0.5, 0.0), Complex(0.25, 0.0)};  // planted relation
            if (n == 3) alpha.push_back(Complex(0.125, 0.0));
        } else {
            for (int i = 0; i < n; ++i)
                alpha.push_back(testutil::random_on_annulus(rng, 0.35, 0.8));
            std::sort(alpha.begin(), alpha.end(), [](const Complex& a, const Complex& b) {
                return std::abs(a) > std::abs(b);
            });
        }
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
        for (int i = 0; i < n; ++i) a(i, i) = alpha[std::size_t(i)];
        const MapGerm g = testutil::random_polynomial_germ(rng, a, cap, 3, 0.5);

        const NormalFormReport report = hopf::normal_form(g);
        const double scale = std::max(1.0, g.max_abs_coeff());
        CHECK(report.max_residual <= 1e-11 * scale);
        CHECK(hopf::verify_conjugacy(report.change, g, report.normalized) <= 1e-9 * scale);
        for (const auto& [comp, mono] : report.kept_monomials) {
            Complex prod(1.0, 0.0);
            const auto& e = mono.exponents();
            for (int j = 0; j < n; ++j)
                for (int r = 0; r < e[std::size_t(j)]; ++r) prod *= alpha[std::size_t(j)];
            const Complex pivot = alpha[std::size_t(comp)] - prod;
            CHECK(std::abs(pivot) <= 1e-9 * std::abs(alpha[std::size_t(comp)]));
        }
    }
}

TEST_CASE("linearization is idempotent") {
    std::mt19937_64 rng(302);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 2 + int(rng() % 3);
        const MapGerm g = sample_nonresonant(rng, n, 6, 1e-3);
        const NormalFormReport first = hopf::linearize(g);
        const double scale = std::max(1.0, g.max_abs_coeff());
        CHECK(first.max_residual <= 1e-9 * scale);

        const MapGerm conj =
            hopf::compose_germs(first.change, g, hopf::invert_germ(first.change));
        const NormalFormReport second = hopf::linearize(conj);
        CHECK(testutil::germ_distance(second.change, MapGerm::identity(n, 6)) <= 1e-7);
        CHECK(second.normalized.linear_part().isApprox(g.linear_part(), 1e-12));
    }
}

TEST_CASE("kept directions are stable under diagonal rescaling") {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> scale_draw(0.5, 2.0);
    for (int trial = 0; trial < 8; ++trial) {
        const int n = 3, cap = 6;
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
        a(0, 0) = Complex(0.5, 0.0);
        a(1, 1) = Complex(0.25, 0.0);
        a(2, 2) = Complex(0.125, 0.0);
        const MapGerm g = testutil::random_polynomial_germ(rng, a, cap, 4, 0.5);

        Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n, n);
        for (int i = 0; i < n; ++i) d(i, i) = Complex(scale_draw(rng), 0.0);
        const MapGerm scaled = hopf::compose_germs(
            MapGerm::linear(d, cap), g, MapGerm::linear(d.inverse(), cap));

        CHECK(sorted_kept(hopf::normal_form(g)) == sorted_kept(hopf::normal_form(scaled)));
    }
}

TEST_CASE("tiny non-resonant divisors raise the conditioning flag") {
    // Second eigenvalue sits 1e-11 away from 0.5^10 = 0.0009765625: far enough
    // from resonance at the default tolerance, close enough to be flagged.
    const MapGerm g =
        testutil::germ_of({"z1/2 + z2^2", "0.0009765625100*z2 + z1^10"}, 2, 10);
    const NormalFormReport report = hopf::linearize(g);
    CHECK(report.ill_conditioned);
    CHECK(report.small_divisor < 1e-10);
    CHECK(report.small_divisor > 0.0);
}

TEST_CASE("schur frames are handled for non-diagonal linear parts") {
    std::mt19937_64 rng(304);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 3, cap = 5;
        const Eigen::MatrixXcd a = testutil::random_contraction(rng, n, 2);
        const MapGerm g = testutil::random_polynomial_germ(rng, a, cap, 3, 0.5);
        const NormalFormReport report = hopf::normal_form(g);
        const double scale = std::max(1.0, g.max_abs_coeff());
        CHECK(hopf::verify_conjugacy(report.change, g, report.normalized) <= 1e-8 * scale);
        CHECK(report.max_residual <= 1e-8 * scale);
    }
}
