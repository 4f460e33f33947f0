#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hopf/errors.hpp"
#include "hopf/germ.hpp"
#include "hopf/parse.hpp"
#include "hopf/series.hpp"
#include "helpers.hpp"

using hopf::Complex;
using hopf::MapGerm;
using hopf::MonomialIndex;
using hopf::TruncatedSeries;
using hopf::parse_series;

namespace {

// Random polynomial with dyadic coefficients (k/8): ring identities on these
// evaluate without any rounding, so equality checks can be exact.
TruncatedSeries random_dyadic(std::mt19937_64& rng, int n, int cap, int terms) {
    TruncatedSeries s(n, cap);
    std::uniform_int_distribution<int> num(-16, 16);
    std::uniform_int_distribution<int> deg(0, cap);
    for (int t = 0; t < terms; ++t) {
        std::vector<int> exps(std::size_t(n), 0);
        const int d = deg(rng);
        for (int u = 0; u < d; ++u) ++exps[rng() % std::size_t(n)];
        s.set_coefficient(MonomialIndex(exps),
                          Complex(num(rng) / 8.0, num(rng) / 8.0));
    }
    return s;
}

int max_term_degree(const TruncatedSeries& s) {
    int best = 0;
    for (const auto& [k, c] : s.raw_terms())
        best = std::max(best, hopf::detail::key_degree(k));
    return best;
}

}  // namespace

TEST_CASE("coefficient access and monomial basics") {
    TruncatedSeries s(3, 6);
    CHECK(s.is_zero());
    const MonomialIndex m({1, 2, 0});
    s.set_coefficient(m, Complex(2.5, -1.0));
    CHECK(s.coefficient(m) == Complex(2.5, -1.0));
    CHECK(s.coefficient(MonomialIndex({0, 0, 1})) == Complex(0.0, 0.0));
    s.set_coefficient(m, Complex(0.0, 0.0));
    CHECK(s.is_zero());

    CHECK(MonomialIndex::unit(3, 1).exponents() == std::vector<int>{0, 1, 0});
    CHECK(MonomialIndex({2, 0, 1}).total_degree() == 3);
}

TEST_CASE("ring laws hold exactly on dyadic polynomials") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 1 + int(rng() % 3);
        const int cap = 3 + int(rng() % 3);
        const TruncatedSeries a = random_dyadic(rng, n, cap, 6);
        const TruncatedSeries b = random_dyadic(rng, n, cap, 6);
        const TruncatedSeries c = random_dyadic(rng, n, cap, 6);
        const TruncatedSeries one = TruncatedSeries::constant(n, cap, Complex(1.0, 0.0));

        CHECK(testutil::series_distance((a * b) * c, a * (b * c)) == 0.0);
        CHECK(testutil::series_distance(a * (b + c), a * b + a * c) == 0.0);
        CHECK(testutil::series_distance(a * b, b * a) == 0.0);
        CHECK(testutil::series_distance(a * one, a) == 0.0);
        CHECK(testutil::series_distance(a + b, b + a) == 0.0);
        CHECK(testutil::series_distance((a + b) + c, a + (b + c)) == 0.0);
        CHECK((a - a).is_zero());
    }
}

TEST_CASE("all operations stay inside the truncation order") {
    std::mt19937_64 rng(102);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + int(rng() % 3);
        const int cap = 2 + int(rng() % 4);
        const TruncatedSeries a = random_dyadic(rng, n, cap, 8);
        const TruncatedSeries b = random_dyadic(rng, n, cap, 8);
        CHECK(max_term_degree(a * b) <= cap);
        CHECK(max_term_degree(a + b) <= cap);
        CHECK(max_term_degree(a.pow(3)) <= cap);
        CHECK(max_term_degree(a.differentiate(0)) <= cap);
    }
}

TEST_CASE("spurious fill-in is dropped relative to its own degree") {
    // A degree-2 dust coefficient far below the degree-2 scale disappears,
    // while a small degree-1 coefficient under a huge degree-5 term survives.
    TruncatedSeries big(2, 5);
    big.set_coefficient(MonomialIndex({2, 0}), Complex(1.0, 0.0));
    TruncatedSeries dust(2, 5);
    dust.set_coefficient(MonomialIndex({0, 2}), Complex(1e-18, 0.0));
    const TruncatedSeries sum = big + dust;
    CHECK(sum.coefficient(MonomialIndex({0, 2})) == Complex(0.0, 0.0));

    TruncatedSeries mixed(2, 5);
    mixed.set_coefficient(MonomialIndex({1, 0}), Complex(1e-8, 0.0));
    mixed.set_coefficient(MonomialIndex({3, 2}), Complex(1e20, 0.0));
    const TruncatedSeries doubled = mixed + mixed;
    CHECK(doubled.coefficient(MonomialIndex({1, 0})) == Complex(2e-8, 0.0));
}

TEST_CASE("reciprocal and division") {
    std::mt19937_64 rng(103);
    for (int trial = 0; trial < 10; ++trial) {
        TruncatedSeries s = random_dyadic(rng, 2, 6, 5);
        s.set_coefficient(MonomialIndex::zero(2), Complex(2.0, 0.5));
        const TruncatedSeries one = TruncatedSeries::constant(2, 6, Complex(1.0, 0.0));
        CHECK(testutil::series_distance(s * s.reciprocal(), one) <= 1e-12);
        CHECK(testutil::series_distance(s.pow(-2) * s * s, one) <= 1e-11);
        const TruncatedSeries q = one / s;
        CHECK(testutil::series_distance(q, s.reciprocal()) <= 1e-13);
    }
    TruncatedSeries no_constant = TruncatedSeries::variable(2, 6, 0);
    CHECK_THROWS_AS((void)no_constant.reciprocal(), hopf::Error);
}

TEST_CASE("composition matches pointwise evaluation") {
    std::mt19937_64 rng(104);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + int(rng() % 2);
        const int cap = 8;
        const Eigen::MatrixXcd a = testutil::random_contraction(rng, n, int(rng() % 3));
        const MapGerm g = testutil::random_polynomial_germ(rng, a, cap, 2, 0.4);
        TruncatedSeries f = random_dyadic(rng, n, cap, 6);
        hopf::GermComposer composer(g.components());
        const TruncatedSeries composed = composer.compose(f);

        // Evaluate both routes at a tiny point; truncation error is far below
        // the comparison tolerance there.
        std::vector<Complex> pt;
        for (int i = 0; i < n; ++i) pt.push_back(testutil::random_on_annulus(rng, 0.005, 0.01));
        std::vector<Complex> gpt;
        for (int i = 0; i < n; ++i) gpt.push_back(g.component(i).evaluate(pt));
        CHECK(std::abs(composed.evaluate(pt) - f.evaluate(gpt)) <= 1e-12);
    }
}

TEST_CASE("composition is associative across germ composition") {
    std::mt19937_64 rng(105);
    for (int trial = 0; trial < 8; ++trial) {
        const int n = 2;
        const int cap = 6;
        const MapGerm g1 = testutil::random_polynomial_germ(
            rng, testutil::random_contraction(rng, n, int(rng() % 3)), cap, 2, 0.3);
        const MapGerm g2 = testutil::random_polynomial_germ(
            rng, testutil::random_contraction(rng, n, int(rng() % 3)), cap, 2, 0.3);
        TruncatedSeries f = random_dyadic(rng, n, cap, 6);

        hopf::GermComposer c1(g1.components());
        hopf::GermComposer c2(g2.components());
        const TruncatedSeries two_step = c2.compose(c1.compose(f));
        hopf::GermComposer c12(compose_germs(g1, g2).components());
        const TruncatedSeries one_step = c12.compose(f);

        const double scale = std::max(1.0, std::max(two_step.max_abs_coeff(),
                                                    one_step.max_abs_coeff()));
        CHECK(testutil::series_distance(two_step, one_step) <= 1e-12 * scale);
    }
}

TEST_CASE("germ inversion round trips") {
    std::mt19937_64 rng(106);
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 2 + int(rng() % 3);
        const int cap = 8;
        const Eigen::MatrixXcd a =
            testutil::random_contraction(rng, n, int(rng() % 3), 0.5, 0.9);
        // Low-degree terms stay small; coefficients up to 10 enter at degrees
        // whose feedback through the inverse stays bounded.
        MapGerm g = testutil::random_polynomial_germ(rng, a, cap, 2, 0.3);
        std::vector<TruncatedSeries> comps = g.components();
        std::vector<int> exps(std::size_t(n), 0);
        exps[0] = cap - 1;
        exps[std::size_t(n - 1)] += 1;
        comps[rng() % std::size_t(n)].set_coefficient(
            MonomialIndex(exps), testutil::random_on_annulus(rng, 5.0, 10.0));
        g = MapGerm(std::move(comps));

        const MapGerm inv = invert_germ(g);
        const MapGerm id = MapGerm::identity(n, cap);
        CHECK(testutil::germ_distance(compose_germs(g, inv), id) <= 1e-10);
        CHECK(testutil::germ_distance(compose_germs(inv, g), id) <= 1e-10);
    }
}

TEST_CASE("parse, print, parse is a fixed point") {
    std::mt19937_64 rng(107);
    const std::vector<std::string> samples = {
        "0",
        "z1",
        "1/2 + z1^2 - (3/4)*z2",
        "(2+3i)*z1*z2 - i*z3^4",
        "0.125*z1^3 + z2*z3 - 2.5e-3*z1",
    };
    for (const std::string& text : samples) {
        const TruncatedSeries first = parse_series(text, 3, 6);
        const TruncatedSeries second = parse_series(first.str(), 3, 6);
        CHECK(testutil::series_distance(first, second) == 0.0);
        CHECK(first.str() == second.str());
    }
    for (int trial = 0; trial < 20; ++trial) {
        TruncatedSeries s(3, 7);
        std::uniform_real_distribution<double> coeff(-3.0, 3.0);
        for (int t = 0; t < 8; ++t) {
            std::vector<int> exps(3, 0);
            const int d = int(rng() % 8);
            for (int u = 0; u < d; ++u) ++exps[rng() % 3];
            s.set_coefficient(MonomialIndex(exps), Complex(coeff(rng), coeff(rng)));
        }
        const TruncatedSeries reparsed = parse_series(s.str(), 3, 7);
        CHECK(testutil::series_distance(s, reparsed) == 0.0);
    }
}

TEST_CASE("expression grammar") {
    const int n = 3, cap = 6;
    CHECK(parse_series("z1/2", n, cap).coefficient(MonomialIndex::unit(n, 0)) ==
          Complex(0.5, 0.0));
    CHECK(std::abs(parse_series("18/7*z2^2", n, cap).coefficient(MonomialIndex({0, 2, 0})) -
                   Complex(18.0 / 7.0, 0.0)) <= 1e-15);
    CHECK(parse_series("i", n, cap).coefficient(MonomialIndex::zero(n)) == Complex(0.0, 1.0));
    CHECK(parse_series("2i", n, cap).coefficient(MonomialIndex::zero(n)) == Complex(0.0, 2.0));
    CHECK(parse_series("-z1^2*z2", n, cap).coefficient(MonomialIndex({2, 1, 0})) ==
          Complex(-1.0, 0.0));
    CHECK(parse_series("(1+2i)*(1-2i)", n, cap).coefficient(MonomialIndex::zero(n)) ==
          Complex(5.0, 0.0));
    // Power binds tighter than product; unary minus applies to the whole power.
    CHECK(parse_series("2*z1^3", n, cap).coefficient(MonomialIndex({3, 0, 0})) ==
          Complex(2.0, 0.0));
    CHECK(parse_series("(1+z1)/(2+z2)", n, cap)
              .coefficient(MonomialIndex::zero(n)) == Complex(0.5, 0.0));

    CHECK_THROWS_AS((void)parse_series("z1 +", n, cap), hopf::SyntaxError);
    CHECK_THROWS_AS((void)parse_series("z9", n, cap), hopf::Error);
    CHECK_THROWS_AS((void)parse_series("z1 $ z2", n, cap), hopf::SyntaxError);
    CHECK_THROWS_AS((void)parse_series("1/z1", n, cap), hopf::Error);

    try {
        (void)parse_series("z1 + @", n, cap);
        CHECK(false);
    } catch (const hopf::SyntaxError& e) {
        CHECK(e.position() == 5);
    }
}

TEST_CASE("germ validation") {
    CHECK_THROWS_AS((void)hopf::parse_germ({"1 + z1", "z2"}, 2, 4), hopf::Error);
    CHECK_THROWS_AS((void)hopf::parse_germ({"z1 + z2", "z1 + z2"}, 2, 4), hopf::Error);
    const MapGerm g = hopf::parse_germ({"z2", "z1/2"}, 2, 4);
    CHECK(g.linear_part()(0, 1) == Complex(1.0, 0.0));
    CHECK(g.linear_part()(1, 0) == Complex(0.5, 0.0));
}

TEST_CASE("derivative rules") {
    std::mt19937_64 rng(108);
    for (int trial = 0; trial < 10; ++trial) {
        const TruncatedSeries a = random_dyadic(rng, 2, 6, 6);
        const TruncatedSeries b = random_dyadic(rng, 2, 6, 6);
        // Leibniz on the truncation: degree cap of the product rule loses the
        // cap-degree interactions, so compare through cap-1 after a cap bump.
        const TruncatedSeries left = (a * b).differentiate(0);
        const TruncatedSeries right = a.differentiate(0) * b + a * b.differentiate(0);
        CHECK(testutil::series_distance(left.graded_component(0), right.graded_component(0)) ==
              0.0);
        for (int d = 0; d + 1 <= 5; ++d)
            CHECK(testutil::series_distance(left.graded_component(d),
                                            right.graded_component(d)) == 0.0);
    }
}
