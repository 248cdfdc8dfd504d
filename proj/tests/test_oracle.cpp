#include <catch_amalgamated.hpp>

#include "mtlab/oracle.hpp"

using namespace mtlab;
using Catch::Approx;

namespace {

double as_double(const Rational& r) { return r.convert_to<double>(); }

VertexId at(const TreeBall& b, const char* w) { return b.index_of(VertexWord(w)); }

} // namespace

TEST_CASE("distinct-pick products", "[oracle]")
{
    CHECK(distinct_product(1, 5) == Rational(1));
    CHECK(distinct_product(2, 2) == Rational(1, 2));
    CHECK(distinct_product(3, 2) == Rational(0));
    CHECK(distinct_product(20, 19) == Rational(0));

    // 20!/20^20
    BigInt fact = 1, pow = 1;
    for (int i = 1; i <= 20; ++i) {
        fact *= i;
        pow *= 20;
    }
    CHECK(distinct_product(20, 20) == Rational(fact, pow));

    CHECK(as_double(distinct_product(20, 1050)) == Approx(0.833532092376632).epsilon(1e-13));
    CHECK(as_double(distinct_product(9, 1050)) == Approx(0.966205623858394).epsilon(1e-13));
    CHECK(as_double(distinct_product(20, 100)) == Approx(0.13039950).epsilon(1e-6));

    CHECK_THROWS_AS(distinct_product(0, 5), parameter_error);
    CHECK_THROWS_AS(distinct_product(5, 0), parameter_error);
    CHECK_THROWS_AS(distinct_product(5, 2'000'000), capacity_error);
}

TEST_CASE("threshold on n", "[oracle]")
{
    CHECK(distinct_product(kPicksE2, 1050) >= kFiveSixths);
    CHECK(distinct_product(kPicksE2, 1049) >= kFiveSixths);
    CHECK(distinct_product(kPicksE2, 1048) < kFiveSixths);
    CHECK(as_double(distinct_product(kPicksE2, 1049)) == Approx(0.8333865).epsilon(1e-6));
    CHECK(as_double(distinct_product(kPicksE2, 1048)) == Approx(0.8332407).epsilon(1e-6));

    CHECK(threshold_n(1050) == 1049u);
    CHECK(threshold_n(1049) == 1049u);
    CHECK_FALSE(threshold_n(1048).has_value());
    CHECK_FALSE(threshold_n(10).has_value());
    CHECK_THROWS_AS(threshold_n(0), parameter_error);

    const auto c = prob_E_bounds(1050);
    CHECK(c.meets_five_sixths);
    CHECK(as_double(c.union_bound_pe) == Approx(0.799737716235026).epsilon(1e-13));
    CHECK(c.union_bound_pe >= kTwoThirds);
    CHECK(prob_E_bounds(30).union_bound_pe == Rational(0));
}

TEST_CASE("rational rendering", "[oracle]")
{
    CHECK(to_fraction_string(Rational(6, 8)) == "3/4");
    CHECK(to_decimal_string(Rational(5, 6), 6) == "0.833333");
    CHECK(to_decimal_string(Rational(2, 3), 3) == "0.667");
    CHECK(to_decimal_string(Rational(-1, 8), 2) == "-0.13");
    CHECK(to_decimal_string(Rational(7), 0) == "7");
}

TEST_CASE("exhaustive X-xi law is product Bernoulli(3/4)", "[oracle]")
{
    const TreeBall b(4);
    const EndDirection xi{'a'};
    const VertexId o = 0, a = at(b, "a"), bb = at(b, "b"), ab = at(b, "ab"), ca = at(b, "ca");
    CHECK(enumerate_x_xi(b, xi, {o}, {}) == Rational(3, 4));
    // Five vertices, adjacent ones included, J^xi disjoint: 10 edges.
    CHECK(enumerate_x_xi(b, xi, {o, a, ab}, {bb, ca}) == Rational(27, 1024));
    CHECK(enumerate_x_xi(b, xi, {o, a, bb, ab, ca}, {}) == Rational(243, 1024));
}

TEST_CASE("exhaustive X-hat law is product Bernoulli(3/4)", "[oracle]")
{
    const TreeBall b(4);
    // A connected five-vertex set: 15 incidences, 3 shared edges, 12 edges.
    const VertexId o = 0, a = at(b, "a"), bb = at(b, "b"), ab = at(b, "ab"), ca = at(b, "ca");
    CHECK(enumerate_x_hat(b, {o, a, ab}, {bb, ca}) == Rational(27, 1024));
    CHECK(enumerate_x_hat(b, {o, a, bb, ab, ca}, {}) == Rational(243, 1024));
    CHECK(enumerate_x_hat(b, {}, {o, a, bb, ab, ca}) == Rational(1, 1024));
}
