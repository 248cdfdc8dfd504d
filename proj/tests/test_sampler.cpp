#include <catch_amalgamated.hpp>

#include <set>
#include <vector>

#include "mtlab/config.hpp"
#include "mtlab/oracle.hpp"
#include "mtlab/sampler.hpp"
#include "mtlab/stats.hpp"

using namespace mtlab;
using Catch::Approx;

namespace {

VertexId at(const TreeBall& b, const char* w) { return b.index_of(VertexWord(w)); }

// All 2^3 bit patterns on J(o) of the R=1 star.
EdgeBits star_bits(unsigned mask) { return EdgeBits{Bit(mask & 1u), Bit((mask >> 1) & 1u), Bit((mask >> 2) & 1u)}; }

} // namespace

TEST_CASE("label sets", "[config]")
{
    LabelSet s{5, 1, 5};
    CHECK(s.size() == 2);
    CHECK(s.contains(1));
    CHECK_FALSE(s.contains(2));
    CHECK(format_label(s) == "1;5");
    s.insert(3);
    CHECK(format_label(s) == "1;3;5");
    CHECK_THROWS_AS(s.insert(9), capacity_error);
    CHECK(LabelSet{1, 5}.subset_of(s));
    CHECK_FALSE(LabelSet{1, 2}.subset_of(s));
    CHECK(LabelSet{1, 2}.intersection_size(s) == 1);
    CHECK_FALSE(LabelSet{0, 2}.intersects(s));
    CHECK(format_label(Bit{1}) == "1");
    CHECK(label_leq(Bit{0}, Bit{1}));
    CHECK_FALSE(label_leq(Bit{1}, Bit{0}));
}

TEST_CASE("configurations reject reads outside their domain", "[config]")
{
    const TreeBall b(2);
    const BitConfig c = build_on_interior<Bit>(b, [](VertexId) { return Bit{1}; });
    CHECK(c.size() == 4);
    CHECK(c.at(0) == 1);
    CHECK_THROWS_AS(c.at(at(b, "ab")), interiority_error);
    CHECK(dump_configuration(c, b) == ",,1\na,,1\nb,,1\nc,,1\n");
}

TEST_CASE("X^xi, Y^xi and X-hat on a hand-built star", "[sampler]")
{
    const TreeBall b(1);
    // Edge order is a, b, c.
    const EdgeBits eta{1, 0, 0};
    CHECK(y_xi(eta, b).at(0) == 1);
    CHECK(x_hat(eta, b).at(0) == 1);
    // xi = a skips the edge toward a.
    CHECK(x_xi(eta, EndDirection{'a'}, b).at(0) == 0);
    CHECK(x_xi(eta, EndDirection{'b'}, b).at(0) == 1);

    const EdgeBits ones{1, 1, 1};
    CHECK(x_hat(ones, b).at(0) == 0);
    CHECK(y_xi(ones, b).at(0) == 1);
    CHECK(y_xi(EdgeBits{0, 0, 0}, b).at(0) == 0);

    CHECK_THROWS_AS(y_xi(EdgeBits{1, 0}, b), parameter_error);
}

TEST_CASE("single-site laws by exhaustive enumeration of the star", "[sampler]")
{
    const TreeBall b(1);
    int x_ones = 0, y_ones = 0, hat_ones = 0;
    for (unsigned m = 0; m < 8; ++m) {
        const EdgeBits eta = star_bits(m);
        x_ones += x_xi(eta, EndDirection{'c'}, b).at(0);
        y_ones += y_xi(eta, b).at(0);
        hat_ones += x_hat(eta, b).at(0);
        // Pointwise monotonicity of both lower processes.
        CHECK(x_xi(eta, EndDirection{'c'}, b).at(0) <= y_xi(eta, b).at(0));
        CHECK(x_hat(eta, b).at(0) <= y_xi(eta, b).at(0));
    }
    CHECK(x_ones == 6);   // 3/4
    CHECK(y_ones == 7);   // 7/8
    CHECK(hat_ones == 6); // 3/4
}

TEST_CASE("X-hat neighbours are independent, exactly", "[sampler][oracle]")
{
    // Given the edge toward the parent, the two child edges are fresh: X-hat
    // is i.i.d. even though neighbours share an edge.
    const TreeBall b(2);
    const VertexId o = 0, a = at(b, "a");
    CHECK(enumerate_x_hat(b, {o}, {}) == Rational(3, 4));
    CHECK(enumerate_x_hat(b, {}, {o}) == Rational(1, 4));
    CHECK(enumerate_x_hat(b, {}, {}) == Rational(1));
    // Both zero: all five edges agree, 2 / 2^5.
    CHECK(enumerate_x_hat(b, {}, {o, a}) == Rational(1, 16));
    CHECK(enumerate_x_hat(b, {o, a}, {}) == Rational(9, 16));
    CHECK(enumerate_x_hat(b, {o}, {a}) == Rational(3, 16));
    CHECK_THROWS_AS(enumerate_x_hat(b, {o}, {o}), parameter_error);
    CHECK_THROWS_AS(enumerate_x_hat(b, {at(b, "ab")}, {}), interiority_error);

    const TreeBall big(4);
    CHECK_THROWS_AS(enumerate_x_hat(big, big.interior_vertices(1), {}), capacity_error);
}

TEST_CASE("X-hat neighbour pair in simulation", "[sampler]")
{
    const TreeBall b(2);
    const LocalGeometry geo(b, {});
    const VertexId a = at(b, "a");
    std::vector<std::uint64_t> counts(4, 0);
    for (std::uint64_t r = 0; r < 40000; ++r) {
        Stream s(3, r, "eta");
        const BitConfig x = x_hat(sample_bernoulli_edges(b, 0.5, s), geo);
        ++counts[2 * x.at(0) + x.at(a)];
    }
    const std::vector<double> probs{1.0 / 16, 3.0 / 16, 3.0 / 16, 9.0 / 16};
    CHECK_FALSE(chi_square_gof(counts, probs, 0.001).reject);
}

TEST_CASE("Bernoulli samplers", "[sampler]")
{
    const TreeBall b(3);
    Stream s(0, 0, "eta");
    CHECK_THROWS_AS(sample_bernoulli_edges(b, 1.5, s), parameter_error);
    CHECK_THROWS_AS(sample_bernoulli_vertices(b, -0.1, s), parameter_error);
    for (const Bit x : sample_bernoulli_edges(b, 0.0, s)) {
        CHECK(x == 0);
    }
    for (const Bit x : sample_bernoulli_vertices(b, 1.0, s).labels) {
        CHECK(x == 1);
    }
    CHECK(sample_bernoulli_vertices(b, 0.5, s).size() == b.vertex_count());

    const ProductBall p(1, 3);
    CHECK(sample_bernoulli_edges(p, 0.5, s).size() == p.edge_count());
}

TEST_CASE("label processes", "[sampler]")
{
    const TreeBall b(4);
    Stream s(11, 0, "lambda");
    CHECK_THROWS_AS(sample_lambda(b, 0, s), parameter_error);

    SECTION("n = 1 collapses every set to {0}")
    {
        const EdgeLabels lambda = sample_lambda(b, 1, s);
        for (const auto& l : y_s(lambda, b).labels) {
            CHECK(l == LabelSet{0});
        }
        for (const auto& l : x_prime_xi(lambda, EndDirection{'a'}, b).labels) {
            CHECK(l == LabelSet{0});
        }
        CHECK(sample_nu(1, s) == LabelSet{0});
    }
    SECTION("sizes and containment for n = 1050")
    {
        const EdgeLabels lambda = sample_lambda(b, 1050, s);
        for (const auto x : lambda) {
            CHECK(x < 1050);
        }
        const SetConfig y = y_s(lambda, b);
        const SetConfig xp = x_prime_xi(lambda, EndDirection{'b'}, b);
        CHECK(y.domain == xp.domain);
        for (std::size_t i = 0; i < y.size(); ++i) {
            CHECK(y.labels[i].size() >= 1);
            CHECK(y.labels[i].size() <= 3);
            CHECK(xp.labels[i].size() <= 2);
            CHECK(xp.labels[i].subset_of(y.labels[i]));
        }
    }
}

TEST_CASE("Y_S size law matches exact enumeration at n = 4", "[sampler][oracle]")
{
    const auto law = enumerate_y_law(4);
    CHECK(law[0] == Rational(4, 64));
    CHECK(law[1] == Rational(36, 64));
    CHECK(law[2] == Rational(24, 64));
    CHECK_THROWS_AS(enumerate_y_law(7), capacity_error);

    const TreeBall b(1);
    const LocalGeometry geo(b, {});
    std::vector<std::uint64_t> counts(3, 0);
    for (std::uint64_t r = 0; r < 20000; ++r) {
        Stream s(5, r, "lambda");
        ++counts[y_s(sample_lambda(b, 4, s), geo).at(0).size() - 1];
    }
    const std::vector<double> probs{0.0625, 0.5625, 0.375};
    CHECK_FALSE(chi_square_gof(counts, probs, 0.001).reject);
}

TEST_CASE("nu has the law of two independent uniform picks", "[sampler]")
{
    // n = 3: P(|nu| = 1) = 1/3.
    std::uint64_t singles = 0;
    const std::uint64_t N = 30000;
    for (std::uint64_t r = 0; r < N; ++r) {
        Stream s(8, r, "x");
        singles += sample_nu(3, s).size() == 1 ? 1 : 0;
    }
    CHECK(wilson_ci(singles, N, 0.999).contains(1.0 / 3));

    const TreeBall b(3);
    Stream s(8, 0, "x");
    const SetConfig xs = sample_x_s_iid(b, 10, s);
    CHECK(xs.domain == b.interior_vertices(1));
}

TEST_CASE("lift and unlift are mutually inverse", "[sampler]")
{
    const ProductBall p(3, 7);
    const TreeBall& t = p.tree();
    Stream s(2, 0, "lambda");
    const SetConfig z = y_s(sample_lambda(t, 7, s), t);
    const BitConfig lifted = lift(z, p);
    CHECK(lifted.size() == z.size() * 7);
    CHECK(unlift(lifted, p) == z);

    const LiftedView view(z, 7);
    for (std::size_t i = 0; i < lifted.size(); ++i) {
        const VertexId v = lifted.domain[i];
        CHECK(view.at(p.tree_part(v), p.cycle_part(v)) == lifted.labels[i]);
    }

    SECTION("labels outside S are rejected")
    {
        SetConfig bad = z;
        bad.labels[0] = LabelSet{9};
        CHECK_THROWS_AS(lift(bad, p), label_range_error);
    }
    SECTION("unlift rejects empty and partial rows")
    {
        BitConfig zero = lifted;
        for (std::uint32_t c = 0; c < 7; ++c) {
            zero.labels[c] = 0;
        }
        CHECK_THROWS_AS(unlift(zero, p), parameter_error);
        BitConfig partial = lifted;
        partial.domain.pop_back();
        partial.labels.pop_back();
        CHECK_THROWS_AS(unlift(partial, p), parameter_error);
    }
    SECTION("dump lines carry the cycle coordinate")
    {
        const std::string d = dump_configuration(lifted, p);
        CHECK(d.rfind(",0,", 0) == 0);
    }
}
