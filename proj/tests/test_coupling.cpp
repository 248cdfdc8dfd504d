#include <catch_amalgamated.hpp>

#include <memory>

#include "mtlab/coupling.hpp"

using namespace mtlab;

namespace {

CouplingModel model(CouplingKind k, unsigned r = 5, std::uint32_t n = 1050)
{
    CouplingParams p;
    if (traits(k).needs_n) {
        p.n = n;
    }
    if (traits(k).needs_end) {
        p.xi = EndDirection{'a'};
    }
    return CouplingModel(k, r, p);
}

} // namespace

TEST_CASE("kind names round-trip", "[coupling]")
{
    for (const auto k : kAllKinds) {
        CHECK(parse_kind(kind_name(k)) == k);
    }
    CHECK_FALSE(parse_kind("endbits").has_value());
    CHECK_FALSE(traits(CouplingKind::IndependentSets).monotone_claimed);
}

TEST_CASE("models validate their parameters", "[coupling]")
{
    CHECK_THROWS_AS(CouplingModel(CouplingKind::EndSets, 4, CouplingParams{std::nullopt, EndDirection{'a'}}),
                    parameter_error);
    CHECK_THROWS_AS(CouplingModel(CouplingKind::EndBits, 4, CouplingParams{}), parameter_error);
    CHECK_THROWS_AS(CouplingModel(CouplingKind::EndSets, 4, CouplingParams{0u, EndDirection{'a'}}), parameter_error);
    CHECK_THROWS_AS(CouplingModel(CouplingKind::LiftedBits, 3, CouplingParams{2u, EndDirection{'a'}}),
                    invalid_cycle_error);
    const CouplingModel bits = model(CouplingKind::PeresBits);
    CHECK_THROWS_AS(bits.sample_sets(ReplicateContext{0, 0}), parameter_error);
    CHECK_THROWS_AS(bits.product(), parameter_error);
    CHECK_THROWS_AS(model(CouplingKind::EndSets).sample_bits(ReplicateContext{0, 0}), parameter_error);
}

TEST_CASE("claimed couplings are monotone on every replicate", "[coupling]")
{
    for (const auto k : {CouplingKind::EndBits, CouplingKind::PeresBits, CouplingKind::EndSets}) {
        const CouplingModel m = model(k, 5);
        for (std::uint64_t r = 0; r < 300; ++r) {
            const auto check = check_monotone(make_coupling(m, ReplicateContext{17, r}));
            REQUIRE(check.monotone);
            CHECK_FALSE(check.first_violation.has_value());
        }
    }
    const CouplingModel lifted = model(CouplingKind::LiftedBits, 3, 50);
    for (std::uint64_t r = 0; r < 50; ++r) {
        REQUIRE(check_monotone(make_coupling(lifted, ReplicateContext{17, r})).monotone);
    }
}

TEST_CASE("the independent control is caught as non-monotone", "[coupling]")
{
    const CouplingModel m = model(CouplingKind::IndependentSets, 4, 1050);
    const auto check = check_monotone(make_coupling(m, ReplicateContext{0, 0}));
    CHECK_FALSE(check.monotone);
    REQUIRE(check.first_violation.has_value());
    // The reported site is the first one in vertex order.
    const SetSample s = m.sample_sets(ReplicateContext{0, 0});
    for (std::size_t i = 0; i < s.lower.size() && s.lower.domain[i] < *check.first_violation; ++i) {
        CHECK(s.lower.labels[i].subset_of(s.upper.labels[i]));
    }
    CHECK_FALSE(s.lower.at(*check.first_violation).subset_of(s.upper.at(*check.first_violation)));
}

TEST_CASE("monotone check on hand-built samples", "[coupling]")
{
    BitSample s;
    s.lower.domain = {0, 1, 2};
    s.upper.domain = {0, 1, 2};
    s.lower.labels = {0, 1, 0};
    s.upper.labels = {1, 1, 0};
    CHECK(check_monotone(s).monotone);
    s.lower.labels[2] = 1;
    CHECK(check_monotone(s).first_violation == VertexId{2});
    s.upper.domain = {0, 1, 3};
    CHECK_THROWS_AS(check_monotone(s), parameter_error);
}

TEST_CASE("shared randomness across kinds", "[coupling]")
{
    // EndBits and PeresBits read the same eta, so their upper processes agree.
    const CouplingModel e = model(CouplingKind::EndBits, 4);
    const CouplingModel p = model(CouplingKind::PeresBits, 4);
    const ReplicateContext ctx{123, 9};
    CHECK(e.sample_bits(ctx).upper == p.sample_bits(ctx).upper);
    CHECK(e.sample_bits(ctx).lower == e.sample_bits(ctx).lower);

    // EndSets and LiftedBits read the same lambda.
    const CouplingModel es = model(CouplingKind::EndSets, 4, 20);
    const CouplingModel lb = model(CouplingKind::LiftedBits, 4, 20);
    const SetSample a = es.sample_sets(ctx);
    const SetSample b = lb.sample_sets(ctx);
    CHECK(a.lower == b.lower);
    CHECK(a.upper == b.upper);
    CHECK(unlift(lb.sample_bits(ctx).upper, lb.product()) == a.upper);
}

TEST_CASE("marginal checks accept the true law and reject a wrong one", "[coupling]")
{
    const CouplingModel m = model(CouplingKind::EndBits, 3);
    for (const auto& spec : default_marginals(m)) {
        const TestResult r = check_marginal(spec.draw, spec.law, 20000, 4, 0.001, 1);
        CHECK_FALSE(r.reject);
    }
    const auto specs = default_marginals(m);
    // Lower site law tested against the upper one.
    CHECK(check_marginal(specs[0].draw, specs[1].law, 20000, 4, 0.001, 1).reject);
    CHECK_THROWS_AS(check_marginal(specs[0].draw, specs[0].law, 10, 4), test_power_error);

    const CategoricalLaw three{"three cells", {0.2, 0.3, 0.5}};
    CHECK_THROWS_AS(check_marginal([](const ReplicateContext&) { return std::size_t{3}; }, three, 100, 0, 0.01, 1),
                    replicate_error);
}

TEST_CASE("set marginals at small n", "[coupling]")
{
    const CouplingModel m = model(CouplingKind::EndSets, 3, 5);
    for (const auto& spec : default_marginals(m)) {
        CHECK_FALSE(check_marginal(spec.draw, spec.law, 20000, 6, 0.001, 1).reject);
    }
    const CouplingModel lb = model(CouplingKind::LiftedBits, 3, 5);
    for (const auto& spec : default_marginals(lb)) {
        CHECK_FALSE(check_marginal(spec.draw, spec.law, 20000, 6, 0.001, 1).reject);
    }
}

TEST_CASE("window offsets", "[coupling]")
{
    CHECK(tree_window_offsets(0).size() == 1);
    CHECK(tree_window_offsets(1).size() == 4);
    CHECK(tree_window_offsets(2).size() == 10);
    // (x, r) with |x| + |r| <= 1: origin with r in {-1, 0, 1}, then a, b, c.
    CHECK(product_window_offsets(1).size() == 6);
}

TEST_CASE("invariance windows", "[coupling]")
{
    const auto m = std::make_shared<const CouplingModel>(model(CouplingKind::PeresBits, 4));
    auto ball = std::shared_ptr<const TreeBall>(m, &m->tree());
    const WindowSignature upper = tree_window_process<Bit>(
        ball, [m](const ReplicateContext& ctx) { return m->sample_bits(ctx).upper; }, 1);
    for (const char g : kGenerators) {
        CHECK_FALSE(check_invariance_window(upper, Generator{g}, 4000, 1, 0.001, 1).reject);
    }

    SECTION("a non-invariant process is rejected")
    {
        // 1 only at the origin.
        const WindowSignature planted = [ball](const ReplicateContext&, const std::optional<Shift>& base) {
            BitConfig c = build_on_interior<Bit>(*ball, [](VertexId v) { return Bit(v == 0); });
            return tree_window(c, *ball, tree_window_offsets(1), base);
        };
        CHECK(check_invariance_window(planted, Generator{'a'}, 1000, 1).reject);
    }
    SECTION("windows that leave the ball are an error")
    {
        const WindowSignature wide = tree_window_process<Bit>(
            ball, [m](const ReplicateContext& ctx) { return m->sample_bits(ctx).upper; }, 3);
        CHECK_THROWS_AS(check_invariance_window(wide, Generator{'a'}, 100, 1, 0.01, 1), replicate_error);
    }
    SECTION("too many observed cells ask for coarsening")
    {
        const WindowSignature fine = tree_window_process<Bit>(
            ball, [m](const ReplicateContext& ctx) { return m->sample_bits(ctx).lower; }, 2);
        CHECK_THROWS_AS(check_invariance_window(fine, Generator{'a'}, 2000, 1, 0.01, 1), coarsening_error);
    }
}

TEST_CASE("lifted windows include cycle rotations", "[coupling]")
{
    const auto m = std::make_shared<const CouplingModel>(model(CouplingKind::LiftedBits, 3, 4));
    auto ball = std::shared_ptr<const TreeBall>(m, &m->tree());
    const WindowSignature sig =
        lifted_window_process(ball, 4, [m](const ReplicateContext& ctx) { return m->sample_sets(ctx).upper; }, 1);
    CHECK_FALSE(check_invariance_window(sig, Rotation{1}, 4000, 2, 0.001, 1).reject);
    CHECK_FALSE(check_invariance_window(sig, Generator{'b'}, 4000, 2, 0.001, 1).reject);
    // Too few replicates pool into a single cell: no evidence either way.
    CHECK(check_invariance_window(sig, Generator{'b'}, 3, 2, 0.01, 1).p_value == 1.0);
}
