#include <catch_amalgamated.hpp>

#include <numeric>

#include "mtlab/transport.hpp"

using namespace mtlab;

namespace {

VertexId at(const TreeBall& b, const char* w) { return b.index_of(VertexWord(w)); }

// Edge labels all distinct: every E event holds, and the transport becomes
// deterministic.
SetSample injective_sample(const TreeBall& ball, EndDirection xi)
{
    EdgeLabels lambda(ball.edge_count());
    std::iota(lambda.begin(), lambda.end(), 0u);
    const LocalGeometry geo(ball, xi);
    return SetSample{x_prime_xi(lambda, geo), y_s(lambda, geo), {"lambda"}};
}

CouplingModel end_sets(unsigned r, std::uint32_t n = 1050)
{
    return CouplingModel(CouplingKind::EndSets, r, CouplingParams{n, EndDirection{'a'}});
}

} // namespace

TEST_CASE("radius-two neighbourhood", "[transport]")
{
    const TreeBall b(3);
    const auto vs = radius_two_vertices(0, b);
    CHECK(vs[0] == 0);
    for (std::size_t i = 1; i < 4; ++i) {
        CHECK(b.depth(vs[i]) == 1);
    }
    for (std::size_t i = 4; i < 10; ++i) {
        CHECK(b.depth(vs[i]) == 2);
    }
}

TEST_CASE("E and F on distinct edge labels", "[transport]")
{
    const TreeBall b(5);
    const EndDirection xi{'a'};
    const SetSample cs = injective_sample(b, xi);
    CHECK(check_monotone(cs).monotone);

    const EventWitness w = event_E(0, cs, b);
    CHECK(w.e1_holds);
    CHECK(w.e2_holds);
    // Mass goes along J^xi(o): to b and c, not toward the end.
    CHECK(transport_F(w, at(b, "b"), cs, b) == 1);
    CHECK(transport_F(w, at(b, "c"), cs, b) == 1);
    CHECK(transport_F(w, at(b, "a"), cs, b) == 0);
    CHECK(transport_F(w, at(b, "ab"), cs, b) == 0);

    const OriginRecord r = audit_replicate(cs, b);
    CHECK(r.e);
    CHECK(r.sent == 2);
    CHECK(r.received == 1);
    CHECK(r.receivers_distinct);

    for (const Orientation& o : end_orientation(cs, b)) {
        CHECK(o.out_degree == 2);
        CHECK(o.in_degree == 1);
    }
}

TEST_CASE("E fails when labels collide", "[transport]")
{
    const TreeBall b(5);
    SetSample cs = injective_sample(b, EndDirection{'a'});
    const VertexId ab = at(b, "ab");
    SECTION("two lower sets in the radius-2 ball share a label")
    {
        cs.lower.labels[*cs.lower.position(ab)] = cs.lower.at(0);
        const EventWitness w = event_E(0, cs, b);
        CHECK(w.e1_holds);
        CHECK_FALSE(w.e2_holds);
        CHECK(transport_targets(w, cs, b).empty());
    }
    SECTION("a neighbour's upper set is short")
    {
        cs.upper.labels[*cs.upper.position(at(b, "b"))] = LabelSet{1, 2};
        CHECK_FALSE(event_E(0, cs, b).e1_holds);
    }
    SECTION("F only moves mass to neighbours")
    {
        CHECK(transport_F(0, 0, cs, b) == 0);
        CHECK(transport_F(0, ab, cs, b) == 0);
    }
}

TEST_CASE("interiority is enforced", "[transport]")
{
    const TreeBall b(3);
    const SetSample cs = injective_sample(b, EndDirection{'a'});
    CHECK_NOTHROW(event_E(0, cs, b));
    CHECK_THROWS_AS(event_E(at(b, "a"), cs, b), interiority_error);
    CHECK_THROWS_AS(audit_replicate(cs, b), interiority_error);
    CHECK_THROWS_AS(end_orientation(cs, b), interiority_error);

    CHECK_THROWS_AS(audit_origin(end_sets(3), 1000, 0), interiority_error);
    CHECK_THROWS_AS(audit_origin(end_sets(4), 10, 0), parameter_error);
    CHECK_THROWS_AS(audit_origin(CouplingModel(CouplingKind::PeresBits, 5, {}), 1000, 0), parameter_error);
}

TEST_CASE("origin audit on the end-directed coupling", "[transport]")
{
    const TransportReport rep = audit_origin(end_sets(4), 3000, 21, 1);
    CHECK(rep.replicates == 3000);
    CHECK(rep.pointwise_ok());
    CHECK(rep.max_received <= 1);
    CHECK(rep.mean_sent() == 2.0 * rep.p_e_hat());
    CHECK(rep.count_e <= rep.count_e1);
    CHECK(rep.count_e <= rep.count_e2);
    CHECK(rep.violation_witnessed());

    SECTION("tiny label sets make E rare")
    {
        const TransportReport small = audit_origin(end_sets(4, 3), 500, 21, 1);
        CHECK(small.count_e == 0);
        CHECK(small.mean_sent() == 0.0);
        CHECK(small.pointwise_ok());
    }
    SECTION("the lifted coupling audits identically")
    {
        const CouplingModel lifted(CouplingKind::LiftedBits, 4, CouplingParams{40u, EndDirection{'a'}});
        const TransportReport a = audit_origin(lifted, 300, 5, 1);
        const TransportReport b = audit_origin(end_sets(4, 40), 300, 5, 1);
        CHECK(a.count_e == b.count_e);
        CHECK(a.received_total == b.received_total);
    }
}

TEST_CASE("MTP balance for invariant bit transports", "[transport]")
{
    const CouplingModel m(CouplingKind::PeresBits, 5, {});
    auto draw = [&m](const ReplicateContext& ctx) { return m.sample_bits(ctx); };
    for (const auto& t : builtin_bit_transports()) {
        const BalanceReport r = mtp_balance<Bit>(draw, t, m.tree(), 5000, 13, 1);
        INFO(t.name);
        CHECK(r.balanced());
        CHECK(r.sent.count == 5000);
    }
    const auto zero = builtin_bit_transports().front();
    CHECK(mtp_balance<Bit>(draw, zero, m.tree(), 100, 0, 1).z_score() == 0.0);

    LocalTransport<Bit> far{"far", 9, 1, zero.mass};
    CHECK_THROWS_AS(mtp_balance<Bit>(draw, far, m.tree(), 10, 0, 1), nonlocal_transport_error);
    const CouplingModel small(CouplingKind::PeresBits, 3, {});
    CHECK_THROWS_AS(mtp_balance<Bit>(draw, builtin_bit_transports()[3], small.tree(), 10, 0, 1), interiority_error);
}

TEST_CASE("F is out of balance on the end-directed coupling", "[transport]")
{
    const CouplingModel m = end_sets(5);
    auto draw = [&m](const ReplicateContext& ctx) { return m.sample_sets(ctx); };
    const BalanceReport r = mtp_balance<LabelSet>(draw, transport_F_rule(), m.tree(), 2000, 2, 1);
    CHECK(r.sent.mean > 4.0 / 3.0);
    CHECK(r.received.mean <= 1.0);
    CHECK_FALSE(r.balanced());
}
