#pragma once

// The mass transport F built from a monotone coupling (X*, Y*) of the
// set-valued processes, the audit of mass sent and received at the origin,
// a generic balance check for local transports, and the orientation induced
// by F.
//
// Interiority here is measured against the labelled domain: processes carry
// labels on the interior-1 vertices of a tree ball, so "labels within
// distance k of v" means v is interior at radius k + 1 in the ball.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "config.hpp"
#include "coupling.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "stats.hpp"

namespace mtlab {

inline constexpr double kSentBound = 4.0 / 3.0;

struct EventWitness {
    VertexId v0 = 0;
    bool e1_holds = false;
    bool e2_holds = false;
    std::array<VertexId, 10> vertices{}; // v0, neighbours v1..v3, distance-2 v4..v9 (lexicographic)
    std::array<LabelSet, 3> y_neighbors{};
    std::array<LabelSet, 10> x_ball{};

    bool holds() const noexcept { return e1_holds && e2_holds; }
};

inline void require_labelled_radius(VertexId v, unsigned k, const TreeBall& ball, const char* what)
{
    if (!ball.is_interior(v, k + 1)) {
        throw interiority_error(std::string(what) + ": vertex '" + ball.word(v).letters + "' needs labels within distance " +
                                std::to_string(k) + ", i.e. depth <= R - " + std::to_string(k + 1) +
                                " in the radius-" + std::to_string(ball.radius()) + " ball");
    }
}

/// v0, its three neighbours, then the six vertices at distance 2.
inline std::array<VertexId, 10> radius_two_vertices(VertexId v0, const TreeBall& ball)
{
    std::array<VertexId, 10> out{};
    out[0] = v0;
    std::size_t k = 1;
    for (const VertexId u : ball.neighbors(v0)) {
        out[k++] = u;
    }
    std::vector<VertexId> second;
    for (std::size_t i = 1; i <= 3; ++i) {
        for (const VertexId w : ball.neighbors(out[i])) {
            if (w != v0) {
                second.push_back(w);
            }
        }
    }
    std::sort(second.begin(), second.end());
    std::sort(out.begin() + 1, out.begin() + 4);
    std::copy(second.begin(), second.end(), out.begin() + 4);
    return out;
}

/// E(v0) = E1 and E2: the neighbours' upper sets have size 3 and are pairwise
/// disjoint, and the ten lower sets on the radius-2 ball have size 2 and are
/// pairwise disjoint.
inline EventWitness event_E(VertexId v0, const SetSample& cs, const TreeBall& ball)
{
    require_labelled_radius(v0, 2, ball, "event E");
    EventWitness w;
    w.v0 = v0;
    w.vertices = radius_two_vertices(v0, ball);
    for (std::size_t i = 0; i < 3; ++i) {
        w.y_neighbors[i] = cs.upper.at(w.vertices[i + 1]);
    }
    for (std::size_t i = 0; i < 10; ++i) {
        w.x_ball[i] = cs.lower.at(w.vertices[i]);
    }
    w.e1_holds = true;
    for (std::size_t i = 0; i < 3 && w.e1_holds; ++i) {
        if (w.y_neighbors[i].size() != 3) {
            w.e1_holds = false;
        }
        for (std::size_t j = i + 1; j < 3 && w.e1_holds; ++j) {
            if (w.y_neighbors[i].intersects(w.y_neighbors[j])) {
                w.e1_holds = false;
            }
        }
    }
    w.e2_holds = true;
    for (std::size_t i = 0; i < 10 && w.e2_holds; ++i) {
        if (w.x_ball[i].size() != 2) {
            w.e2_holds = false;
        }
        for (std::size_t j = i + 1; j < 10 && w.e2_holds; ++j) {
            if (w.x_ball[i].intersects(w.x_ball[j])) {
                w.e2_holds = false;
            }
        }
    }
    return w;
}

/// F(v0, v): 1 iff E(v0) holds, v0 ~ v and X*(v0) meets Y*(v).
inline int transport_F(const EventWitness& w, VertexId v, const SetSample& cs, const TreeBall& ball)
{
    if (!w.holds() || !ball.adjacent(w.v0, v)) {
        return 0;
    }
    return cs.lower.at(w.v0).intersects(cs.upper.at(v)) ? 1 : 0;
}

inline int transport_F(VertexId v0, VertexId v, const SetSample& cs, const TreeBall& ball)
{
    return transport_F(event_E(v0, cs, ball), v, cs, ball);
}

/// Receivers of non-zero mass from v0.
inline std::vector<VertexId> transport_targets(const EventWitness& w, const SetSample& cs, const TreeBall& ball)
{
    std::vector<VertexId> out;
    for (const VertexId v : ball.neighbors(w.v0)) {
        if (transport_F(w, v, cs, ball)) {
            out.push_back(v);
        }
    }
    return out;
}

struct OriginRecord {
    int sent = 0;
    int received = 0;
    bool e = false;
    bool e1 = false;
    bool e2 = false;
    bool monotone_at_origin = true;
    bool receivers_distinct = true;
};

/// Mass sent and received by the origin in one replicate.
inline OriginRecord audit_replicate(const SetSample& cs, const TreeBall& ball)
{
    require_labelled_radius(0, 3, ball, "origin audit");
    OriginRecord r;
    const EventWitness w = event_E(0, cs, ball);
    r.e = w.holds();
    r.e1 = w.e1_holds;
    r.e2 = w.e2_holds;
    const auto targets = transport_targets(w, cs, ball);
    r.sent = static_cast<int>(targets.size());
    if (r.e) {
        r.monotone_at_origin = cs.lower.at(0).subset_of(cs.upper.at(0));
        r.receivers_distinct = targets.size() == 2 && targets[0] != targets[1];
    }
    for (const VertexId u : ball.neighbors(0)) {
        r.received += transport_F(event_E(u, cs, ball), 0, cs, ball);
    }
    return r;
}

struct TransportReport {
    std::string kind;
    std::uint32_t n = 0;
    unsigned radius = 0;
    std::uint64_t replicates = 0;
    std::uint64_t seed = 0;

    std::uint64_t count_e = 0;
    std::uint64_t count_e1 = 0;
    std::uint64_t count_e2 = 0;
    std::uint64_t received_total = 0;
    int max_received = 0;
    std::uint64_t sent_outside_0_2 = 0;   // replicates with sent not in {0, 2}
    std::uint64_t sent_without_e = 0;     // sent = 2 while E(o) fails, or sent = 0 while it holds
    std::uint64_t received_above_1 = 0;   // replicates with received > 1
    std::uint64_t monotone_failures = 0;  // E(o) holds but X*(o) is not inside Y*(o)
    std::uint64_t receiver_collisions = 0;
    Moments imbalance;

    double p_e_hat() const { return replicates ? static_cast<double>(count_e) / static_cast<double>(replicates) : 0.0; }
    double mean_sent() const { return 2.0 * p_e_hat(); }
    double mean_received() const
    {
        return replicates ? static_cast<double>(received_total) / static_cast<double>(replicates) : 0.0;
    }

    /// Sent mass is 2 * 1{E(o)}, so its interval is twice the Wilson interval for P(E).
    Interval sent_ci(double level = kDefaultLevel) const
    {
        const Interval p = wilson_ci(count_e, replicates, level);
        return Interval{2.0 * p.lo, 2.0 * p.hi};
    }

    Interval imbalance_ci(double level = kDefaultLevel) const { return imbalance.normal_ci(level); }

    bool pointwise_ok() const
    {
        return sent_outside_0_2 == 0 && sent_without_e == 0 && received_above_1 == 0 && monotone_failures == 0 &&
               receiver_collisions == 0;
    }

    /// The prediction for a monotone coupling: sent >= 4/3 (CI lower bound),
    /// received <= 1 pointwise, and an imbalance bounded away from 0.
    bool violation_witnessed(double level = kDefaultLevel) const
    {
        return sent_ci(level).lo >= kSentBound && max_received <= 1 && imbalance_ci(level).lo > 0.0 && pointwise_ok();
    }
};

inline constexpr unsigned kAuditMinRadius = 4;
inline constexpr std::uint64_t kAuditMinReplicates = 100;

/// Mass-transport audit at the origin for a monotone set-valued coupling
/// (EndSets, or LiftedBits read back through unlift).
inline TransportReport audit_origin(const CouplingModel& model, std::uint64_t replicates, std::uint64_t seed,
                                    unsigned workers = 0, std::uint64_t min_replicates = kAuditMinReplicates)
{
    const auto kind = model.kind();
    if (kind != CouplingKind::EndSets && kind != CouplingKind::LiftedBits) {
        throw parameter_error("audit_origin needs a monotone set-valued coupling (EndSets or LiftedBits), got " +
                              std::string(kind_name(kind)));
    }
    if (model.tree().radius() < kAuditMinRadius) {
        throw interiority_error("the receive audit evaluates E at the origin's neighbours, which needs labels "
                                "within distance 3 of the origin: radius >= " +
                                std::to_string(kAuditMinRadius) + ", have " + std::to_string(model.tree().radius()));
    }
    if (replicates < min_replicates) {
        throw parameter_error("audit_origin needs at least " + std::to_string(min_replicates) + " replicates");
    }
    TransportReport report;
    report.kind = std::string(kind_name(kind));
    report.n = model.n();
    report.radius = model.tree().radius();
    report.replicates = replicates;
    report.seed = seed;

    const TreeBall& ball = model.tree();
    auto job = [&](const ReplicateContext& ctx) {
        if (kind == CouplingKind::LiftedBits) {
            const BitSample lifted = model.sample_bits(ctx);
            SetSample sets{unlift(lifted.lower, model.product()), unlift(lifted.upper, model.product()),
                           lifted.provenance};
            return audit_replicate(sets, ball);
        }
        return audit_replicate(model.sample_sets(ctx), ball);
    };
    auto fold = [](TransportReport& acc, const OriginRecord& r) {
        acc.count_e += r.e;
        acc.count_e1 += r.e1;
        acc.count_e2 += r.e2;
        acc.received_total += static_cast<std::uint64_t>(r.received);
        acc.max_received = std::max(acc.max_received, r.received);
        acc.sent_outside_0_2 += (r.sent != 0 && r.sent != 2);
        acc.sent_without_e += ((r.sent == 2) != r.e);
        acc.received_above_1 += (r.received > 1);
        acc.monotone_failures += !r.monotone_at_origin;
        acc.receiver_collisions += !r.receivers_distinct;
        acc.imbalance.add(static_cast<double>(r.sent - r.received));
    };
    auto merge = [](TransportReport& acc, const TransportReport& o) {
        acc.count_e += o.count_e;
        acc.count_e1 += o.count_e1;
        acc.count_e2 += o.count_e2;
        acc.received_total += o.received_total;
        acc.max_received = std::max(acc.max_received, o.max_received);
        acc.sent_outside_0_2 += o.sent_outside_0_2;
        acc.sent_without_e += o.sent_without_e;
        acc.received_above_1 += o.received_above_1;
        acc.monotone_failures += o.monotone_failures;
        acc.receiver_collisions += o.receiver_collisions;
        acc.imbalance.merge(o.imbalance);
    };
    TransportReport identity = report;
    return run_replicated(replicates, seed, identity, job, fold, merge, workers);
}

// ---------------------------------------------------------------------------
// Mass-Transport Principle balance

inline constexpr unsigned kMaxTransportReach = 8;

/// A transport rule: from sends mass(cs, from, to) to vertices within `reach`,
/// reading only labels within `window` of the sender.
template <class Label>
struct LocalTransport {
    std::string name;
    unsigned reach = 1;
    unsigned window = 1;
    std::function<double(const CouplingSample<Label>&, const TreeBall&, VertexId from, VertexId to)> mass;
};

struct BalanceReport {
    std::string transport;
    std::uint64_t replicates = 0;
    Moments sent;
    Moments received;
    Moments difference;

    double z_score() const
    {
        const double se = difference.std_error();
        if (se == 0.0) {
            return difference.mean == 0.0 ? 0.0 : std::copysign(INFINITY, difference.mean);
        }
        return difference.mean / se;
    }

    /// |sent - received| within 3 standard errors.
    bool balanced() const { return std::abs(z_score()) <= 3.0; }
};

/// Estimates sum_x f(o, x) and sum_x f(x, o) and their difference.
template <class Label, class Draw>
BalanceReport mtp_balance(Draw&& draw, const LocalTransport<Label>& transport, const TreeBall& ball,
                          std::uint64_t replicates, std::uint64_t seed, unsigned workers = 0)
{
    if (transport.reach > kMaxTransportReach || transport.window > kMaxTransportReach) {
        throw nonlocal_transport_error("transport '" + transport.name + "' is not local (reach " +
                                       std::to_string(transport.reach) + ", window " +
                                       std::to_string(transport.window) + ")");
    }
    require_labelled_radius(0, transport.reach + transport.window, ball, "mtp balance");
    std::vector<VertexId> near;
    for (VertexId v = 0; v < ball.vertex_count(); ++v) {
        if (ball.depth(v) <= transport.reach) {
            near.push_back(v);
        }
    }
    BalanceReport identity;
    identity.transport = transport.name;
    identity.replicates = replicates;
    auto job = [&](const ReplicateContext& ctx) {
        const CouplingSample<Label> cs = draw(ctx);
        double out = 0.0;
        double in = 0.0;
        for (const VertexId x : near) {
            out += transport.mass(cs, ball, 0, x);
            in += transport.mass(cs, ball, x, 0);
        }
        return std::make_pair(out, in);
    };
    auto fold = [](BalanceReport& acc, const std::pair<double, double>& r) {
        acc.sent.add(r.first);
        acc.received.add(r.second);
        acc.difference.add(r.first - r.second);
    };
    auto merge = [](BalanceReport& acc, const BalanceReport& o) {
        acc.sent.merge(o.sent);
        acc.received.merge(o.received);
        acc.difference.merge(o.difference);
    };
    return run_replicated(replicates, seed, identity, job, fold, merge, workers);
}

/// Built-in local transports for bit couplings; all diagonally invariant.
inline std::vector<LocalTransport<Bit>> builtin_bit_transports()
{
    std::vector<LocalTransport<Bit>> out;
    out.push_back({"zero", 0, 0, [](const BitSample&, const TreeBall&, VertexId, VertexId) { return 0.0; }});
    out.push_back({"neighbor-upper", 1, 1, [](const BitSample& cs, const TreeBall& ball, VertexId from, VertexId to) {
                       return ball.adjacent(from, to) && cs.upper.at(to) ? 1.0 : 0.0;
                   }});
    out.push_back({"lower-to-upper", 1, 1, [](const BitSample& cs, const TreeBall& ball, VertexId from, VertexId to) {
                       return ball.adjacent(from, to) && cs.lower.at(from) && cs.upper.at(to) ? 1.0 : 0.0;
                   }});
    out.push_back({"distance2-split", 2, 2, [](const BitSample& cs, const TreeBall& ball, VertexId from, VertexId to) {
                       if (tree_distance(ball.word(from), ball.word(to)) != 2 || !cs.upper.at(from)) {
                           return 0.0;
                       }
                       // Split one unit evenly over the distance-2 vertices whose lower label is 1.
                       int targets = 0;
                       for (const VertexId u : ball.neighbors(from)) {
                           for (const VertexId w : ball.neighbors(u)) {
                               targets += (w != from && cs.lower.at(w)) ? 1 : 0;
                           }
                       }
                       return cs.lower.at(to) ? 1.0 / targets : 0.0;
                   }});
    return out;
}

/// F as a local transport on set couplings.
inline LocalTransport<LabelSet> transport_F_rule()
{
    return {"F", 1, 2, [](const SetSample& cs, const TreeBall& ball, VertexId from, VertexId to) {
                if (from == to || !ball.adjacent(from, to)) {
                    return 0.0;
                }
                return static_cast<double>(transport_F(from, to, cs, ball));
            }};
}

struct Orientation {
    VertexId v = 0;
    int out_degree = 0;
    int in_degree = 0;
};

/// Orient every edge from v to a receiver of its mass. Reported for vertices
/// with labels within distance 3 (their neighbours' E events are decidable).
inline std::vector<Orientation> end_orientation(const SetSample& cs, const TreeBall& ball)
{
    std::vector<Orientation> out;
    for (VertexId v = 0; v < ball.vertex_count(); ++v) {
        if (!ball.is_interior(v, 4)) {
            continue;
        }
        Orientation o;
        o.v = v;
        o.out_degree = static_cast<int>(transport_targets(event_E(v, cs, ball), cs, ball).size());
        for (const VertexId u : ball.neighbors(v)) {
            o.in_degree += transport_F(u, v, cs, ball);
        }
        out.push_back(o);
    }
    if (out.empty()) {
        throw interiority_error("end_orientation: no vertex has labels within distance 3 in a radius-" +
                                std::to_string(ball.radius()) + " ball");
    }
    return out;
}

} // namespace mtlab
