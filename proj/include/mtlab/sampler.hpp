#pragma once

// Random labellings: Bernoulli edge/vertex bits, the fixed-end maxima X^xi and
// Y^xi, the all-equal indicator X-hat, uniform edge labels lambda and the
// set-valued processes built from them, and the lift to T3 x C_n.
//
// Every process lives on the interior-1 vertices of a tree ball, where all
// three incident edges are present.

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "rng.hpp"

namespace mtlab {

using EdgeBits = std::vector<Bit>;
using EdgeLabels = std::vector<std::uint32_t>;

/// Edge sets J(v) and J^xi(v) for every interior-1 vertex, computed once per ball.
class LocalGeometry {
  public:
    LocalGeometry(const TreeBall& ball, EndDirection xi) : ball_(&ball), xi_(xi), domain_(ball.interior_vertices(1))
    {
        j_.reserve(domain_.size());
        j_xi_.reserve(domain_.size());
        for (const VertexId v : domain_) {
            j_.push_back(j_set(v, ball));
            j_xi_.push_back(j_xi_set(v, xi, ball));
        }
    }

    const TreeBall& ball() const noexcept { return *ball_; }
    EndDirection end() const noexcept { return xi_; }
    const std::vector<VertexId>& domain() const noexcept { return domain_; }
    const std::array<EdgeId, 3>& j(std::size_t pos) const { return j_.at(pos); }
    const std::array<EdgeId, 2>& j_xi(std::size_t pos) const { return j_xi_.at(pos); }

  private:
    const TreeBall* ball_;
    EndDirection xi_;
    std::vector<VertexId> domain_;
    std::vector<std::array<EdgeId, 3>> j_;
    std::vector<std::array<EdgeId, 2>> j_xi_;
};

inline void require_probability(double p)
{
    if (!(p >= 0.0 && p <= 1.0)) {
        throw parameter_error("probability must lie in [0, 1], got " + std::to_string(p));
    }
}

inline void require_label_count(std::uint32_t n)
{
    if (n == 0) {
        throw parameter_error("label set S must be non-empty");
    }
}

/// Bernoulli(E, p) on the ball's edges, in edge order.
template <class Ball>
EdgeBits sample_bernoulli_edges(const Ball& ball, double p, Stream& rng)
{
    require_probability(p);
    EdgeBits out(ball.edge_count());
    for (auto& b : out) {
        b = rng.bernoulli(p) ? 1 : 0;
    }
    return out;
}

/// Bernoulli(V, p) on every vertex of the ball.
template <class Ball>
BitConfig sample_bernoulli_vertices(const Ball& ball, double p, Stream& rng)
{
    require_probability(p);
    BitConfig out;
    out.domain.resize(ball.vertex_count());
    out.labels.resize(ball.vertex_count());
    for (VertexId v = 0; v < ball.vertex_count(); ++v) {
        out.domain[v] = v;
        out.labels[v] = rng.bernoulli(p) ? 1 : 0;
    }
    return out;
}

inline void require_edge_domain(std::size_t got, const TreeBall& ball)
{
    if (got != ball.edge_count()) {
        throw parameter_error("edge labelling has " + std::to_string(got) + " entries, ball has " +
                              std::to_string(ball.edge_count()) + " edges");
    }
}

/// X^xi(v) = max of eta over J^xi(v).
inline BitConfig x_xi(const EdgeBits& eta, const LocalGeometry& geo)
{
    require_edge_domain(eta.size(), geo.ball());
    BitConfig out;
    out.domain = geo.domain();
    out.labels.reserve(out.domain.size());
    for (std::size_t i = 0; i < out.domain.size(); ++i) {
        const auto& e = geo.j_xi(i);
        out.labels.push_back(std::max(eta[e[0]], eta[e[1]]));
    }
    return out;
}

/// Y^xi(v) = max of eta over J(v).
inline BitConfig y_xi(const EdgeBits& eta, const LocalGeometry& geo)
{
    require_edge_domain(eta.size(), geo.ball());
    BitConfig out;
    out.domain = geo.domain();
    out.labels.reserve(out.domain.size());
    for (std::size_t i = 0; i < out.domain.size(); ++i) {
        const auto& e = geo.j(i);
        out.labels.push_back(std::max({eta[e[0]], eta[e[1]], eta[e[2]]}));
    }
    return out;
}

/// X-hat(v) = 0 iff the three bits on J(v) agree.
inline BitConfig x_hat(const EdgeBits& eta, const LocalGeometry& geo)
{
    require_edge_domain(eta.size(), geo.ball());
    BitConfig out;
    out.domain = geo.domain();
    out.labels.reserve(out.domain.size());
    for (std::size_t i = 0; i < out.domain.size(); ++i) {
        const auto& e = geo.j(i);
        const bool all_equal = eta[e[0]] == eta[e[1]] && eta[e[1]] == eta[e[2]];
        out.labels.push_back(all_equal ? 0 : 1);
    }
    return out;
}

inline BitConfig x_xi(const EdgeBits& eta, EndDirection xi, const TreeBall& ball)
{
    return x_xi(eta, LocalGeometry(ball, xi));
}

inline BitConfig y_xi(const EdgeBits& eta, const TreeBall& ball) { return y_xi(eta, LocalGeometry(ball, {})); }

inline BitConfig x_hat(const EdgeBits& eta, const TreeBall& ball) { return x_hat(eta, LocalGeometry(ball, {})); }

/// lambda: i.i.d. uniform labels from {0, ..., n-1} on the edges.
inline EdgeLabels sample_lambda(const TreeBall& ball, std::uint32_t n, Stream& rng)
{
    require_label_count(n);
    EdgeLabels out(ball.edge_count());
    for (auto& x : out) {
        x = rng.uniform_below(n);
    }
    return out;
}

/// Y_S(v): the distinct labels on J(v).
inline SetConfig y_s(const EdgeLabels& lambda, const LocalGeometry& geo)
{
    require_edge_domain(lambda.size(), geo.ball());
    SetConfig out;
    out.domain = geo.domain();
    out.labels.reserve(out.domain.size());
    for (std::size_t i = 0; i < out.domain.size(); ++i) {
        const auto& e = geo.j(i);
        out.labels.push_back(LabelSet{lambda[e[0]], lambda[e[1]], lambda[e[2]]});
    }
    return out;
}

/// X'(v): the labels on the two edges of J^xi(v). Since the J^xi sets are
/// pairwise disjoint, the family is i.i.d. with law nu, and X' is contained in Y_S.
inline SetConfig x_prime_xi(const EdgeLabels& lambda, const LocalGeometry& geo)
{
    require_edge_domain(lambda.size(), geo.ball());
    SetConfig out;
    out.domain = geo.domain();
    out.labels.reserve(out.domain.size());
    for (std::size_t i = 0; i < out.domain.size(); ++i) {
        const auto& e = geo.j_xi(i);
        out.labels.push_back(LabelSet{lambda[e[0]], lambda[e[1]]});
    }
    return out;
}

inline SetConfig y_s(const EdgeLabels& lambda, const TreeBall& ball) { return y_s(lambda, LocalGeometry(ball, {})); }

inline SetConfig x_prime_xi(const EdgeLabels& lambda, EndDirection xi, const TreeBall& ball)
{
    return x_prime_xi(lambda, LocalGeometry(ball, xi));
}

/// One draw from nu: {x1} u {x2} for independent uniform x1, x2.
inline LabelSet sample_nu(std::uint32_t n, Stream& rng)
{
    require_label_count(n);
    const std::uint32_t x1 = rng.uniform_below(n);
    const std::uint32_t x2 = rng.uniform_below(n);
    return LabelSet{x1, x2};
}

/// X_S: i.i.d. copies of nu on the interior-1 vertices.
inline SetConfig sample_x_s_iid(const TreeBall& ball, std::uint32_t n, Stream& rng)
{
    require_label_count(n);
    return build_on_interior<LabelSet>(ball, [&](VertexId) { return sample_nu(n, rng); });
}

/// lift(Z)(u, c) = 1 iff c is in Z(u), over every (u, c) with u in Z's domain.
inline BitConfig lift(const SetConfig& z, const ProductBall& ball)
{
    const std::uint32_t n = ball.cycle_length();
    BitConfig out;
    out.domain.reserve(z.size() * n);
    out.labels.assign(z.size() * std::size_t{n}, 0);
    for (std::size_t i = 0; i < z.size(); ++i) {
        for (std::uint32_t c = 0; c < n; ++c) {
            out.domain.push_back(ball.id(z.domain[i], c));
        }
        for (const auto s : z.labels[i]) {
            if (s >= n) {
                throw label_range_error("label " + std::to_string(s) + " is outside S = {0.." +
                                        std::to_string(n - 1) + "}");
            }
            out.labels[i * n + s] = 1;
        }
    }
    return out;
}

/// Inverse of lift. Each tree vertex must carry its full cycle row, with
/// between one and three ones.
inline SetConfig unlift(const BitConfig& x, const ProductBall& ball)
{
    const std::uint32_t n = ball.cycle_length();
    if (x.size() % n != 0) {
        throw parameter_error("unlift: configuration does not consist of whole cycle rows");
    }
    SetConfig out;
    for (std::size_t row = 0; row < x.size() / n; ++row) {
        const VertexId t = ball.tree_part(x.domain[row * n]);
        LabelSet s;
        for (std::uint32_t c = 0; c < n; ++c) {
            const VertexId v = x.domain[row * n + c];
            if (ball.tree_part(v) != t || ball.cycle_part(v) != c) {
                throw parameter_error("unlift: row for tree vertex " + std::to_string(t) + " is incomplete");
            }
            if (x.labels[row * n + c]) {
                s.insert(c);
            }
        }
        if (s.empty()) {
            throw parameter_error("unlift: row for tree vertex " + std::to_string(t) + " has no ones");
        }
        out.domain.push_back(t);
        out.labels.push_back(s);
    }
    return out;
}

/// Read-only view of lift(Z) that answers single bits without materialising
/// the product configuration.
class LiftedView {
  public:
    LiftedView(const SetConfig& z, std::uint32_t n) : z_(&z), n_(n) {}

    Bit at(VertexId tree_vertex, std::uint32_t cycle) const { return z_->at(tree_vertex).contains(cycle % n_) ? 1 : 0; }
    std::uint32_t cycle_length() const noexcept { return n_; }
    const SetConfig& sets() const noexcept { return *z_; }

  private:
    const SetConfig* z_;
    std::uint32_t n_;
};

} // namespace mtlab
