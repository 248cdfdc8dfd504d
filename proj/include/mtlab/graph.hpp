#pragma once

// Finite truncations of T3 (the Cayley graph of Z2 * Z2 * Z2 with generators
// a, b, c) and of the product T3 x C_n.
//
// Vertices of the tree are reduced words over {a, b, c}; the empty word is the
// origin. We use the right Cayley graph: w ~ w.s, so the parent of a word is the
// word with its last letter removed, and left multiplication is an automorphism.

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "errors.hpp"

namespace mtlab {

using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;

inline constexpr std::array<char, 3> kGenerators{'a', 'b', 'c'};

constexpr bool is_generator(char g) noexcept { return g == 'a' || g == 'b' || g == 'c'; }

/// a -> b -> c -> a
constexpr char next_generator(char g) noexcept { return g == 'a' ? 'b' : (g == 'b' ? 'c' : 'a'); }

struct VertexWord {
    std::string letters;

    VertexWord() = default;

    /// Validates that `s` is a reduced word over {a, b, c}.
    explicit VertexWord(std::string s) : letters(std::move(s))
    {
        for (std::size_t i = 0; i < letters.size(); ++i) {
            if (!is_generator(letters[i])) {
                throw parameter_error("vertex word '" + letters + "' has a letter outside {a,b,c}");
            }
            if (i + 1 < letters.size() && letters[i] == letters[i + 1]) {
                throw parameter_error("vertex word '" + letters + "' is not reduced");
            }
        }
    }

    static VertexWord origin() { return VertexWord{}; }

    std::size_t length() const noexcept { return letters.size(); }
    bool is_origin() const noexcept { return letters.empty(); }
    char last() const noexcept { return letters.empty() ? '\0' : letters.back(); }

    friend auto operator<=>(const VertexWord&, const VertexWord&) = default;
};

/// Left multiplication g.w reduced; an involution for each generator.
inline VertexWord left_multiply(char g, const VertexWord& w)
{
    if (!is_generator(g)) {
        throw parameter_error(std::string("unknown generator '") + g + "'");
    }
    VertexWord out;
    if (!w.letters.empty() && w.letters.front() == g) {
        out.letters = w.letters.substr(1);
    } else {
        out.letters.reserve(w.letters.size() + 1);
        out.letters.push_back(g);
        out.letters += w.letters;
    }
    return out;
}

/// Left multiplication by an arbitrary group element given as a word.
inline VertexWord left_multiply(const VertexWord& g, const VertexWord& w)
{
    VertexWord out = w;
    for (auto it = g.letters.rbegin(); it != g.letters.rend(); ++it) {
        out = left_multiply(*it, out);
    }
    return out;
}

/// Graph distance in the tree: length of the reduced word u^{-1} v.
inline std::size_t tree_distance(const VertexWord& u, const VertexWord& v) noexcept
{
    std::size_t common = 0;
    while (common < u.length() && common < v.length() && u.letters[common] == v.letters[common]) {
        ++common;
    }
    return (u.length() - common) + (v.length() - common);
}

struct ProductVertex {
    VertexWord tree;
    std::uint32_t cycle = 0;
    std::uint32_t n = 3;

    friend auto operator<=>(const ProductVertex&, const ProductVertex&) = default;
};

struct Generator {
    char letter = 'a';
};

struct Rotation {
    std::int64_t steps = 0;
};

/// A group element acting by left multiplication: a tree generator or a cycle rotation.
using Shift = std::variant<Generator, Rotation>;

inline VertexWord apply_shift(const VertexWord& v, char g) { return left_multiply(g, v); }

inline VertexWord apply_shift(const VertexWord& v, const Shift& s)
{
    if (const auto* g = std::get_if<Generator>(&s)) {
        return left_multiply(g->letter, v);
    }
    throw parameter_error("a cycle rotation does not act on pure tree vertices");
}

inline ProductVertex apply_shift(const ProductVertex& v, const Shift& s)
{
    if (const auto* g = std::get_if<Generator>(&s)) {
        return ProductVertex{left_multiply(g->letter, v.tree), v.cycle, v.n};
    }
    const auto k = std::get<Rotation>(s).steps;
    const auto n = static_cast<std::int64_t>(v.n);
    const std::int64_t c = ((static_cast<std::int64_t>(v.cycle) + k) % n + n) % n;
    return ProductVertex{v.tree, static_cast<std::uint32_t>(c), v.n};
}

inline std::string shift_name(const Shift& s)
{
    if (const auto* g = std::get_if<Generator>(&s)) {
        return std::string(1, g->letter);
    }
    return "rot" + std::to_string(std::get<Rotation>(s).steps);
}

/// A fixed end of T3, represented by the eventually alternating ray
/// d d' d d' ... with d' = next_generator(d).
struct EndDirection {
    char letter = 'a';

    char ray_letter(std::size_t i) const noexcept { return i % 2 == 0 ? letter : next_generator(letter); }
};

/// First vertex on the reduced path from v toward the end.
inline VertexWord end_step(const VertexWord& v, EndDirection xi)
{
    if (!is_generator(xi.letter)) {
        throw parameter_error("end direction must be a generator letter");
    }
    std::size_t i = 0;
    while (i < v.length() && v.letters[i] == xi.ray_letter(i)) {
        ++i;
    }
    VertexWord out = v;
    if (i == v.length()) {
        out.letters.push_back(xi.ray_letter(i));
    } else {
        out.letters.pop_back();
    }
    return out;
}

struct Edge {
    VertexId parent = 0;
    VertexId child = 0;
};

inline constexpr std::size_t kDefaultMaxVertices = std::size_t{1} << 22;

inline std::size_t tree_ball_size(unsigned radius) noexcept
{
    return 1 + 3 * ((std::size_t{1} << radius) - 1);
}

/// All reduced words of length <= R, in lexicographic order (a < b < c).
///
/// Lexicographic order coincides with depth-first preorder, so the origin is
/// vertex 0 and every other vertex i is the child end of edge i - 1; edges are
/// therefore ordered by their child word.
class TreeBall {
  public:
    explicit TreeBall(unsigned radius, std::size_t max_vertices = kDefaultMaxVertices) : radius_(radius)
    {
        if (radius >= 40 || tree_ball_size(radius) > max_vertices) {
            throw capacity_error("tree ball of radius " + std::to_string(radius) + " exceeds the vertex cap of " +
                                 std::to_string(max_vertices));
        }
        const std::size_t count = tree_ball_size(radius);
        words_.reserve(count);
        parent_.reserve(count);
        neighbors_.reserve(count);
        grow(VertexWord{}, kNone);
    }

    unsigned radius() const noexcept { return radius_; }
    std::size_t vertex_count() const noexcept { return words_.size(); }
    std::size_t edge_count() const noexcept { return words_.size() - 1; }

    const VertexWord& word(VertexId v) const { return words_.at(v); }
    std::size_t depth(VertexId v) const { return words_.at(v).length(); }

    Edge edge(EdgeId e) const
    {
        if (e >= edge_count()) {
            throw parameter_error("edge id out of range");
        }
        return Edge{parent_[e + 1], e + 1};
    }

    std::optional<VertexId> find(const VertexWord& w) const
    {
        if (w.length() > radius_) {
            return std::nullopt;
        }
        auto it = std::lower_bound(words_.begin(), words_.end(), w);
        if (it == words_.end() || *it != w) {
            return std::nullopt;
        }
        return static_cast<VertexId>(it - words_.begin());
    }

    VertexId index_of(const VertexWord& w) const
    {
        if (auto id = find(w)) {
            return *id;
        }
        throw interiority_error("vertex '" + w.letters + "' lies outside the radius-" + std::to_string(radius_) +
                                " ball");
    }

    /// Vertex whose whole radius-k neighbourhood lies in the ball.
    bool is_interior(VertexId v, unsigned k) const { return depth(v) + k <= radius_; }

    void require_interior(VertexId v, unsigned k) const
    {
        if (!is_interior(v, k)) {
            throw interiority_error("vertex '" + word(v).letters + "' is not interior at radius " +
                                    std::to_string(k) + " in a radius-" + std::to_string(radius_) + " ball");
        }
    }

    /// Vertices of depth <= R - k, in vertex order.
    std::vector<VertexId> interior_vertices(unsigned k) const
    {
        std::vector<VertexId> out;
        for (VertexId v = 0; v < vertex_count(); ++v) {
            if (is_interior(v, k)) {
                out.push_back(v);
            }
        }
        return out;
    }

    std::span<const VertexId> neighbors(VertexId v) const { return neighbors_.at(v); }

    bool adjacent(VertexId u, VertexId v) const
    {
        const auto n = neighbors(u);
        return std::find(n.begin(), n.end(), v) != n.end();
    }

    /// Edge joining two adjacent vertices.
    EdgeId edge_between(VertexId u, VertexId v) const
    {
        if (u != 0 && parent_[u] == v) {
            return u - 1;
        }
        if (v != 0 && parent_[v] == u) {
            return v - 1;
        }
        throw parameter_error("vertices '" + word(u).letters + "' and '" + word(v).letters + "' are not adjacent");
    }

    std::vector<EdgeId> incident_edges(VertexId v) const
    {
        std::vector<EdgeId> out;
        for (const VertexId u : neighbors(v)) {
            out.push_back(edge_between(v, u));
        }
        std::sort(out.begin(), out.end());
        return out;
    }

  private:
    static constexpr VertexId kNone = ~VertexId{0};

    void grow(const VertexWord& w, VertexId parent)
    {
        const auto id = static_cast<VertexId>(words_.size());
        words_.push_back(w);
        parent_.push_back(parent);
        neighbors_.emplace_back();
        if (parent != kNone) {
            neighbors_[id].push_back(parent);
            neighbors_[parent].push_back(id);
        }
        if (w.length() == radius_) {
            return;
        }
        for (const char g : kGenerators) {
            if (g == w.last()) {
                continue;
            }
            VertexWord child = w;
            child.letters.push_back(g);
            grow(child, id);
        }
    }

    unsigned radius_;
    std::vector<VertexWord> words_;
    std::vector<VertexId> parent_;
    std::vector<std::vector<VertexId>> neighbors_;
};

inline TreeBall build_tree_ball(unsigned radius, std::size_t max_vertices = kDefaultMaxVertices)
{
    return TreeBall(radius, max_vertices);
}

/// The 3 edges at v. Requires v interior at radius 1.
inline std::array<EdgeId, 3> j_set(VertexId v, const TreeBall& ball)
{
    ball.require_interior(v, 1);
    const auto edges = ball.incident_edges(v);
    return {edges[0], edges[1], edges[2]};
}

/// Edge from v toward the end.
inline EdgeId edge_toward_end(VertexId v, EndDirection xi, const TreeBall& ball)
{
    ball.require_interior(v, 1);
    const VertexId next = ball.index_of(end_step(ball.word(v), xi));
    return ball.edge_between(v, next);
}

/// J(v) minus the edge toward the end: the two edges leading away from xi.
inline std::array<EdgeId, 2> j_xi_set(VertexId v, EndDirection xi, const TreeBall& ball)
{
    const auto all = j_set(v, ball);
    const EdgeId skip = edge_toward_end(v, xi, ball);
    std::array<EdgeId, 2> out{};
    std::size_t k = 0;
    for (const EdgeId e : all) {
        if (e != skip) {
            out[k++] = e;
        }
    }
    return out;
}

inline constexpr std::size_t kMaxProductVertices = std::size_t{1} << 26;

/// Truncation of T3 x C_n: the radius-R tree ball times the full cycle.
///
/// Vertex ids are tree_id * n + cycle, which is lexicographic on (word, cycle).
class ProductBall {
  public:
    ProductBall(unsigned radius, std::uint32_t n, std::size_t max_vertices = kMaxProductVertices)
        : tree_(check_args(radius, n, max_vertices)), n_(n)
    {
    }

    const TreeBall& tree() const noexcept { return tree_; }
    std::uint32_t cycle_length() const noexcept { return n_; }
    unsigned radius() const noexcept { return tree_.radius(); }

    std::size_t vertex_count() const noexcept { return tree_.vertex_count() * n_; }
    std::size_t edge_count() const noexcept
    {
        return tree_.vertex_count() * n_ + tree_.edge_count() * n_;
    }

    VertexId id(VertexId tree_vertex, std::uint32_t cycle) const noexcept { return tree_vertex * n_ + cycle; }
    VertexId tree_part(VertexId v) const noexcept { return v / n_; }
    std::uint32_t cycle_part(VertexId v) const noexcept { return v % n_; }

    ProductVertex vertex(VertexId v) const { return ProductVertex{tree_.word(tree_part(v)), cycle_part(v), n_}; }

    std::optional<VertexId> find(const ProductVertex& pv) const
    {
        if (pv.n != n_ || pv.cycle >= n_) {
            return std::nullopt;
        }
        if (auto t = tree_.find(pv.tree)) {
            return id(*t, pv.cycle);
        }
        return std::nullopt;
    }

    std::vector<VertexId> neighbors(VertexId v) const
    {
        const VertexId t = tree_part(v);
        const std::uint32_t c = cycle_part(v);
        std::vector<VertexId> out;
        for (const VertexId u : tree_.neighbors(t)) {
            out.push_back(id(u, c));
        }
        out.push_back(id(t, (c + 1) % n_));
        out.push_back(id(t, (c + n_ - 1) % n_));
        std::sort(out.begin(), out.end());
        return out;
    }

    bool adjacent(VertexId u, VertexId v) const
    {
        const VertexId tu = tree_part(u), tv = tree_part(v);
        const std::uint32_t cu = cycle_part(u), cv = cycle_part(v);
        if (tu == tv) {
            return (cu + 1) % n_ == cv || (cv + 1) % n_ == cu;
        }
        return cu == cv && tree_.adjacent(tu, tv);
    }

    /// Every edge once as (smaller id, larger id), sorted.
    std::vector<std::pair<VertexId, VertexId>> edges() const
    {
        std::vector<std::pair<VertexId, VertexId>> out;
        out.reserve(edge_count());
        for (VertexId v = 0; v < vertex_count(); ++v) {
            for (const VertexId u : neighbors(v)) {
                if (v < u) {
                    out.emplace_back(v, u);
                }
            }
        }
        return out;
    }

  private:
    static unsigned check_args(unsigned radius, std::uint32_t n, std::size_t max_vertices)
    {
        if (n < 3) {
            throw invalid_cycle_error("cycle length must be at least 3, got " + std::to_string(n));
        }
        if (radius >= 40 || tree_ball_size(radius) * n > max_vertices) {
            throw capacity_error("product ball exceeds the vertex cap of " + std::to_string(max_vertices));
        }
        return radius;
    }

    TreeBall tree_;
    std::uint32_t n_;
};

inline ProductBall build_product_ball(unsigned radius, std::uint32_t n) { return ProductBall(radius, n); }

} // namespace mtlab
