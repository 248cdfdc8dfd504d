#pragma once

// Exact arithmetic and exhaustive enumeration used as ground truth for the
// Monte Carlo side: birthday-type products, the threshold on n, the exact law
// of X-hat and X^xi on small subtrees and of |Y_S(v)|.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "errors.hpp"
#include "graph.hpp"

namespace mtlab {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline const Rational kFiveSixths{5, 6};
inline const Rational kTwoThirds{2, 3};

inline constexpr std::uint32_t kMaxOracleN = 1'000'000;

/// Probability that m i.i.d. uniform picks from n values are all distinct:
/// prod_{i=1}^{m-1} (1 - i/n). Zero when m > n.
inline Rational distinct_product(std::uint32_t m, std::uint32_t n)
{
    if (m < 1 || n < 1) {
        throw parameter_error("distinct_product needs m >= 1 and n >= 1");
    }
    if (n > kMaxOracleN) {
        throw capacity_error("distinct_product supports n up to " + std::to_string(kMaxOracleN));
    }
    if (m > n) {
        return Rational{0};
    }
    BigInt num = 1;
    BigInt den = 1;
    for (std::uint32_t i = 1; i < m; ++i) {
        num *= (n - i);
        den *= n;
    }
    return Rational(num, den);
}

inline constexpr std::uint32_t kPicksE2 = 20; // two picks at each of the ten vertices within distance 2
inline constexpr std::uint32_t kLabelsE1 = 9; // edge labels feeding the neighbours' upper sets

/// Smallest n <= max_n with distinct_product(20, n) >= 5/6; the product is
/// increasing in n so a forward scan is exact.
inline std::optional<std::uint32_t> threshold_n(std::uint32_t max_n = 1050)
{
    if (max_n < 1) {
        throw parameter_error("threshold_n needs max_n >= 1");
    }
    for (std::uint32_t n = kPicksE2; n <= max_n; ++n) {
        if (distinct_product(kPicksE2, n) >= kFiveSixths) {
            return n;
        }
    }
    return std::nullopt;
}

struct ThresholdCertificate {
    std::uint32_t n = 0;
    Rational p_distinct_20;
    Rational p_distinct_9;
    Rational union_bound_pe;
    bool meets_five_sixths = false; // p_distinct_20 >= 5/6
};

inline ThresholdCertificate prob_E_bounds(std::uint32_t n)
{
    ThresholdCertificate c;
    c.n = n;
    c.p_distinct_20 = distinct_product(kPicksE2, n);
    c.p_distinct_9 = distinct_product(kLabelsE1, n);
    c.union_bound_pe = std::max(Rational{0}, Rational(c.p_distinct_20 + c.p_distinct_9 - 1));
    c.meets_five_sixths = c.p_distinct_20 >= kFiveSixths;
    return c;
}

inline std::string to_fraction_string(const Rational& r)
{
    return boost::multiprecision::numerator(r).str() + "/" + boost::multiprecision::denominator(r).str();
}

/// Display-only rendering with `digits` decimals (rounded half up).
inline std::string to_decimal_string(const Rational& r, int digits)
{
    BigInt scale = 1;
    for (int i = 0; i < digits; ++i) {
        scale *= 10;
    }
    const BigInt num = boost::multiprecision::numerator(r);
    const BigInt den = boost::multiprecision::denominator(r);
    const bool negative = num < 0;
    const BigInt a = negative ? BigInt(-num) : num;
    const BigInt scaled = (a * scale * 2 + den) / (den * 2);
    const BigInt whole = scaled / scale;
    std::string out = (negative ? "-" : "") + whole.str();
    if (digits > 0) {
        std::string frac = BigInt(scaled % scale).str();
        frac.insert(0, static_cast<std::size_t>(digits) - frac.size(), '0');
        out += "." + frac;
    }
    return out;
}

inline constexpr std::size_t kMaxEnumerationEdges = 20;

namespace detail {

/// Sums over every fair-bit assignment of the union of the vertices' edge
/// sets. bit(v) = rule(bits on edges(v)); counts assignments where the bit is
/// 1 on `ones` and 0 on `zeros`.
template <std::size_t K, class EdgesOf, class Rule>
Rational enumerate_local(const TreeBall& ball, const std::vector<VertexId>& ones, const std::vector<VertexId>& zeros,
                         EdgesOf&& edges_of, Rule&& rule)
{
    std::vector<VertexId> query = ones;
    query.insert(query.end(), zeros.begin(), zeros.end());
    if (query.empty()) {
        return Rational{1};
    }
    {
        auto sorted = query;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw parameter_error("enumerate: query vertices must be distinct");
        }
    }
    std::vector<EdgeId> edges;
    std::vector<std::array<EdgeId, K>> incident;
    for (const VertexId v : query) {
        ball.require_interior(v, 1);
        const std::array<EdgeId, K> e = edges_of(v);
        incident.push_back(e);
        edges.insert(edges.end(), e.begin(), e.end());
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    if (edges.size() > kMaxEnumerationEdges) {
        throw capacity_error("enumerate: " + std::to_string(edges.size()) + " edges exceed the cap of " +
                             std::to_string(kMaxEnumerationEdges));
    }
    std::vector<std::array<unsigned, K>> pos;
    for (const auto& inc : incident) {
        std::array<unsigned, K> p{};
        for (std::size_t k = 0; k < K; ++k) {
            p[k] = static_cast<unsigned>(std::lower_bound(edges.begin(), edges.end(), inc[k]) - edges.begin());
        }
        pos.push_back(p);
    }
    const std::uint64_t total = std::uint64_t{1} << edges.size();
    std::uint64_t hits = 0;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        bool ok = true;
        for (std::size_t q = 0; q < query.size() && ok; ++q) {
            std::array<unsigned, K> bits{};
            for (std::size_t k = 0; k < K; ++k) {
                bits[k] = static_cast<unsigned>((mask >> pos[q][k]) & 1u);
            }
            ok = (q < ones.size()) == rule(bits);
        }
        hits += ok ? 1 : 0;
    }
    return Rational(BigInt(hits), BigInt(total));
}

} // namespace detail

/// Exact P(X-hat = 1 on `ones`, 0 on `zeros`) by summing over every fair-bit
/// assignment of the edges incident to the query vertices.
inline Rational enumerate_x_hat(const TreeBall& ball, const std::vector<VertexId>& ones,
                                const std::vector<VertexId>& zeros)
{
    return detail::enumerate_local<3>(
        ball, ones, zeros,
        [&](VertexId v) {
            const auto e = ball.incident_edges(v);
            return std::array<EdgeId, 3>{e[0], e[1], e[2]};
        },
        [](const std::array<unsigned, 3>& b) { return !(b[0] == b[1] && b[1] == b[2]); });
}

/// Exact P(X^xi = 1 on `ones`, 0 on `zeros`), same method over J^xi.
inline Rational enumerate_x_xi(const TreeBall& ball, EndDirection xi, const std::vector<VertexId>& ones,
                               const std::vector<VertexId>& zeros)
{
    return detail::enumerate_local<2>(
        ball, ones, zeros, [&](VertexId v) { return j_xi_set(v, xi, ball); },
        [](const std::array<unsigned, 2>& b) { return (b[0] | b[1]) != 0; });
}

/// Exact law of |Y_S(v)| in {1, 2, 3} by enumerating all n^3 label triples.
inline std::array<Rational, 3> enumerate_y_law(std::uint32_t n)
{
    if (n < 1 || n > 6) {
        throw capacity_error("enumerate_y_law supports 1 <= n <= 6");
    }
    std::array<std::uint64_t, 3> counts{};
    for (std::uint32_t x = 0; x < n; ++x) {
        for (std::uint32_t y = 0; y < n; ++y) {
            for (std::uint32_t z = 0; z < n; ++z) {
                const std::size_t distinct = 1 + (y != x) + (z != x && z != y);
                ++counts[distinct - 1];
            }
        }
    }
    const BigInt total = BigInt(n) * n * n;
    return {Rational(BigInt(counts[0]), total), Rational(BigInt(counts[1]), total),
            Rational(BigInt(counts[2]), total)};
}

} // namespace mtlab
