#pragma once

// Labelled configurations on a ball: bits, small label sets, and the
// line-oriented text dump.

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "graph.hpp"

namespace mtlab {

using Bit = std::uint8_t;

/// A subset of S = {0, ..., n-1} with at most three elements, kept sorted.
class LabelSet {
  public:
    static constexpr std::size_t kCapacity = 3;

    LabelSet() = default;
    LabelSet(std::initializer_list<std::uint32_t> values)
    {
        for (const auto v : values) {
            insert(v);
        }
    }

    void insert(std::uint32_t value)
    {
        auto* end = values_.data() + size_;
        auto* pos = std::lower_bound(values_.data(), end, value);
        if (pos != end && *pos == value) {
            return;
        }
        if (size_ == kCapacity) {
            throw capacity_error("label set already holds " + std::to_string(kCapacity) + " elements");
        }
        std::move_backward(pos, end, end + 1);
        *pos = value;
        ++size_;
    }

    std::size_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }
    const std::uint32_t* begin() const noexcept { return values_.data(); }
    const std::uint32_t* end() const noexcept { return values_.data() + size_; }
    std::uint32_t operator[](std::size_t i) const noexcept { return values_[i]; }

    bool contains(std::uint32_t value) const noexcept { return std::binary_search(begin(), end(), value); }

    bool subset_of(const LabelSet& other) const noexcept
    {
        return std::includes(other.begin(), other.end(), begin(), end());
    }

    std::size_t intersection_size(const LabelSet& other) const noexcept
    {
        std::size_t k = 0;
        for (const auto v : *this) {
            k += other.contains(v) ? 1 : 0;
        }
        return k;
    }

    bool intersects(const LabelSet& other) const noexcept { return intersection_size(other) > 0; }

    friend bool operator==(const LabelSet& a, const LabelSet& b) noexcept
    {
        return a.size_ == b.size_ && std::equal(a.begin(), a.end(), b.begin());
    }

    friend std::strong_ordering operator<=>(const LabelSet& a, const LabelSet& b) noexcept
    {
        return std::lexicographical_compare_three_way(a.begin(), a.end(), b.begin(), b.end());
    }

  private:
    std::array<std::uint32_t, kCapacity> values_{};
    std::uint8_t size_ = 0;
};

inline bool label_leq(Bit a, Bit b) noexcept { return a <= b; }
inline bool label_leq(const LabelSet& a, const LabelSet& b) noexcept { return a.subset_of(b); }

inline std::string format_label(Bit b) { return b ? "1" : "0"; }

/// Sorted, semicolon separated.
inline std::string format_label(const LabelSet& s)
{
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) {
            out += ';';
        }
        out += std::to_string(s[i]);
    }
    return out;
}

/// Labels on an ascending list of vertex ids of some ball.
template <class Label>
struct Configuration {
    std::vector<VertexId> domain;
    std::vector<Label> labels;

    std::size_t size() const noexcept { return domain.size(); }

    std::optional<std::size_t> position(VertexId v) const noexcept
    {
        auto it = std::lower_bound(domain.begin(), domain.end(), v);
        if (it == domain.end() || *it != v) {
            return std::nullopt;
        }
        return static_cast<std::size_t>(it - domain.begin());
    }

    bool contains(VertexId v) const noexcept { return position(v).has_value(); }

    const Label& at(VertexId v) const
    {
        if (auto p = position(v)) {
            return labels[*p];
        }
        throw interiority_error("vertex " + std::to_string(v) + " is outside the configuration domain");
    }

    friend bool operator==(const Configuration&, const Configuration&) = default;
};

using BitConfig = Configuration<Bit>;
using SetConfig = Configuration<LabelSet>;

/// Configuration over the interior-1 vertices of a tree ball, filled by f(v).
template <class Label, class F>
Configuration<Label> build_on_interior(const TreeBall& ball, F&& f)
{
    Configuration<Label> out;
    out.domain = ball.interior_vertices(1);
    out.labels.reserve(out.domain.size());
    for (const VertexId v : out.domain) {
        out.labels.push_back(f(v));
    }
    return out;
}

/// One dump line: `<word>,<cycle>,<label>`; cycle empty for tree vertices.
inline std::string dump_line(const VertexWord& w, std::optional<std::uint32_t> cycle, const std::string& label)
{
    std::string out = w.letters;
    out += ',';
    if (cycle) {
        out += std::to_string(*cycle);
    }
    out += ',';
    out += label;
    return out;
}

template <class Label>
std::string dump_configuration(const Configuration<Label>& cfg, const TreeBall& ball)
{
    std::string out;
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        out += dump_line(ball.word(cfg.domain[i]), std::nullopt, format_label(cfg.labels[i]));
        out += '\n';
    }
    return out;
}

inline std::string dump_configuration(const BitConfig& cfg, const ProductBall& ball)
{
    std::string out;
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        const VertexId v = cfg.domain[i];
        out += dump_line(ball.tree().word(ball.tree_part(v)), ball.cycle_part(v), format_label(cfg.labels[i]));
        out += '\n';
    }
    return out;
}

} // namespace mtlab
