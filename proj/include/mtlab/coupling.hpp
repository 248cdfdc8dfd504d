#pragma once

// Coupling constructors and the three checks that give "coupling",
// "monotone" and "invariant" an operational meaning.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "rng.hpp"
#include "sampler.hpp"
#include "stats.hpp"

namespace mtlab {

enum class CouplingKind { EndBits, PeresBits, EndSets, LiftedBits, IndependentSets };

inline constexpr std::array<CouplingKind, 5> kAllKinds{CouplingKind::EndBits, CouplingKind::PeresBits,
                                                       CouplingKind::EndSets, CouplingKind::LiftedBits,
                                                       CouplingKind::IndependentSets};

struct KindTraits {
    std::string_view name;
    std::string_view lower_law;
    std::string_view upper_law;
    bool monotone_claimed;
    bool needs_n;
    bool needs_end;
    bool set_valued; // sampled as label sets on the tree (LiftedBits: before lifting)
};

inline const KindTraits& traits(CouplingKind kind)
{
    static const std::array<KindTraits, 5> table{{
        {"EndBits", "Bernoulli(V,3/4)", "Y^xi: max of 3 fair bits", true, false, true, false},
        {"PeresBits", "Bernoulli(V,3/4)", "Y^xi: max of 3 fair bits", true, false, false, false},
        {"EndSets", "i.i.d. nu", "Y_S: labels on J(v)", true, true, true, true},
        {"LiftedBits", "lift(i.i.d. nu)", "lift(Y_S)", true, true, true, true},
        {"IndependentSets", "i.i.d. nu", "Y_S (independent of the lower)", false, true, false, true},
    }};
    return table[static_cast<std::size_t>(kind)];
}

inline std::string_view kind_name(CouplingKind kind) { return traits(kind).name; }

inline std::optional<CouplingKind> parse_kind(std::string_view name)
{
    for (const auto k : kAllKinds) {
        if (traits(k).name == name) {
            return k;
        }
    }
    return std::nullopt;
}

template <class Label>
struct CouplingSample {
    Configuration<Label> lower;
    Configuration<Label> upper;
    std::vector<std::string> provenance;
};

using BitSample = CouplingSample<Bit>;
using SetSample = CouplingSample<LabelSet>;

struct CouplingParams {
    std::optional<std::uint32_t> n;
    std::optional<EndDirection> xi;
};

/// Owns the balls for one coupling kind and draws replicates from them.
///
/// Components of a replicate are built from streams named "eta", "lambda" and
/// (IndependentSets only) "x", so two kinds fed the same (seed, replicate)
/// see the same randomness record.
class CouplingModel {
  public:
    CouplingModel(CouplingKind kind, unsigned radius, CouplingParams params) : kind_(kind), params_(params)
    {
        const auto& t = traits(kind);
        if (t.needs_n && !params.n) {
            throw parameter_error(std::string(t.name) + " needs the label count n");
        }
        if (t.needs_end && !params.xi) {
            throw parameter_error(std::string(t.name) + " needs an end direction");
        }
        if (params.n) {
            require_label_count(*params.n);
        }
        tree_ = std::make_shared<const TreeBall>(radius);
        geo_ = std::make_shared<const LocalGeometry>(*tree_, params.xi.value_or(EndDirection{}));
        if (kind == CouplingKind::LiftedBits) {
            product_ = std::make_shared<const ProductBall>(radius, *params.n);
        }
    }

    CouplingKind kind() const noexcept { return kind_; }
    const KindTraits& kind_traits() const { return traits(kind_); }
    const TreeBall& tree() const noexcept { return *tree_; }
    const LocalGeometry& geometry() const noexcept { return *geo_; }
    std::uint32_t n() const { return params_.n.value_or(0); }
    const CouplingParams& params() const noexcept { return params_; }

    const ProductBall& product() const
    {
        if (!product_) {
            throw parameter_error("only LiftedBits carries a product ball");
        }
        return *product_;
    }

    bool is_bit_kind() const noexcept { return kind_ == CouplingKind::EndBits || kind_ == CouplingKind::PeresBits; }

    /// EndBits / PeresBits on the tree, or LiftedBits materialised on T3 x C_n.
    BitSample sample_bits(const ReplicateContext& ctx) const
    {
        switch (kind_) {
        case CouplingKind::EndBits:
        case CouplingKind::PeresBits: {
            Stream rng = ctx.stream("eta");
            const EdgeBits eta = sample_bernoulli_edges(*tree_, 0.5, rng);
            BitSample out;
            out.lower = kind_ == CouplingKind::EndBits ? x_xi(eta, *geo_) : x_hat(eta, *geo_);
            out.upper = y_xi(eta, *geo_);
            out.provenance = {"eta"};
            return out;
        }
        case CouplingKind::LiftedBits: {
            const SetSample sets = sample_sets(ctx);
            return BitSample{lift(sets.lower, *product_), lift(sets.upper, *product_), sets.provenance};
        }
        default:
            throw parameter_error(std::string(kind_name(kind_)) + " is set-valued");
        }
    }

    /// EndSets / IndependentSets, or the label sets LiftedBits lifts.
    SetSample sample_sets(const ReplicateContext& ctx) const
    {
        switch (kind_) {
        case CouplingKind::EndSets:
        case CouplingKind::LiftedBits: {
            Stream rng = ctx.stream("lambda");
            const EdgeLabels lambda = sample_lambda(*tree_, *params_.n, rng);
            return SetSample{x_prime_xi(lambda, *geo_), y_s(lambda, *geo_), {"lambda"}};
        }
        case CouplingKind::IndependentSets: {
            Stream xr = ctx.stream("x");
            Stream lr = ctx.stream("lambda");
            SetConfig lower = sample_x_s_iid(*tree_, *params_.n, xr);
            const EdgeLabels lambda = sample_lambda(*tree_, *params_.n, lr);
            return SetSample{std::move(lower), y_s(lambda, *geo_), {"x", "lambda"}};
        }
        default:
            throw parameter_error(std::string(kind_name(kind_)) + " is bit-valued");
        }
    }

  private:
    CouplingKind kind_;
    CouplingParams params_;
    std::shared_ptr<const TreeBall> tree_;
    std::shared_ptr<const LocalGeometry> geo_;
    std::shared_ptr<const ProductBall> product_;
};

using AnySample = std::variant<BitSample, SetSample>;

/// One replicate of the given kind. LiftedBits yields the materialised
/// product-graph bits.
inline AnySample make_coupling(const CouplingModel& model, const ReplicateContext& ctx)
{
    if (model.is_bit_kind() || model.kind() == CouplingKind::LiftedBits) {
        return model.sample_bits(ctx);
    }
    return model.sample_sets(ctx);
}

struct MonotoneCheck {
    bool monotone = true;
    std::optional<VertexId> first_violation;
};

/// lower <= upper at every vertex; reports the smallest violating vertex.
template <class Label>
MonotoneCheck check_monotone(const CouplingSample<Label>& cs)
{
    if (cs.lower.domain != cs.upper.domain) {
        throw parameter_error("coupling components have different domains");
    }
    for (std::size_t i = 0; i < cs.lower.size(); ++i) {
        if (!label_leq(cs.lower.labels[i], cs.upper.labels[i])) {
            return MonotoneCheck{false, cs.lower.domain[i]};
        }
    }
    return {};
}

inline MonotoneCheck check_monotone(const AnySample& s)
{
    return std::visit([](const auto& cs) { return check_monotone(cs); }, s);
}

// ---------------------------------------------------------------------------
// Marginal laws

enum class Side { Lower, Upper };

inline std::string_view side_name(Side s) { return s == Side::Lower ? "lower" : "upper"; }

struct CategoricalLaw {
    std::string name;
    std::vector<double> probabilities;
};

inline CategoricalLaw bernoulli_law(double p, std::string name = {})
{
    if (name.empty()) {
        name = "Bernoulli(" + std::to_string(p) + ")";
    }
    return CategoricalLaw{std::move(name), {1.0 - p, p}};
}

/// Draws the category of one replicate.
using CategoryDraw = std::function<std::size_t(const ReplicateContext&)>;

/// Chi-square test that a replicate statistic follows `law`.
inline TestResult check_marginal(const CategoryDraw& draw, const CategoricalLaw& law, std::uint64_t replicates,
                                 std::uint64_t seed, double alpha = kDefaultAlpha, unsigned workers = 0)
{
    for (const double p : law.probabilities) {
        if (p * static_cast<double>(replicates) < 5.0) {
            throw test_power_error("law " + law.name + ": " + std::to_string(replicates) +
                                   " replicates leave an expected cell count below 5");
        }
    }
    const std::size_t cells = law.probabilities.size();
    auto counts = run_replicated(
        replicates, seed, std::vector<std::uint64_t>(cells, 0),
        [&](const ReplicateContext& ctx) {
            const std::size_t c = draw(ctx);
            if (c >= cells) {
                throw parameter_error("category " + std::to_string(c) + " outside law " + law.name);
            }
            return c;
        },
        [](std::vector<std::uint64_t>& acc, std::size_t c) { ++acc[c]; },
        [](std::vector<std::uint64_t>& acc, const std::vector<std::uint64_t>& other) {
            for (std::size_t i = 0; i < acc.size(); ++i) {
                acc[i] += other[i];
            }
        },
        workers);
    return chi_square_gof(counts, law.probabilities, alpha);
}

/// A named marginal check: which component, which statistic, which law.
struct MarginalSpec {
    std::string name;
    Side side;
    CategoricalLaw law;
    CategoryDraw draw;
};

inline const Configuration<Bit>& component(const BitSample& s, Side side) { return side == Side::Lower ? s.lower : s.upper; }
inline const Configuration<LabelSet>& component(const SetSample& s, Side side)
{
    return side == Side::Lower ? s.lower : s.upper;
}

/// The marginal checks `verify` runs for a kind: the single-site law at the
/// origin for both components and, for bit kinds, the joint law at the edge
/// {o, a}. Set laws are coarsened to "full size or not" so that expected
/// counts stay testable at large n.
inline std::vector<MarginalSpec> default_marginals(const CouplingModel& model)
{
    std::vector<MarginalSpec> out;
    const TreeBall& tree = model.tree();
    const VertexId o = 0;
    const VertexId a = tree.index_of(VertexWord("a"));
    const double n = model.n();
    switch (model.kind()) {
    case CouplingKind::EndBits:
    case CouplingKind::PeresBits: {
        auto at = [&model](Side side, VertexId v) {
            return [&model, side, v](const ReplicateContext& ctx) {
                return static_cast<std::size_t>(component(model.sample_bits(ctx), side).at(v));
            };
        };
        auto pair = [&model, o, a](Side side) {
            return [&model, side, o, a](const ReplicateContext& ctx) {
                const BitSample s = model.sample_bits(ctx);
                return static_cast<std::size_t>(2 * component(s, side).at(o) + component(s, side).at(a));
            };
        };
        out.push_back({"site o", Side::Lower, bernoulli_law(0.75, "Bernoulli(3/4)"), at(Side::Lower, o)});
        out.push_back({"site o", Side::Upper, bernoulli_law(0.875, "Bernoulli(7/8)"), at(Side::Upper, o)});
        out.push_back({"pair (o,a)", Side::Lower,
                       CategoricalLaw{"Bernoulli(3/4)^2", {1.0 / 16, 3.0 / 16, 3.0 / 16, 9.0 / 16}},
                       pair(Side::Lower)});
        // Y(o) and Y(a) share the edge o-a: P(both 0) = 2^-5, P(Y(o) = 0) = 1/8.
        out.push_back({"pair (o,a)", Side::Upper,
                       CategoricalLaw{"Y^xi pair", {1.0 / 32, 3.0 / 32, 3.0 / 32, 25.0 / 32}}, pair(Side::Upper)});
        break;
    }
    case CouplingKind::EndSets:
    case CouplingKind::IndependentSets: {
        auto full = [&model, o](Side side, std::size_t full_size) {
            return [&model, side, o, full_size](const ReplicateContext& ctx) {
                return static_cast<std::size_t>(component(model.sample_sets(ctx), side).at(o).size() == full_size);
            };
        };
        out.push_back({"|set at o| == 2", Side::Lower, bernoulli_law(1.0 - 1.0 / n, "nu: P(size 2) = 1-1/n"),
                       full(Side::Lower, 2)});
        out.push_back({"|set at o| == 3", Side::Upper,
                       bernoulli_law((n - 1) * (n - 2) / (n * n), "Y_S: P(size 3) = (n-1)(n-2)/n^2"),
                       full(Side::Upper, 3)});
        break;
    }
    case CouplingKind::LiftedBits: {
        auto bit = [&model, o](Side side) {
            return [&model, side, o](const ReplicateContext& ctx) {
                const SetSample s = model.sample_sets(ctx);
                return static_cast<std::size_t>(LiftedView(component(s, side), model.n()).at(o, 0));
            };
        };
        const double q = 1.0 - 1.0 / n;
        out.push_back({"site (o,0)", Side::Lower, bernoulli_law(1.0 - q * q, "lift(nu): 1-(1-1/n)^2"), bit(Side::Lower)});
        out.push_back(
            {"site (o,0)", Side::Upper, bernoulli_law(1.0 - q * q * q, "lift(Y_S): 1-(1-1/n)^3"), bit(Side::Upper)});
        break;
    }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Invariance windows

/// Signature of the label pattern on the window around the origin
/// (base = nullopt) or around gamma.o.
using WindowSignature = std::function<std::string(const ReplicateContext&, const std::optional<Shift>& base)>;

inline constexpr std::size_t kMaxWindowCells = 64;

/// Two-sample chi-square comparing the window pattern around o with the one
/// around gamma.o. Replicates [0, N) feed the origin window and [N, 2N) the
/// shifted one, so the two samples are independent.
inline TestResult check_invariance_window(const WindowSignature& signature, const Shift& gamma,
                                          std::uint64_t replicates, std::uint64_t seed,
                                          double alpha = kDefaultAlpha, unsigned workers = 0)
{
    using Table = std::map<std::string, std::pair<std::uint64_t, std::uint64_t>>;
    const Table table = run_replicated(
        2 * replicates, seed, Table{},
        [&](const ReplicateContext& ctx) {
            const bool shifted = ctx.replicate >= replicates;
            return std::make_pair(signature(ctx, shifted ? std::optional<Shift>(gamma) : std::nullopt), shifted);
        },
        [](Table& acc, const std::pair<std::string, bool>& rec) {
            auto& cell = acc[rec.first];
            (rec.second ? cell.second : cell.first) += 1;
        },
        [](Table& acc, const Table& other) {
            for (const auto& [key, counts] : other) {
                auto& cell = acc[key];
                cell.first += counts.first;
                cell.second += counts.second;
            }
        },
        workers);
    if (table.size() > kMaxWindowCells) {
        throw coarsening_error("window signature has " + std::to_string(table.size()) + " observed cells (limit " +
                               std::to_string(kMaxWindowCells) + "); coarsen the labels or shrink the window");
    }
    std::vector<std::uint64_t> first, second;
    for (const auto& [key, counts] : table) {
        first.push_back(counts.first);
        second.push_back(counts.second);
    }
    return chi_square_homogeneity(first, second, alpha);
}

/// Reduced words of length <= w in lexicographic order.
inline std::vector<VertexWord> tree_window_offsets(unsigned w)
{
    const TreeBall small(w);
    std::vector<VertexWord> out;
    for (VertexId v = 0; v < small.vertex_count(); ++v) {
        out.push_back(small.word(v));
    }
    return out;
}

inline std::size_t shift_length(const std::optional<Shift>& s)
{
    return s && std::holds_alternative<Generator>(*s) ? 1 : 0;
}

inline void require_window_fits(const TreeBall& ball, unsigned w, std::size_t shift_len)
{
    if (ball.radius() < w + shift_len + 1) {
        throw interiority_error("window of radius " + std::to_string(w) + " around a shift of length " +
                                std::to_string(shift_len) + " needs ball radius >= " +
                                std::to_string(w + shift_len + 1) + ", have " + std::to_string(ball.radius()));
    }
}

inline char signature_char(Bit b) { return b ? '1' : '0'; }

/// Window pattern of a bit configuration on the tree.
inline std::string tree_window(const BitConfig& cfg, const TreeBall& ball, const std::vector<VertexWord>& offsets,
                               const std::optional<Shift>& base)
{
    std::string sig;
    sig.reserve(offsets.size());
    for (const auto& x : offsets) {
        const VertexWord v = base ? apply_shift(x, *base) : x;
        sig.push_back(signature_char(cfg.at(ball.index_of(v))));
    }
    return sig;
}

/// Window pattern of a set configuration, coarsened to the label sizes and
/// the pairwise intersection sizes.
inline std::string tree_window(const SetConfig& cfg, const TreeBall& ball, const std::vector<VertexWord>& offsets,
                               const std::optional<Shift>& base)
{
    std::vector<const LabelSet*> labels;
    for (const auto& x : offsets) {
        const VertexWord v = base ? apply_shift(x, *base) : x;
        labels.push_back(&cfg.at(ball.index_of(v)));
    }
    std::string sig;
    for (const auto* s : labels) {
        sig.push_back(static_cast<char>('0' + s->size()));
    }
    sig.push_back('|');
    for (std::size_t i = 0; i < labels.size(); ++i) {
        for (std::size_t j = i + 1; j < labels.size(); ++j) {
            sig.push_back(static_cast<char>('0' + labels[i]->intersection_size(*labels[j])));
        }
    }
    return sig;
}

/// Window signature for a tree process given as ctx -> Configuration.
template <class Label>
WindowSignature tree_window_process(std::shared_ptr<const TreeBall> ball,
                                    std::function<Configuration<Label>(const ReplicateContext&)> draw, unsigned w)
{
    auto offsets = std::make_shared<const std::vector<VertexWord>>(tree_window_offsets(w));
    return [ball, draw = std::move(draw), offsets, w](const ReplicateContext& ctx, const std::optional<Shift>& base) {
        require_window_fits(*ball, w, shift_length(base));
        return tree_window(draw(ctx), *ball, *offsets, base);
    };
}

struct ProductOffset {
    VertexWord tree;
    std::int64_t rotation = 0;
};

/// Offsets (x, r) with |x| + |r| <= w, ordered by (x, r).
inline std::vector<ProductOffset> product_window_offsets(unsigned w)
{
    std::vector<ProductOffset> out;
    for (auto& x : tree_window_offsets(w)) {
        const auto rest = static_cast<std::int64_t>(w - x.length());
        for (std::int64_t r = -rest; r <= rest; ++r) {
            out.push_back({x, r});
        }
    }
    return out;
}

/// Window signature for a lifted process: bits of lift(Z) read through a
/// LiftedView, Z drawn as ctx -> SetConfig on the tree.
inline WindowSignature lifted_window_process(std::shared_ptr<const TreeBall> ball, std::uint32_t n,
                                             std::function<SetConfig(const ReplicateContext&)> draw, unsigned w)
{
    auto offsets = std::make_shared<const std::vector<ProductOffset>>(product_window_offsets(w));
    return [ball, n, draw = std::move(draw), offsets, w](const ReplicateContext& ctx,
                                                           const std::optional<Shift>& base) {
        require_window_fits(*ball, w, shift_length(base));
        const SetConfig z = draw(ctx);
        const LiftedView view(z, n);
        std::string sig;
        for (const auto& off : *offsets) {
            ProductVertex pv{off.tree, 0, n};
            pv = apply_shift(pv, Rotation{off.rotation});
            if (base) {
                pv = apply_shift(pv, *base);
            }
            sig.push_back(signature_char(view.at(ball->index_of(pv.tree), pv.cycle)));
        }
        return sig;
    };
}

} // namespace mtlab
