#pragma once

// Monte Carlo engine and the handful of tests the rest of the library cites.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "errors.hpp"
#include "rng.hpp"

namespace mtlab {

inline constexpr double kDefaultAlpha = 0.01;
inline constexpr double kDefaultLevel = 0.99;

struct TestResult {
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
    double alpha = kDefaultAlpha;
    bool reject = false;
    std::uint64_t sample_size = 0;
};

inline TestResult make_result(double statistic, double dof, double p, double alpha, std::uint64_t n)
{
    p = std::clamp(p, 0.0, 1.0);
    return TestResult{statistic, dof, p, alpha, p < alpha, n};
}

/// Upper tail of the chi-square distribution.
inline double chi_square_sf(double statistic, double dof)
{
    if (dof <= 0.0) {
        return 1.0;
    }
    if (statistic <= 0.0) {
        return 1.0;
    }
    return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

/// Two-sided standard normal quantile for a confidence level, e.g. 2.5758 at 0.99.
inline double normal_z(double level)
{
    if (!(level > 0.0 && level < 1.0)) {
        throw parameter_error("confidence level must lie in (0, 1)");
    }
    const boost::math::normal_distribution<double> standard;
    return boost::math::quantile(standard, 1.0 - (1.0 - level) / 2.0);
}

/// Chi-square goodness of fit. Every expected count must be at least 5.
inline TestResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> expected_probabilities,
                                 double alpha = kDefaultAlpha)
{
    if (observed.size() != expected_probabilities.size()) {
        throw parameter_error("chi_square_gof: observed and expected differ in length");
    }
    if (observed.size() < 2) {
        throw parameter_error("chi_square_gof: need at least two cells (zero degrees of freedom)");
    }
    const std::uint64_t total = std::accumulate(observed.begin(), observed.end(), std::uint64_t{0});
    const double mass = std::accumulate(expected_probabilities.begin(), expected_probabilities.end(), 0.0);
    if (std::abs(mass - 1.0) > 1e-9) {
        throw parameter_error("chi_square_gof: expected probabilities must sum to 1");
    }
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double e = expected_probabilities[i] * static_cast<double>(total);
        if (e < 5.0) {
            throw test_power_error("chi_square_gof: expected count " + std::to_string(e) + " in cell " +
                                   std::to_string(i) + " is below 5");
        }
        const double d = static_cast<double>(observed[i]) - e;
        stat += d * d / e;
    }
    const double dof = static_cast<double>(observed.size() - 1);
    return make_result(stat, dof, chi_square_sf(stat, dof), alpha, total);
}

/// Two-sample chi-square test of homogeneity on a 2 x k table.
///
/// Cells whose expected count falls below 5 in either row are pooled into a
/// single remainder cell (merged into the smallest kept cell if the remainder
/// is itself too thin). With fewer than two usable cells the samples are
/// indistinguishable and the result is p = 1.
inline TestResult chi_square_homogeneity(std::span<const std::uint64_t> first, std::span<const std::uint64_t> second,
                                         double alpha = kDefaultAlpha)
{
    if (first.size() != second.size()) {
        throw parameter_error("chi_square_homogeneity: tables differ in width");
    }
    const double n1 = static_cast<double>(std::accumulate(first.begin(), first.end(), std::uint64_t{0}));
    const double n2 = static_cast<double>(std::accumulate(second.begin(), second.end(), std::uint64_t{0}));
    const auto total_n = static_cast<std::uint64_t>(n1 + n2);
    if (n1 == 0.0 || n2 == 0.0) {
        throw test_power_error("chi_square_homogeneity: empty sample");
    }
    const double grand = n1 + n2;
    const double small_row = std::min(n1, n2);

    std::vector<std::pair<std::uint64_t, std::uint64_t>> kept;
    std::pair<std::uint64_t, std::uint64_t> pooled{0, 0};
    for (std::size_t j = 0; j < first.size(); ++j) {
        const double col = static_cast<double>(first[j] + second[j]);
        if (col == 0.0) {
            continue;
        }
        if (small_row * col / grand >= 5.0) {
            kept.emplace_back(first[j], second[j]);
        } else {
            pooled.first += first[j];
            pooled.second += second[j];
        }
    }
    const double pooled_col = static_cast<double>(pooled.first + pooled.second);
    if (pooled_col > 0.0) {
        if (small_row * pooled_col / grand >= 5.0 || kept.empty()) {
            kept.push_back(pooled);
        } else {
            auto smallest = std::min_element(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
                return a.first + a.second < b.first + b.second;
            });
            smallest->first += pooled.first;
            smallest->second += pooled.second;
        }
    }
    if (kept.size() < 2) {
        return make_result(0.0, 0.0, 1.0, alpha, total_n);
    }
    double stat = 0.0;
    for (const auto& [a, b] : kept) {
        const double col = static_cast<double>(a + b);
        const double e1 = n1 * col / grand;
        const double e2 = n2 * col / grand;
        stat += (static_cast<double>(a) - e1) * (static_cast<double>(a) - e1) / e1;
        stat += (static_cast<double>(b) - e2) * (static_cast<double>(b) - e2) / e2;
    }
    const double dof = static_cast<double>(kept.size() - 1);
    return make_result(stat, dof, chi_square_sf(stat, dof), alpha, total_n);
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

/// Wilson score interval for a binomial proportion.
inline Interval wilson_ci(std::uint64_t successes, std::uint64_t trials, double level = kDefaultLevel)
{
    if (trials == 0) {
        throw parameter_error("wilson_ci: trials must be positive");
    }
    if (successes > trials) {
        throw parameter_error("wilson_ci: successes exceed trials");
    }
    const double z = normal_z(level);
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return Interval{std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Streaming mean and variance (Welford, with Chan's pairwise merge).
struct Moments {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) noexcept
    {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }

    void merge(const Moments& other) noexcept
    {
        if (other.count == 0) {
            return;
        }
        if (count == 0) {
            *this = other;
            return;
        }
        const double na = static_cast<double>(count);
        const double nb = static_cast<double>(other.count);
        const double delta = other.mean - mean;
        const double n = na + nb;
        mean += delta * nb / n;
        m2 += other.m2 + delta * delta * na * nb / n;
        count += other.count;
    }

    double variance() const noexcept { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
    double std_error() const noexcept
    {
        return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
    }
    Interval normal_ci(double level = kDefaultLevel) const
    {
        const double h = normal_z(level) * std_error();
        return Interval{mean - h, mean + h};
    }
};

/// What a replicate job sees: the run seed and its own index.
struct ReplicateContext {
    std::uint64_t seed = 0;
    std::uint64_t replicate = 0;

    Stream stream(std::string_view name) const noexcept { return Stream(seed, replicate, name); }
};

inline unsigned resolve_workers(unsigned requested) noexcept
{
    if (requested != 0) {
        return requested;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

inline constexpr std::uint64_t kReplicateChunk = 512;

/// Runs job(ctx) for replicates 0..count-1 and folds the records.
///
/// Replicates are grouped into fixed chunks of kReplicateChunk; each chunk is
/// folded in index order starting from `identity`, then chunk accumulators are
/// merged in chunk order. The chunking does not depend on the worker count, so
/// the aggregate is bit-identical for any number of workers.
template <class Acc, class Job, class Fold, class Merge>
Acc run_replicated(std::uint64_t count, std::uint64_t seed, const Acc& identity, Job&& job, Fold&& fold,
                   Merge&& merge, unsigned workers = 0)
{
    if (count == 0) {
        return identity;
    }
    const std::uint64_t chunks = (count + kReplicateChunk - 1) / kReplicateChunk;
    std::vector<Acc> partial(chunks, identity);
    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex failure_mutex;
    std::optional<std::uint64_t> failure_index;
    std::string failure_message;

    auto worker = [&]() {
        for (;;) {
            const std::uint64_t c = next.fetch_add(1);
            if (c >= chunks || failed.load(std::memory_order_relaxed)) {
                return;
            }
            const std::uint64_t begin = c * kReplicateChunk;
            const std::uint64_t end = std::min(count, begin + kReplicateChunk);
            Acc& acc = partial[c];
            for (std::uint64_t i = begin; i < end; ++i) {
                try {
                    fold(acc, job(ReplicateContext{seed, i}));
                } catch (const std::exception& ex) {
                    const std::lock_guard lock(failure_mutex);
                    if (!failure_index || i < *failure_index) {
                        failure_index = i;
                        failure_message = ex.what();
                    }
                    failed.store(true);
                    return;
                }
            }
        }
    };

    const unsigned n_workers = static_cast<unsigned>(std::min<std::uint64_t>(resolve_workers(workers), chunks));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_workers);
        for (unsigned w = 0; w < n_workers; ++w) {
            pool.emplace_back(worker);
        }
    }
    if (failure_index) {
        throw replicate_error(*failure_index, failure_message);
    }
    Acc result = identity;
    for (const Acc& acc : partial) {
        merge(result, acc);
    }
    return result;
}

} // namespace mtlab
