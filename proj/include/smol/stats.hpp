#pragma once

/// @file stats.hpp
/// @brief Cross-seed aggregation and the one-sided Mann-Whitney U test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <smol/runner.hpp>

namespace smol::stats {

/// Largest n*m for which the exact null distribution is used.
inline constexpr std::size_t exact_threshold = 400;

struct UTest {
    /// U of sample b: pairs with b > a, ties counting one half.
    double u_statistic = 0.0;
    double p_value = 1.0;
    bool exact = false;
};

/// Midranks (1-based) of the pooled sample a ++ b.
inline std::vector<double> midranks(std::span<const double> pooled)
{
    std::vector<std::size_t> order(pooled.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });
    std::vector<double> ranks(pooled.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && pooled[order[j + 1]] == pooled[order[i]])
            ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t)
            ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

/// Number of arrangements of n a's and m b's giving each U_b = 0..n*m.
/// Built from c(i,j,u) = c(i-1,j,u) + c(i,j-1,u-i): the largest pooled value
/// is either an a (adds nothing) or a b (beats all i a's).
inline std::vector<std::uint64_t> u_null_counts(std::size_t n, std::size_t m)
{
    // row[j] holds c(i, j, .) for the current i.
    std::vector<std::vector<std::uint64_t>> row(m + 1, std::vector<std::uint64_t>(n * m + 1, 0));
    for (auto& r : row)
        r[0] = 1; // i = 0
    for (std::size_t i = 1; i <= n; ++i) {
        // c(i,0,.) = c(i-1,0,.) is already {1,0,...}
        for (std::size_t j = 1; j <= m; ++j) {
            auto& cur = row[j];        // holds c(i-1, j, .)
            const auto& left = row[j - 1]; // holds c(i, j-1, .)
            for (std::size_t u = n * m + 1; u-- > i;)
                cur[u] += left[u - i];
        }
    }
    return row[m];
}

/// P(U_b >= u_observed) under H0 from the exact null distribution.
inline double exact_upper_p(std::size_t n, std::size_t m, double u_observed)
{
    const auto counts = u_null_counts(n, m);
    long double total = 0, tail = 0;
    for (std::size_t u = 0; u < counts.size(); ++u) {
        total += static_cast<long double>(counts[u]);
        if (static_cast<double>(u) >= u_observed)
            tail += static_cast<long double>(counts[u]);
    }
    return static_cast<double>(tail / total);
}

/// Normal approximation with tie-corrected variance and a continuity
/// correction of 1/2 toward the mean.
inline double normal_upper_p(std::size_t n, std::size_t m, double u_observed, double tie_sum)
{
    const double nm = static_cast<double>(n) * static_cast<double>(m);
    const double total = static_cast<double>(n + m);
    const double mean = nm / 2.0;
    const double var = nm / 12.0 * ((total + 1.0) - tie_sum / (total * (total - 1.0)));
    if (!(var > 0.0))
        return 1.0;
    const double z = (u_observed - mean - 0.5) / std::sqrt(var);
    return std::clamp(0.5 * std::erfc(z / std::sqrt(2.0)), 0.0, 1.0);
}

/// One-sided test of H1: values in `b` tend to be larger than values in `a`.
/// Exact when n*m <= 400 and there are no ties, normal approximation otherwise.
inline UTest mann_whitney_b_greater(std::span<const double> a, std::span<const double> b)
{
    if (a.empty() || b.empty())
        throw std::invalid_argument("mann_whitney: both samples must be non-empty");
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto ranks = midranks(pooled);

    const std::size_t n = a.size(), m = b.size();
    double rank_sum_b = 0.0;
    for (std::size_t j = 0; j < m; ++j)
        rank_sum_b += ranks[n + j];
    const double md = static_cast<double>(m);
    const double u_b = rank_sum_b - md * (md + 1.0) / 2.0;

    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double tie_sum = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i])
            ++j;
        const double t = static_cast<double>(j - i);
        tie_sum += t * t * t - t;
        i = j;
    }

    UTest out;
    out.u_statistic = u_b;
    out.exact = tie_sum == 0.0 && n * m <= exact_threshold;
    out.p_value = out.exact ? exact_upper_p(n, m, u_b) : normal_upper_p(n, m, u_b, tie_sum);
    return out;
}

enum class Alternative { BGreater, AGreater };

inline UTest mann_whitney_one_sided(std::span<const double> a, std::span<const double> b,
                                    Alternative alternative = Alternative::BGreater)
{
    return alternative == Alternative::BGreater ? mann_whitney_b_greater(a, b) : mann_whitney_b_greater(b, a);
}

/// Type-7 quantile (linear interpolation between closest ranks) of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double q)
{
    if (sorted.empty())
        throw std::invalid_argument("quantile: empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double median(std::vector<double> values)
{
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, 0.5);
}

inline const std::vector<std::string>& metric_names()
{
    static const std::vector<std::string> names{"alpha",       "coverage",      "max_fitness",
                                                "evaluations", "reevaluations", "discards"};
    return names;
}

inline std::string joined_metric_names()
{
    std::string s;
    for (const auto& n : metric_names())
        s += (s.empty() ? "" : ", ") + n;
    return s;
}

/// Value of a named metric; max_fitness may be absent.
inline std::optional<double> metric_value(const MetricsRecord& r, std::string_view metric)
{
    if (metric == "alpha")
        return r.alpha;
    if (metric == "coverage")
        return r.coverage;
    if (metric == "max_fitness")
        return r.max_fitness;
    if (metric == "evaluations")
        return static_cast<double>(r.evaluations);
    if (metric == "reevaluations")
        return static_cast<double>(r.reevaluations);
    if (metric == "discards")
        return static_cast<double>(r.discards);
    throw std::invalid_argument("unknown metric '" + std::string(metric) + "' (valid: " + joined_metric_names() + ")");
}

struct QuantileRow {
    std::size_t generation = 0;
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
};

/// Per-seed metric logs aligned by generation.
using SeedSeries = std::vector<MetricsLog>;

/// Per-generation median and interquartile range across seeds. Seeds whose
/// value is absent at a generation are left out of that generation; a
/// generation with no values at all yields NaN.
inline std::vector<QuantileRow> median_iqr(const SeedSeries& series, std::string_view metric)
{
    if (series.empty())
        throw std::invalid_argument("median_iqr: need at least one seed");
    metric_value(MetricsRecord{}, metric); // rejects unknown names up front
    const std::size_t len = series.front().size();
    for (const auto& s : series) {
        if (s.size() != len)
            throw std::invalid_argument("median_iqr: seeds have different numbers of records");
        for (std::size_t g = 0; g < len; ++g)
            if (s[g].generation != series.front()[g].generation)
                throw std::invalid_argument("median_iqr: seeds do not share generation indices");
    }

    std::vector<QuantileRow> out(len);
    std::vector<double> values;
    for (std::size_t g = 0; g < len; ++g) {
        values.clear();
        for (const auto& s : series)
            if (auto v = metric_value(s[g], metric))
                values.push_back(*v);
        std::sort(values.begin(), values.end());
        out[g].generation = series.front()[g].generation;
        if (values.empty()) {
            out[g].median = out[g].q25 = out[g].q75 = std::nan("");
            continue;
        }
        out[g].median = quantile_sorted(values, 0.5);
        out[g].q25 = quantile_sorted(values, 0.25);
        out[g].q75 = quantile_sorted(values, 0.75);
    }
    return out;
}

enum class Direction { HigherIsBetter, LowerIsBetter };

struct ComparisonTable {
    std::vector<std::string> methods;
    std::vector<double> medians;
    /// p_values[row][col]: one-sided p for "col is better than row"; empty on the diagonal.
    std::vector<std::vector<std::optional<double>>> p_values;
};

/// Median per method and the full pairwise matrix of one-sided U-test
/// p-values, rows and columns in input order.
inline ComparisonTable compare_final(const std::vector<std::pair<std::string, std::vector<double>>>& scores_by_method,
                                     Direction direction = Direction::HigherIsBetter)
{
    if (scores_by_method.size() < 2)
        throw std::invalid_argument("compare_final: need at least two methods");
    for (const auto& [name, scores] : scores_by_method)
        if (scores.size() < 2)
            throw std::invalid_argument("compare_final: method '" + name + "' has " + std::to_string(scores.size())
                                        + " seed(s); at least 2 are required");

    ComparisonTable t;
    const std::size_t k = scores_by_method.size();
    t.p_values.assign(k, std::vector<std::optional<double>>(k));
    auto oriented = [&](const std::vector<double>& v) {
        std::vector<double> o = v;
        if (direction == Direction::LowerIsBetter)
            for (auto& x : o)
                x = -x;
        return o;
    };
    for (std::size_t r = 0; r < k; ++r) {
        t.methods.push_back(scores_by_method[r].first);
        t.medians.push_back(median(scores_by_method[r].second));
        for (std::size_t c = 0; c < k; ++c) {
            if (r == c)
                continue;
            t.p_values[r][c] = mann_whitney_b_greater(oriented(scores_by_method[r].second),
                                                      oriented(scores_by_method[c].second))
                                   .p_value;
        }
    }
    return t;
}

/// Delimited table: method, median, then one p-value column per method, "-" on the diagonal.
inline void write_comparison_csv(std::ostream& os, const ComparisonTable& t)
{
    os << "method,median";
    for (const auto& m : t.methods)
        os << ',' << m;
    os << '\n';
    char buf[40];
    for (std::size_t r = 0; r < t.methods.size(); ++r) {
        std::snprintf(buf, sizeof buf, "%.6g", t.medians[r]);
        os << t.methods[r] << ',' << buf;
        for (const auto& p : t.p_values[r]) {
            if (p) {
                std::snprintf(buf, sizeof buf, "%.3e", *p);
                os << ',' << buf;
            } else {
                os << ",-";
            }
        }
        os << '\n';
    }
}

} // namespace smol::stats
