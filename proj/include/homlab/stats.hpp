#pragma once

// Contingency-table tests, mutual information, exact one-dimensional k-means,
// the gap statistic, and a Kolmogorov-Smirnov distance to the uniform law.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "homlab/rng.hpp"
#include "homlab/structure.hpp"

namespace homlab::stats {

struct ChiSquare {
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
    bool degenerate = false;  // fewer than two usable rows or columns
};

inline double chi_square_sf(double x, double dof) {
    if (dof <= 0) return 1.0;
    if (x <= 0) return 1.0;
    boost::math::chi_squared d(dof);
    return boost::math::cdf(boost::math::complement(d, x));
}

// Homogeneity test of the rows of a count table. Columns whose expected count
// falls below min_expected are pooled together (and, if still too small, into
// the smallest remaining column).
inline ChiSquare chi_square_homogeneity(std::vector<std::vector<double>> table, double min_expected = 5.0) {
    table.erase(std::remove_if(table.begin(), table.end(),
                               [](const auto& r) { return std::accumulate(r.begin(), r.end(), 0.0) <= 0.0; }),
                table.end());
    ChiSquare out;
    if (table.size() < 2) {
        out.degenerate = true;
        return out;
    }
    const std::size_t cols = table[0].size();
    std::vector<double> rows(table.size(), 0.0), colsum(cols, 0.0);
    double total = 0;
    for (std::size_t i = 0; i < table.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            rows[i] += table[i][j];
            colsum[j] += table[i][j];
            total += table[i][j];
        }
    const double min_share = *std::min_element(rows.begin(), rows.end()) / total;
    std::vector<std::size_t> keep, pool;
    for (std::size_t j = 0; j < cols; ++j) {
        if (colsum[j] <= 0) continue;
        (colsum[j] * min_share < min_expected ? pool : keep).push_back(j);
    }
    std::vector<std::vector<std::size_t>> groups;
    for (auto j : keep) groups.push_back({j});
    if (!pool.empty()) {
        double pooled = 0;
        for (auto j : pool) pooled += colsum[j];
        if (pooled * min_share >= min_expected || groups.empty()) {
            groups.push_back(pool);
        } else {
            auto smallest = std::min_element(groups.begin(), groups.end(), [&](const auto& a, const auto& b) {
                return colsum[a[0]] < colsum[b[0]];
            });
            smallest->insert(smallest->end(), pool.begin(), pool.end());
        }
    }
    if (groups.size() < 2) {
        out.degenerate = true;
        return out;
    }
    for (std::size_t i = 0; i < table.size(); ++i)
        for (const auto& g : groups) {
            double obs = 0, cs = 0;
            for (auto j : g) {
                obs += table[i][j];
                cs += colsum[j];
            }
            double expected = rows[i] * cs / total;
            out.statistic += (obs - expected) * (obs - expected) / expected;
        }
    out.dof = static_cast<double>((table.size() - 1) * (groups.size() - 1));
    out.p_value = chi_square_sf(out.statistic, out.dof);
    return out;
}

// Goodness of fit of counts to given cell probabilities.
inline ChiSquare chi_square_gof(const std::vector<double>& counts, const std::vector<double>& probs) {
    if (counts.size() != probs.size()) throw InputError("count and probability vectors differ in length");
    ChiSquare out;
    double n = std::accumulate(counts.begin(), counts.end(), 0.0);
    std::size_t cells = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (probs[i] <= 0) continue;
        double e = n * probs[i];
        out.statistic += (counts[i] - e) * (counts[i] - e) / e;
        ++cells;
    }
    if (cells < 2) {
        out.degenerate = true;
        return out;
    }
    out.dof = static_cast<double>(cells - 1);
    out.p_value = chi_square_sf(out.statistic, out.dof);
    return out;
}

// Plug-in mutual information (nats) of a joint count table.
inline double mutual_information(const std::vector<std::vector<double>>& joint) {
    double n = 0;
    std::vector<double> row(joint.size(), 0.0), col;
    for (std::size_t i = 0; i < joint.size(); ++i) {
        if (col.size() < joint[i].size()) col.resize(joint[i].size(), 0.0);
        for (std::size_t j = 0; j < joint[i].size(); ++j) {
            row[i] += joint[i][j];
            col[j] += joint[i][j];
            n += joint[i][j];
        }
    }
    if (n <= 0) return 0.0;
    double mi = 0;
    for (std::size_t i = 0; i < joint.size(); ++i)
        for (std::size_t j = 0; j < joint[i].size(); ++j) {
            double c = joint[i][j];
            if (c > 0) mi += c / n * std::log(c * n / (row[i] * col[j]));
        }
    return std::max(0.0, mi);
}

// G-test of independence for a joint count table; p-value from chi-square.
inline ChiSquare g_test(const std::vector<std::vector<double>>& joint) {
    ChiSquare out;
    double n = 0;
    std::size_t r = 0, c = 0;
    std::vector<double> col;
    for (const auto& row : joint) {
        double s = std::accumulate(row.begin(), row.end(), 0.0);
        if (s > 0) ++r;
        n += s;
        if (col.size() < row.size()) col.resize(row.size(), 0.0);
        for (std::size_t j = 0; j < row.size(); ++j) col[j] += row[j];
    }
    for (double x : col) c += x > 0;
    if (r < 2 || c < 2) {
        out.degenerate = true;
        return out;
    }
    out.statistic = 2.0 * n * mutual_information(joint);
    out.dof = static_cast<double>((r - 1) * (c - 1));
    out.p_value = chi_square_sf(out.statistic, out.dof);
    return out;
}

struct Clustering {
    std::vector<double> centers;     // ascending
    std::vector<std::size_t> sizes;
    std::vector<std::size_t> assignment;  // per input value
    double within = 0.0;             // within-cluster sum of squares
};

// Exact k-means in one dimension by dynamic programming over sorted values.
inline Clustering kmeans_1d(const std::vector<double>& values, std::size_t k) {
    const std::size_t n = values.size();
    if (k == 0 || k > n) throw InputError("kmeans needs 1 <= k <= number of values");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<double> x(n), s1(n + 1, 0.0), s2(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = values[order[i]];
        s1[i + 1] = s1[i] + x[i];
        s2[i + 1] = s2[i] + x[i] * x[i];
    }
    auto cost = [&](std::size_t i, std::size_t j) {  // values x[i..j)
        double m = static_cast<double>(j - i);
        double s = s1[j] - s1[i];
        return std::max(0.0, (s2[j] - s2[i]) - s * s / m);
    };
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> dp(k + 1, std::vector<double>(n + 1, inf));
    std::vector<std::vector<std::size_t>> cut(k + 1, std::vector<std::size_t>(n + 1, 0));
    dp[0][0] = 0;
    for (std::size_t c = 1; c <= k; ++c)
        for (std::size_t j = c; j <= n; ++j)
            for (std::size_t i = c - 1; i < j; ++i) {
                if (dp[c - 1][i] == inf) continue;
                double v = dp[c - 1][i] + cost(i, j);
                if (v < dp[c][j]) {
                    dp[c][j] = v;
                    cut[c][j] = i;
                }
            }
    Clustering out;
    out.within = dp[k][n];
    out.assignment.assign(n, 0);
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    for (std::size_t c = k, j = n; c > 0; --c) {
        std::size_t i = cut[c][j];
        ranges.push_back({i, j});
        j = i;
    }
    std::reverse(ranges.begin(), ranges.end());
    for (std::size_t c = 0; c < ranges.size(); ++c) {
        auto [i, j] = ranges[c];
        out.centers.push_back((s1[j] - s1[i]) / static_cast<double>(j - i));
        out.sizes.push_back(j - i);
        for (std::size_t t = i; t < j; ++t) out.assignment[order[t]] = c;
    }
    return out;
}

struct GapChoice {
    std::size_t k = 1;
    std::vector<double> gap;  // gap[k-1]
    std::vector<double> se;   // s_k
};

// Log-scale tolerance for the gap: splitting one cluster of real data shifts
// log W by about 0.1 against the reference, while a genuine new cluster moves it
// by more than 1.
inline constexpr double kGapSlack = 0.25;

// Gap statistic with uniform reference data on the range of the values. The
// choice is k=1 unless the largest gap beats gap(1) by two combined standard
// errors (and the slack), else the smallest k within max(se, slack) of the
// largest gap.
inline GapChoice gap_statistic(const std::vector<double>& values, std::size_t kmax, std::size_t references,
                               std::uint64_t seed) {
    const std::size_t n = values.size();
    kmax = std::min(kmax, n);
    auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    GapChoice out;
    // Tiny floor keeps log(W) finite for tight clusters.
    const double floor = 1e-12 * std::max(1.0, static_cast<double>(n));
    for (std::size_t k = 1; k <= kmax; ++k) {
        double logw = std::log(kmeans_1d(values, k).within + floor);
        std::vector<double> ref(references);
        rng::SplitMix64 g(rng::hash(seed, {rng::tag("gap"), k}));
        std::vector<double> sample(n);
        for (std::size_t b = 0; b < references; ++b) {
            for (auto& v : sample) v = lo + (hi - lo) * g.next_unit();
            ref[b] = std::log(kmeans_1d(sample, k).within + floor);
        }
        double mean = std::accumulate(ref.begin(), ref.end(), 0.0) / static_cast<double>(references);
        double var = 0;
        for (double r : ref) var += (r - mean) * (r - mean);
        var /= static_cast<double>(references);
        out.gap.push_back(mean - logw);
        out.se.push_back(std::sqrt(var) * std::sqrt(1.0 + 1.0 / static_cast<double>(references)));
    }
    auto best = static_cast<std::size_t>(std::max_element(out.gap.begin(), out.gap.end()) - out.gap.begin());
    out.k = best + 1;
        const double slack = std::max(out.se[best], kGapSlack);
    if (out.gap[best] - out.gap[0] <= std::max(2.0 * std::hypot(out.se[0], out.se[best]), kGapSlack)) {
        out.k = 1;
        return out;
    }
    for (std::size_t k = 1; k <= best; ++k)
        if (out.gap[k - 1] >= out.gap[best] - slack) {
            out.k = k;
            break;
        }
    return out;
}

// Kolmogorov-Smirnov distance between the empirical law of values and U[0,1].
inline double ks_uniform(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double d = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double x = std::clamp(values[i], 0.0, 1.0);
        d = std::max({d, (static_cast<double>(i) + 1) / n - x, x - static_cast<double>(i) / n});
    }
    return d;
}

// Asymptotic Kolmogorov tail P(sqrt(n) D > t).
inline double kolmogorov_sf(double t) {
    if (t <= 0) return 1.0;
    double sum = 0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * t * t);
        sum += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace homlab::stats
