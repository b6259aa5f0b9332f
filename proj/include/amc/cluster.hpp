#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "amc/types.hpp"

namespace amc {

/// Estimated scatter diagram: one center per hypothesized class, normalized
/// so the member-count-weighted mean squared center magnitude is 1.
struct ScatterEstimate {
    std::vector<cpoint> centers;      // normalized
    std::vector<cpoint> raw_centers;  // per-class arithmetic means, unnormalized
    std::vector<std::size_t> member_counts;
    int order = 0;
    bool valid = false;  // false when any class came up empty
};

namespace detail {

struct KmeansResult {
    std::vector<int> assignment;  // 0-based center index per point
    std::vector<cpoint> centers;
    double wcss = std::numeric_limits<double>::infinity();
};

inline void assign_points(const std::vector<cpoint>& pts, const std::vector<cpoint>& centers,
                          std::vector<int>& assignment) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centers.size(); ++c) {
            const double d = std::norm(pts[i] - centers[c]);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        assignment[i] = best;
    }
}

// Greedy k-means++: each draw samples several D^2-weighted candidates and
// keeps the one that shrinks the total distortion most. The plain variant
// routinely leaves a cell uncovered at large k.
inline std::vector<cpoint> seed_pp(const std::vector<cpoint>& pts, std::size_t k,
                                   std::mt19937_64& rng) {
    std::vector<cpoint> centers;
    centers.reserve(k);
    std::uniform_int_distribution<std::size_t> first(0, pts.size() - 1);
    centers.push_back(pts[first(rng)]);
    const std::size_t candidates = 2 + static_cast<std::size_t>(std::log(double(k)));

    std::vector<double> d2(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) d2[i] = std::norm(pts[i] - centers[0]);
    while (centers.size() < k) {
        double total = 0.0;
        for (double d : d2) total += d;
        if (total <= 0.0) {
            // fewer distinct positions than k; duplicates are unavoidable
            centers.push_back(pts[centers.size() % pts.size()]);
            continue;
        }
        std::uniform_real_distribution<double> u(0.0, total);
        std::size_t best_pick = pts.size() - 1;
        double best_total = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < candidates; ++c) {
            double r = u(rng);
            std::size_t pick = pts.size() - 1;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                r -= d2[i];
                if (r <= 0.0) {
                    pick = i;
                    break;
                }
            }
            double would = 0.0;
            for (std::size_t i = 0; i < pts.size(); ++i)
                would += std::min(d2[i], std::norm(pts[i] - pts[pick]));
            if (would < best_total) {
                best_total = would;
                best_pick = pick;
            }
        }
        centers.push_back(pts[best_pick]);
        for (std::size_t i = 0; i < pts.size(); ++i)
            d2[i] = std::min(d2[i], std::norm(pts[i] - centers.back()));
    }
    return centers;
}

inline KmeansResult lloyd(const std::vector<cpoint>& pts, std::vector<cpoint> centers,
                          std::size_t max_iters = 100) {
    const std::size_t k = centers.size();
    KmeansResult res;
    res.assignment.assign(pts.size(), -1);
    std::vector<int> prev(pts.size(), -2);
    std::vector<cpoint> sums(k);
    std::vector<std::size_t> counts(k);

    for (std::size_t it = 0; it < max_iters; ++it) {
        assign_points(pts, centers, res.assignment);
        if (res.assignment == prev) break;
        prev = res.assignment;

        std::fill(sums.begin(), sums.end(), cpoint{});
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            sums[res.assignment[i]] += pts[i];
            ++counts[res.assignment[i]];
        }
        for (std::size_t c = 0; c < k; ++c)
            if (counts[c] > 0) centers[c] = sums[c] / double(counts[c]);

        // revive an empty center at the point farthest from its own center
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            double worst = 0.0;
            std::size_t worst_i = pts.size();
            for (std::size_t i = 0; i < pts.size(); ++i) {
                const double d = std::norm(pts[i] - centers[res.assignment[i]]);
                if (d > worst) {
                    worst = d;
                    worst_i = i;
                }
            }
            if (worst_i < pts.size()) centers[c] = pts[worst_i];
        }
    }

    res.centers = std::move(centers);
    res.wcss = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        res.wcss += std::norm(pts[i] - res.centers[res.assignment[i]]);
    return res;
}

inline KmeansResult kmeans(const std::vector<cpoint>& pts, std::size_t k, std::uint64_t seed,
                           std::size_t restarts = 20) {
    std::mt19937_64 rng(seed);
    KmeansResult best;
    for (std::size_t r = 0; r < restarts; ++r) {
        KmeansResult cur = lloyd(pts, seed_pp(pts, k, rng));
        if (cur.wcss < best.wcss) best = std::move(cur);
    }
    return best;
}

}  // namespace detail

/// Blind label bootstrap: k-means with k-means++ seeding, 20 restarts, best
/// within-cluster sum of squares wins. Labels are cluster indices 1..M.
/// Deterministic given seed.
inline LabeledSet provisional_labels(const std::vector<cpoint>& points, int m,
                                     std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("provisional_labels: order must be positive");
    if (points.size() < static_cast<std::size_t>(m))
        throw std::invalid_argument("provisional_labels: fewer points than classes");

    LabeledSet out;
    out.points = points;
    out.labels.resize(points.size());
    if (m == 1) {
        std::fill(out.labels.begin(), out.labels.end(), 1);
        return out;
    }
    const auto res = detail::kmeans(points, static_cast<std::size_t>(m), seed);
    for (std::size_t i = 0; i < points.size(); ++i) out.labels[i] = res.assignment[i] + 1;
    return out;
}

/// Per-class centroids of the retained symbols, then unit-power normalization
/// of the center set (weighted by member counts). An empty class marks the
/// whole estimate invalid rather than throwing, so an order-hypothesis sweep
/// can treat it as a zero-correlation hypothesis.
inline ScatterEstimate k_centers(const LabeledSet& correct, int m) {
    if (m < 1) throw std::invalid_argument("k_centers: order must be positive");
    ScatterEstimate est;
    est.order = m;
    est.raw_centers.assign(static_cast<std::size_t>(m), cpoint{});
    est.member_counts.assign(static_cast<std::size_t>(m), 0);

    for (std::size_t i = 0; i < correct.size(); ++i) {
        const int label = correct.labels[i];
        if (label < 1 || label > m) throw std::invalid_argument("k_centers: label out of range");
        est.raw_centers[label - 1] += correct.points[i];
        ++est.member_counts[label - 1];
    }

    double weighted_power = 0.0;
    std::size_t total = 0;
    bool any_empty = false;
    for (int c = 0; c < m; ++c) {
        if (est.member_counts[c] == 0) {
            any_empty = true;
            continue;
        }
        est.raw_centers[c] /= double(est.member_counts[c]);
        weighted_power += double(est.member_counts[c]) * std::norm(est.raw_centers[c]);
        total += est.member_counts[c];
    }

    est.centers = est.raw_centers;
    if (!any_empty && total > 0 && weighted_power > 1e-30) {
        const double scale = 1.0 / std::sqrt(weighted_power / double(total));
        for (auto& c : est.centers) c *= scale;
        est.valid = true;
    }
    return est;
}

}  // namespace amc
