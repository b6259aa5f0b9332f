#pragma once

#include <numbers>
#include <random>
#include <vector>

#include "amc/sigsynth.hpp"
#include "amc/types.hpp"

namespace amc_test {

// Random binary instance with points from two loose Gaussian clumps; both
// labels guaranteed present.
inline amc::LabeledSet random_binary_instance(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<int> coin(0, 1);
    amc::LabeledSet set;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = i == 0 ? 1 : (i == 1 ? -1 : (coin(rng) ? 1 : -1));
        const double cx = label > 0 ? 0.8 : -0.8;
        set.points.emplace_back(cx + gauss(rng), gauss(rng));
        set.labels.push_back(label);
    }
    return set;
}

// Greedy one-to-one match of estimated centers to reference points; returns
// the per-center distances. Independent of the production correlation code.
inline std::vector<double> center_errors(const std::vector<amc::cpoint>& estimated,
                                         const std::vector<amc::cpoint>& reference) {
    std::vector<bool> used_e(estimated.size(), false), used_r(reference.size(), false);
    std::vector<double> errors;
    const std::size_t rounds = std::min(estimated.size(), reference.size());
    for (std::size_t round = 0; round < rounds; ++round) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t be = 0, br = 0;
        for (std::size_t e = 0; e < estimated.size(); ++e) {
            if (used_e[e]) continue;
            for (std::size_t r = 0; r < reference.size(); ++r) {
                if (used_r[r]) continue;
                const double d = std::abs(estimated[e] - reference[r]);
                if (d < best) {
                    best = d;
                    be = e;
                    br = r;
                }
            }
        }
        used_e[be] = used_r[br] = true;
        errors.push_back(best);
    }
    return errors;
}

inline double max_center_error(const std::vector<amc::cpoint>& estimated,
                               const std::vector<amc::cpoint>& reference) {
    double worst = 0.0;
    for (double e : center_errors(estimated, reference)) worst = std::max(worst, e);
    return worst;
}

// Same, after absorbing the global rotation a blind estimator cannot observe
// (searched over +-10 degrees in 0.1-degree steps).
inline double aligned_max_center_error(const std::vector<amc::cpoint>& estimated,
                                       const std::vector<amc::cpoint>& reference) {
    double best = std::numeric_limits<double>::infinity();
    for (int tenth = -100; tenth <= 100; ++tenth) {
        const double theta = tenth * 0.1 * std::numbers::pi / 180.0;
        auto spun = estimated;
        for (auto& p : spun) p *= amc::cpoint(std::cos(theta), std::sin(theta));
        best = std::min(best, max_center_error(spun, reference));
    }
    return best;
}

}  // namespace amc_test
