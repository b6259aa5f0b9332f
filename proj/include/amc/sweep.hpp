#pragma once

#include <atomic>
#include <cstdio>
#include <sstream>
#include <thread>

#include "amc/frame_io.hpp"
#include "amc/pipeline.hpp"
#include "amc/sigsynth.hpp"

namespace amc {

/// Wilson 95% score interval.
struct Interval {
    double lo = 0.0, hi = 1.0;
};

inline Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959964) {
    if (trials == 0) return {0.0, 1.0};
    const double n = double(trials);
    const double p = double(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

/// Truth/verdict agreement, treating 4QAM and QPSK as one class (identical
/// geometry up to rotation).
inline bool verdict_matches(const ModulationScheme& truth, const ModulationScheme& verdict) {
    if (truth == verdict) return true;
    auto is_quaternary = [](const ModulationScheme& s) {
        return s.order() == 4 && s.family() != ModulationFamily::Fsk;
    };
    return is_quaternary(truth) && is_quaternary(verdict);
}

struct SweepSpec {
    std::vector<ModulationScheme> schemes;
    std::vector<double> snr_grid_db;
    std::size_t symbols_per_trial = 1000;
    std::size_t trials_per_point = 200;
    std::uint64_t seed = 1;
};

struct SweepPoint {
    std::string scheme;
    double snr_db = 0.0;
    std::size_t trials = 0;
    std::size_t successes = 0;
    std::size_t equivalence_credits = 0;  // successes via the 4QAM/QPSK rule
    double rate = 0.0;
    Interval ci;
    double mean_ms = 0.0;  // wall time per classification; not reproducible
};

struct SweepResult {
    std::vector<SweepPoint> points;
};

/// Seed stream per (scheme, SNR, trial) so results are independent of the
/// execution schedule.
inline std::uint64_t trial_seed(std::uint64_t master, std::size_t scheme_idx, double snr_db,
                                std::size_t trial, std::uint64_t stream) {
    const auto snr_key = static_cast<std::uint64_t>(std::llround(snr_db * 1000.0) + (1LL << 40));
    return mix_seed(mix_seed(master, scheme_idx, snr_key), trial, stream);
}

/// Run trials_per_point seeded classifications per (scheme, SNR) cell.
/// Parallel across trials; the aggregate is schedule-independent.
inline SweepResult run_sweep(const SweepSpec& spec, const PipelineConfig& cfg,
                             unsigned threads = 0) {
    cfg.validate();
    if (spec.trials_per_point < 1) throw std::invalid_argument("sweep: trials_per_point >= 1");
    if (spec.schemes.empty()) throw std::invalid_argument("sweep: no schemes");
    int max_order = 0;
    for (int m : cfg.hypothesis_orders) max_order = std::max(max_order, m);
    if (spec.symbols_per_trial < 4 * static_cast<std::size_t>(max_order))
        throw std::invalid_argument("sweep: symbols_per_trial must be >= 4 * max hypothesis order");

    const auto stock = cfg.load_template_stock();
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());

    struct Task {
        std::size_t scheme_idx, snr_idx, trial;
    };
    std::vector<Task> tasks;
    tasks.reserve(spec.schemes.size() * spec.snr_grid_db.size() * spec.trials_per_point);
    for (std::size_t s = 0; s < spec.schemes.size(); ++s)
        for (std::size_t v = 0; v < spec.snr_grid_db.size(); ++v)
            for (std::size_t t = 0; t < spec.trials_per_point; ++t) tasks.push_back({s, v, t});

    struct Outcome {
        std::uint8_t success = 0;
        std::uint8_t equivalence = 0;
        double ms = 0.0;
    };
    std::vector<Outcome> outcomes(tasks.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= tasks.size()) return;
            const Task& task = tasks[k];
            const ModulationScheme& scheme = spec.schemes[task.scheme_idx];
            const double snr = spec.snr_grid_db[task.snr_idx];

            SymbolFrame frame = random_frame(
                scheme, spec.symbols_per_trial,
                trial_seed(spec.seed, task.scheme_idx, snr, task.trial, 1));
            frame = awgn(frame, {snr, trial_seed(spec.seed, task.scheme_idx, snr, task.trial, 2)});

            PipelineConfig trial_cfg = cfg;
            trial_cfg.rng_seed = trial_seed(spec.seed, task.scheme_idx, snr, task.trial, 3);

            const auto t0 = std::chrono::steady_clock::now();
            const ClassificationReport report = classify(frame, trial_cfg, &stock);
            const auto t1 = std::chrono::steady_clock::now();

            Outcome& o = outcomes[k];
            o.ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            if (report.verdict && verdict_matches(scheme, *report.verdict)) {
                o.success = 1;
                o.equivalence = *report.verdict != scheme ? 1 : 0;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    SweepResult result;
    for (std::size_t s = 0; s < spec.schemes.size(); ++s)
        for (std::size_t v = 0; v < spec.snr_grid_db.size(); ++v) {
            SweepPoint pt;
            pt.scheme = spec.schemes[s].name();
            pt.snr_db = spec.snr_grid_db[v];
            pt.trials = spec.trials_per_point;
            result.points.push_back(pt);
        }
    for (std::size_t k = 0; k < tasks.size(); ++k) {
        SweepPoint& pt = result.points[tasks[k].scheme_idx * spec.snr_grid_db.size() + tasks[k].snr_idx];
        pt.successes += outcomes[k].success;
        pt.equivalence_credits += outcomes[k].equivalence;
        pt.mean_ms += outcomes[k].ms;
    }
    for (SweepPoint& pt : result.points) {
        pt.rate = double(pt.successes) / double(pt.trials);
        pt.ci = wilson_interval(pt.successes, pt.trials);
        pt.mean_ms /= double(pt.trials);
    }
    return result;
}

/// CSV with the fixed column schema. Timing is volatile, so the mean_ms
/// column is zeroed unless include_timing is set; everything else is
/// reproducible byte for byte from (spec, cfg).
inline std::string sweep_to_csv(const SweepResult& result, bool include_timing = false) {
    std::string out = "scheme,snr_db,trials,successes,rate,ci_lo,ci_hi,mean_ms\n";
    char line[256];
    for (const SweepPoint& p : result.points) {
        std::snprintf(line, sizeof line, "%s,%.2f,%zu,%zu,%.6f,%.6f,%.6f,%.3f\n",
                      p.scheme.c_str(), p.snr_db, p.trials, p.successes, p.rate, p.ci.lo, p.ci.hi,
                      include_timing ? p.mean_ms : 0.0);
        out += line;
    }
    return out;
}

inline void write_sweep_csv(const SweepResult& result, const std::string& path,
                            bool include_timing = false) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write csv: " + path);
    out << sweep_to_csv(result, include_timing);
}

struct ThresholdOptions {
    double snr_lo_db = -10.0;
    double snr_hi_db = 20.0;
    double step_db = 0.5;
    std::size_t trials = 400;  // >= 381 or a 99% Wilson lower bound is out of reach
    std::size_t symbols = 1000;
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

struct ThresholdResult {
    std::string scheme;
    double target = 0.0;
    bool attained = false;
    double snr_db = 0.0;  // lowest grid SNR whose Wilson lower bound meets target
    std::vector<SweepPoint> curve;  // every grid point evaluated, ascending SNR
};

/// Lowest grid SNR certifying the target success rate (Wilson lower bound),
/// found by bisection over the 0.5 dB grid under the usual monotonicity
/// assumption. Unattainable targets are reported, not thrown.
inline ThresholdResult find_threshold_snr(const ModulationScheme& scheme, double target,
                                          const PipelineConfig& cfg,
                                          const ThresholdOptions& opt = {}) {
    if (!(target >= 0.0 && target < 1.0))
        throw std::invalid_argument("find_threshold_snr: target must be in [0,1)");
    ThresholdResult result;
    result.scheme = scheme.name();
    result.target = target;

    const std::size_t n_grid =
        static_cast<std::size_t>(std::llround((opt.snr_hi_db - opt.snr_lo_db) / opt.step_db)) + 1;
    auto grid_snr = [&](std::size_t i) { return opt.snr_lo_db + double(i) * opt.step_db; };

    if (target <= 0.0) {
        result.attained = true;
        result.snr_db = grid_snr(0);
        return result;
    }

    std::map<std::size_t, SweepPoint> cache;
    auto eval = [&](std::size_t i) -> const SweepPoint& {
        auto it = cache.find(i);
        if (it == cache.end()) {
            SweepSpec spec;
            spec.schemes = {scheme};
            spec.snr_grid_db = {grid_snr(i)};
            spec.symbols_per_trial = opt.symbols;
            spec.trials_per_point = opt.trials;
            spec.seed = opt.seed;
            it = cache.emplace(i, run_sweep(spec, cfg, opt.threads).points.front()).first;
        }
        return it->second;
    };
    auto meets = [&](std::size_t i) { return eval(i).ci.lo >= target; };

    if (meets(n_grid - 1)) {
        if (meets(0)) {
            result.attained = true;
            result.snr_db = grid_snr(0);
        } else {
            std::size_t lo = 0, hi = n_grid - 1;  // !meets(lo), meets(hi)
            while (hi - lo > 1) {
                const std::size_t mid = lo + (hi - lo) / 2;
                (meets(mid) ? hi : lo) = mid;
            }
            result.attained = true;
            result.snr_db = grid_snr(hi);
        }
    }
    for (const auto& [i, pt] : cache) result.curve.push_back(pt);
    return result;
}

}  // namespace amc
