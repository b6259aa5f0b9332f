// Acceptance suite: one test case per release criterion, each printing a
// single PASS/FAIL line. Heavier Monte Carlo settings than the unit tests.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <random>

#include "amc/frame_io.hpp"
#include "amc/pipeline.hpp"
#include "amc/sweep.hpp"
#include "support/eigen.hpp"
#include "support/helpers.hpp"
#include "support/qp_reference.hpp"

using namespace amc;
using namespace amc_test;

namespace {

void verdict_line(const char* id, const char* name, bool pass) {
    std::printf("[ACCEPTANCE] %s %s: %s\n", id, name, pass ? "PASS" : "FAIL");
    std::fflush(stdout);
}

// deterministic per-seed map, evaluated on all cores
template <typename Fn>
auto over_seeds(int n, Fn fn) {
    using R = decltype(fn(0));
    std::vector<R> results(n);
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int s = next.fetch_add(1);
            if (s >= n) return;
            results[s] = fn(s);
        }
    };
    const unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return results;
}

const std::vector<ModulationScheme>& all_schemes() {
    static const std::vector<ModulationScheme> schemes = {
        {ModulationFamily::Qam, 4},  {ModulationFamily::Qam, 16}, {ModulationFamily::Qam, 64},
        {ModulationFamily::Psk, 2},  {ModulationFamily::Psk, 4},  {ModulationFamily::Psk, 8},
        {ModulationFamily::Psk, 16}, {ModulationFamily::Fsk, 2},  {ModulationFamily::Fsk, 4},
    };
    return schemes;
}

}  // namespace

TEST_CASE("dual solver tracks the reference QP", "[acceptance][c1]") {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20260101);
    std::uniform_int_distribution<std::size_t> size(2, 12);
    const double c_grid[] = {0.1, 1.0, 10.0};

    struct Instance {
        LabeledSet data;
        double c;
    };
    std::vector<Instance> instances;
    for (int rep = 0; rep < 500; ++rep)
        instances.push_back({random_binary_instance(rng, size(rng)), c_grid[rep % 3]});

    std::atomic<int> objective_bad{0}, constraint_bad{0};
    const auto ok = over_seeds(int(instances.size()), [&](int i) {
        const auto& inst = instances[i];
        const double gamma = median_heuristic_gamma(inst.data.points);
        SvmHyperParams hp;
        hp.c_reg = inst.c;
        hp.gamma = gamma;
        hp.kkt_tol = 1e-5;
        const auto sol = solve_dual(inst.data, hp);

        double alpha_y = 0.0;
        bool box_ok = true;
        for (std::size_t k = 0; k < inst.data.size(); ++k) {
            if (sol.alphas[k] < 0.0 || sol.alphas[k] > inst.c) box_ok = false;
            alpha_y += sol.alphas[k] * inst.data.labels[k];
        }
        if (!box_ok || std::abs(alpha_y) > double(inst.data.size()) * 1e-3) ++constraint_bad;

        const auto ref = solve_reference_qp(inst.data, inst.c, gamma);
        const double got = dual_objective(sol.alphas, inst.data, gamma);
        if (std::abs(got - ref.objective) / (1.0 + std::abs(ref.objective)) > 1e-4)
            ++objective_bad;
        return 0;
    });
    (void)ok;
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const bool pass = objective_bad == 0 && constraint_bad == 0 && elapsed < 30.0;
    std::printf("  500 instances, %d objective misses, %d constraint misses, %.1f s\n",
                objective_bad.load(), constraint_bad.load(), elapsed);
    verdict_line("C1", "qp-oracle-equivalence", pass);
    CHECK(objective_bad == 0);
    CHECK(constraint_bad == 0);
    CHECK(elapsed < 30.0);
}

TEST_CASE("kernel identities and Gram PSD", "[acceptance][c2]") {
    std::mt19937_64 rng(777);
    std::normal_distribution<double> gauss(0.0, 1.0);
    bool identities = true;
    for (int rep = 0; rep < 1000; ++rep) {
        const cpoint x(gauss(rng), gauss(rng)), z(gauss(rng), gauss(rng));
        const double gamma = 0.1 + std::abs(gauss(rng));
        if (rbf_kernel(x, x, gamma) != 1.0) identities = false;
        if (rbf_kernel(x, z, gamma) != rbf_kernel(z, x, gamma)) identities = false;
        const double v = rbf_kernel(x, z, gamma);
        if (!(v > 0.0 && v <= 1.0)) identities = false;
    }

    std::vector<std::vector<cpoint>> sets(100);
    for (auto& pts : sets) {
        pts.resize(50);
        for (auto& p : pts) p = {gauss(rng), gauss(rng)};
    }
    const auto eigs = over_seeds(100, [&](int i) {
        const auto& pts = sets[i];
        KernelMatrix gram(pts, median_heuristic_gamma(pts));
        std::vector<double> dense(50 * 50);
        for (std::size_t r = 0; r < 50; ++r)
            for (std::size_t c = 0; c < 50; ++c) dense[r * 50 + c] = gram.at(r, c);
        return min_eigenvalue_symmetric(dense, 50);
    });
    double worst = 0.0;
    for (double e : eigs) worst = std::min(worst, e);

    const bool pass = identities && worst >= -1e-8;
    std::printf("  min Gram eigenvalue across 100 sets: %.3g\n", worst);
    verdict_line("C2", "kernel-identities", pass);
    CHECK(identities);
    CHECK(worst >= -1e-8);
}

TEST_CASE("spectrum branch accuracy", "[acceptance][c3]") {
    PipelineConfig cfg;
    bool pass = true;
    for (const auto& scheme : all_schemes()) {
        const bool is_fsk = scheme.family() == ModulationFamily::Fsk;
        const double snr = is_fsk ? 5.0 : 0.0;
        const auto hits = over_seeds(100, [&](int s) {
            auto frame = random_frame(scheme, 1000, mix_seed(3100, scheme.order(), s));
            frame = awgn(frame, {snr, mix_seed(3200, scheme.order(), s)});
            const auto spec = estimate_spectrum(frame, cfg.spectrum.nfft);
            const auto decision =
                branch(detect_peaks(spec, cfg.spectrum.prominence, cfg.spectrum.min_separation_bins),
                       spec);
            if (is_fsk) return decision.regular && decision.peak_count == scheme.order() ? 1 : 0;
            return decision.regular ? 0 : 1;
        });
        int good = 0;
        for (int h : hits) good += h;
        std::printf("  %s at %+.0f dB: %d/100 branch correctly\n", scheme.name().c_str(), snr,
                    good);
        if (good < 99) pass = false;
    }
    verdict_line("C3", "spectrum-branch", pass);
    CHECK(pass);
}

TEST_CASE("SVM filtering and center extraction reproduce the reference scenario",
          "[acceptance][c4]") {
    const ModulationScheme qam4(ModulationFamily::Qam, 4);
    const auto ideal = ideal_constellation(qam4);

    // (a) more filtered symbols at -4 dB than at 3 dB, means over 50 matched seeds
    auto incorrect_count = [&](int seed, double snr) {
        auto frame = random_frame(qam4, 1000, mix_seed(4100, seed));
        frame = awgn(frame, {snr, mix_seed(4200, seed, std::uint64_t(snr + 50))});
        const auto labeled = provisional_labels(frame.samples, 4, mix_seed(4300, seed));
        SvmHyperParams hp;
        hp.gamma = median_heuristic_gamma(labeled.points) / 4.0;
        const KernelMatrix gram(labeled.points, hp.gamma);
        const auto model = train_multiclass(labeled, hp, &gram);
        return double(filter_correct(model, labeled).second.size());
    };
    const auto low = over_seeds(50, [&](int s) { return incorrect_count(s, -4.0); });
    const auto high = over_seeds(50, [&](int s) { return incorrect_count(s, 3.0); });
    double mean_low = 0.0, mean_high = 0.0;
    for (int s = 0; s < 50; ++s) {
        mean_low += low[s] / 50.0;
        mean_high += high[s] / 50.0;
    }

    // (b) centers at 3 dB within 0.1 of the constellation in >= 95% of seeds,
    // up to the global rotation a blind estimator cannot observe (the raw
    // absolute-frame count is reported alongside)
    const auto center_hits = over_seeds(100, [&](int s) {
        auto frame = random_frame(qam4, 1000, mix_seed(4400, s));
        frame = awgn(frame, {3.0, mix_seed(4500, s)});
        const auto labeled = provisional_labels(frame.samples, 4, mix_seed(4600, s));
        SvmHyperParams hp;
        hp.gamma = median_heuristic_gamma(labeled.points) / 4.0;
        const KernelMatrix gram(labeled.points, hp.gamma);
        const auto model = train_multiclass(labeled, hp, &gram);
        const auto est = k_centers(filter_correct(model, labeled).first, 4);
        if (!est.valid) return 0;
        const int absolute = max_center_error(est.centers, ideal) < 0.1 ? 1 : 0;
        const int aligned = aligned_max_center_error(est.centers, ideal) < 0.1 ? 1 : 0;
        return absolute + 2 * aligned;
    });
    int good_abs = 0, good_aligned = 0;
    for (int h : center_hits) {
        good_abs += h & 1;
        good_aligned += h >> 1;
    }

    const bool pass = mean_low > mean_high && good_aligned >= 95;
    std::printf("  filtered symbols: %.1f at -4 dB vs %.1f at 3 dB\n", mean_low, mean_high);
    std::printf("  centers within 0.1: %d/100 rotation-aligned (%d/100 absolute)\n",
                good_aligned, good_abs);
    verdict_line("C4", "filtering-and-centers", pass);
    CHECK(mean_low > mean_high);
    CHECK(good_aligned >= 95);
}

TEST_CASE("diagonal dominance of template scores at 3 dB", "[acceptance][c5]") {
    PipelineConfig cfg;
    const auto stock = cfg.load_template_stock();
    auto template_named = [&](const std::string& n) -> const Template& {
        for (const auto& t : stock)
            if (t.name == n) return t;
        throw std::runtime_error("missing " + n);
    };
    auto equivalent_pair = [](const std::string& a, const std::string& b) {
        return (a == "4QAM" && b == "QPSK") || (a == "QPSK" && b == "4QAM");
    };

    bool pass = true;
    for (const auto& scheme : all_schemes()) {
        const std::string mine = scheme.name();
        const auto runs = over_seeds(100, [&](int s) {
            auto frame = random_frame(scheme, 1000, mix_seed(5100, scheme.order(), s));
            frame = awgn(frame, {3.0, mix_seed(5200, scheme.order(), s)});
            PipelineConfig trial = cfg;
            trial.rng_seed = mix_seed(5300, scheme.order(), s);
            return classify(frame, trial, &stock).scores;
        });

        double mine_mean = 0.0;
        int passing = 0;
        for (const auto& scores : runs) {
            const double v = scores.at(mine);
            mine_mean += v / double(runs.size());
            if (v >= template_named(mine).threshold) ++passing;
        }
        bool dominant = true;
        for (const auto& rival : stock) {
            if (rival.name == mine || rival.order != scheme.order()) continue;
            if (equivalent_pair(rival.name, mine)) continue;
            double rival_mean = 0.0;
            for (const auto& scores : runs) rival_mean += scores.at(rival.name) / double(runs.size());
            if (mine_mean <= rival_mean) dominant = false;
        }
        std::printf("  %s: mean score %.3f, >= threshold in %d/100, dominant=%s\n", mine.c_str(),
                    mine_mean, passing, dominant ? "yes" : "no");
        if (!dominant || passing < 95) pass = false;
    }
    verdict_line("C5", "score-diagonal-dominance", pass);
    CHECK(pass);
}

TEST_CASE("success-rate thresholds band and order correctly", "[acceptance][c6]") {
    const auto t0 = std::chrono::steady_clock::now();
    PipelineConfig cfg;
    ThresholdOptions opt;
    opt.trials = 400;
    opt.seed = 6001;

    std::map<std::string, ThresholdResult> thresholds;
    for (const char* name : {"4FSK", "2FSK", "16QAM", "64QAM", "8PSK", "16PSK"}) {
        thresholds[name] = find_threshold_snr(ModulationScheme::parse(name), 0.99, cfg, opt);
        const auto& r = thresholds[name];
        std::printf("  %s 99%% threshold: %s%.1f dB\n", name, r.attained ? "" : "unattained, ",
                    r.attained ? r.snr_db : 0.0);
        std::fflush(stdout);
    }

    // saturation: every scheme >= 99% observed at 15 dB
    SweepSpec sat;
    sat.schemes = all_schemes();
    sat.snr_grid_db = {15.0};
    sat.symbols_per_trial = 1000;
    sat.trials_per_point = 400;
    sat.seed = 6002;
    const auto sat_result = run_sweep(sat, cfg);
    bool saturation = true;
    for (const auto& p : sat_result.points) {
        std::printf("  %s at 15 dB: %zu/%zu\n", p.scheme.c_str(), p.successes, p.trials);
        if (p.rate < 0.99) saturation = false;
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const unsigned cores = std::max(1u, std::thread::hardware_concurrency());
    // 15-minute budget on a desktop-class 8-thread machine, held as a
    // core-second budget so constrained CI boxes measure the same work
    const double core_budget = 15.0 * 60.0 * 8.0;
    const bool runtime_ok = cores >= 8 ? wall <= 900.0 : wall * cores <= core_budget;
    std::printf("  runtime %.0f s on %u cores (budget %s)\n", wall, cores,
                runtime_ok ? "met" : "exceeded");

    const bool all_attained = std::all_of(thresholds.begin(), thresholds.end(),
                                          [](const auto& kv) { return kv.second.attained; });
    bool banded = false, fsk_order = false, qam_order = false, psk_order = false;
    if (all_attained) {
        banded = thresholds["4FSK"].snr_db >= 2.1 - 2.0 && thresholds["4FSK"].snr_db <= 2.1 + 6.0;
        fsk_order = thresholds["2FSK"].snr_db > thresholds["4FSK"].snr_db;
        qam_order = thresholds["16QAM"].snr_db < thresholds["64QAM"].snr_db;
        psk_order = thresholds["8PSK"].snr_db < thresholds["16PSK"].snr_db;
    }
    const bool pass =
        all_attained && banded && fsk_order && qam_order && psk_order && saturation && runtime_ok;
    verdict_line("C6", "threshold-bands-and-ordering", pass);
    CHECK(all_attained);
    CHECK(banded);
    CHECK(fsk_order);
    CHECK(qam_order);
    CHECK(psk_order);
    CHECK(saturation);
    CHECK(runtime_ok);
}

TEST_CASE("sweeps reproduce byte for byte", "[acceptance][c7]") {
    SweepSpec spec;
    spec.schemes = {{ModulationFamily::Qam, 4}, {ModulationFamily::Fsk, 4}};
    spec.snr_grid_db = {0.0, 10.0};
    spec.symbols_per_trial = 1000;
    spec.trials_per_point = 20;
    spec.seed = 424242;
    PipelineConfig cfg;

    const std::string a = sweep_to_csv(run_sweep(spec, cfg, 1));
    const std::string b = sweep_to_csv(run_sweep(spec, cfg, 2));
    const std::string c = sweep_to_csv(run_sweep(spec, cfg, 2));
    bool library_ok = a == b && b == c;

    // the installed binary behaves the same way
    bool cli_ok = true;
#ifdef AMC_CLI_PATH
    auto run_cli = [&](const char* out, int threads) {
        char cmd[512];
        std::snprintf(cmd, sizeof cmd,
                      "%s sweep --schemes 4QAM,4FSK --snr 0,10 --symbols 1000 --trials 20 "
                      "--seed 424242 --threads %d --out %s > /dev/null",
                      AMC_CLI_PATH, threads, out);
        return std::system(cmd) == 0;
    };
    auto slurp = [](const char* path) {
        std::ifstream in(path, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    };
    cli_ok = run_cli("c7_a.csv", 1) && run_cli("c7_b.csv", 2);
    const std::string fa = slurp("c7_a.csv"), fb = slurp("c7_b.csv");
    cli_ok = cli_ok && !fa.empty() && fa == fb;
    std::remove("c7_a.csv");
    std::remove("c7_b.csv");
#endif

    const bool pass = library_ok && cli_ok;
    verdict_line("C7", "sweep-determinism", pass);
    CHECK(library_ok);
    CHECK(cli_ok);
}

TEST_CASE("pure noise is rejected", "[acceptance][c8]") {
    PipelineConfig cfg;
    const auto stock = cfg.load_template_stock();
    const auto undecided = over_seeds(100, [&](int s) {
        const auto frame = noise_frame(1000, mix_seed(8100, s));
        PipelineConfig trial = cfg;
        trial.rng_seed = mix_seed(8200, s);
        const auto report = classify(frame, trial, &stock);
        return report.decided() ? 0 : 1;
    });
    int rejected = 0;
    for (int u : undecided) rejected += u;
    std::printf("  %d/100 noise frames rejected as Undecided\n", rejected);
    verdict_line("C8", "noise-rejection", rejected >= 90);
    CHECK(rejected >= 90);
}
