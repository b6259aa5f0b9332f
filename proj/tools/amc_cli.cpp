// Command-line front end: frame synthesis, blind classification, Monte Carlo
// success-rate sweeps, threshold search, and template stock management.

#include <iostream>

#include <CLI11.hpp>

#include "amc/frame_io.hpp"
#include "amc/pipeline.hpp"
#include "amc/sweep.hpp"

namespace {

std::vector<double> parse_snr_range(const std::string& text) {
    // "lo:hi:step" or a comma-separated list
    std::vector<double> grid;
    if (text.find(':') != std::string::npos) {
        double lo, hi, step;
        if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0.0)
            throw CLI::ValidationError("--snr expects lo:hi:step");
        const auto n = static_cast<std::size_t>(std::llround((hi - lo) / step));
        for (std::size_t i = 0; i <= n; ++i) grid.push_back(lo + double(i) * step);
    } else {
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
    }
    if (grid.empty()) throw CLI::ValidationError("--snr produced an empty grid");
    return grid;
}

std::vector<amc::ModulationScheme> parse_schemes(const std::string& text) {
    std::vector<amc::ModulationScheme> schemes;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) schemes.push_back(amc::ModulationScheme::parse(item));
    return schemes;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Blind modulation classification toolkit"};
    app.require_subcommand(1);

    std::string config_path;

    // --- synth ---
    auto* synth = app.add_subcommand("synth", "Generate a modulated frame file");
    std::string synth_scheme, synth_out;
    std::size_t synth_symbols = 1000;
    double synth_snr = std::numeric_limits<double>::infinity();
    double synth_symbol_rate = 1.0;
    std::uint64_t synth_seed = 1;
    synth->add_option("--scheme", synth_scheme, "Modulation scheme, e.g. 16QAM, QPSK, 4FSK")
        ->required();
    synth->add_option("--symbols", synth_symbols, "Number of data symbols")->required();
    synth->add_option("--snr", synth_snr, "Channel SNR in dB (omit for noiseless)");
    synth->add_option("--seed", synth_seed, "RNG seed");
    synth->add_option("--symbol-rate", synth_symbol_rate, "Symbol rate in Hz (FSK tone spacing)");
    synth->add_option("--out", synth_out, "Output frame file")->required();

    // --- classify ---
    auto* cls = app.add_subcommand("classify", "Classify a frame file, JSON report to stdout");
    std::string cls_in;
    cls->add_option("--in", cls_in, "Input frame file")->required();
    cls->add_option("--config", config_path, "Pipeline config JSON");

    // --- sweep ---
    auto* sweep = app.add_subcommand("sweep", "Monte Carlo success-rate sweep to CSV");
    std::string sweep_schemes, sweep_snr, sweep_out;
    std::size_t sweep_symbols = 1000, sweep_trials = 200;
    std::uint64_t sweep_seed = 1;
    unsigned sweep_threads = 0;
    bool sweep_timing = false;
    sweep->add_option("--schemes", sweep_schemes, "Comma-separated scheme list")->required();
    sweep->add_option("--snr", sweep_snr, "SNR grid, lo:hi:step or comma list")->required();
    sweep->add_option("--symbols", sweep_symbols, "Symbols per trial");
    sweep->add_option("--trials", sweep_trials, "Trials per (scheme, SNR) point");
    sweep->add_option("--seed", sweep_seed, "Master seed");
    sweep->add_option("--threads", sweep_threads, "Worker threads (0 = all cores)");
    sweep->add_flag("--timing", sweep_timing, "Emit measured mean_ms (not reproducible)");
    sweep->add_option("--out", sweep_out, "Output CSV path")->required();
    sweep->add_option("--config", config_path, "Pipeline config JSON");

    // --- threshold ---
    auto* thr = app.add_subcommand("threshold", "Lowest SNR certifying a target success rate");
    std::string thr_scheme, thr_out;
    double thr_target = 0.99;
    amc::ThresholdOptions thr_opt;
    thr->add_option("--scheme", thr_scheme, "Modulation scheme")->required();
    thr->add_option("--target", thr_target, "Target success rate in [0,1)");
    thr->add_option("--trials", thr_opt.trials, "Trials per grid point");
    thr->add_option("--symbols", thr_opt.symbols, "Symbols per trial");
    thr->add_option("--snr-lo", thr_opt.snr_lo_db, "Grid lower edge, dB");
    thr->add_option("--snr-hi", thr_opt.snr_hi_db, "Grid upper edge, dB");
    thr->add_option("--step", thr_opt.step_db, "Grid step, dB");
    thr->add_option("--seed", thr_opt.seed, "Master seed");
    thr->add_option("--threads", thr_opt.threads, "Worker threads (0 = all cores)");
    thr->add_option("--out", thr_out, "Write the evaluated curve as CSV");
    thr->add_option("--config", config_path, "Pipeline config JSON");

    // --- templates ---
    auto* tpl = app.add_subcommand("templates", "Dump or validate the template stock");
    std::string tpl_dump, tpl_validate;
    tpl->add_option("--dump", tpl_dump, "Write the built-in stock to a file");
    tpl->add_option("--validate", tpl_validate, "Validate a template stock file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            const auto scheme = amc::ModulationScheme::parse(synth_scheme);
            amc::SymbolFrame frame =
                amc::random_frame(scheme, synth_symbols, amc::mix_seed(synth_seed, 1),
                                  synth_symbol_rate);
            frame = amc::awgn(frame, {synth_snr, amc::mix_seed(synth_seed, 2)});
            amc::write_frame(frame, synth_out);
            std::cout << "wrote " << frame.samples.size() << " samples to " << synth_out << "\n";
            return 0;
        }

        if (*cls) {
            amc::PipelineConfig cfg;
            if (!config_path.empty()) cfg = amc::load_config(config_path);
            const amc::SymbolFrame frame = amc::read_frame(cls_in);
            const amc::ClassificationReport report = amc::classify(frame, cfg);
            std::cout << amc::report_to_json(report).dump(2) << "\n";
            return report.decided() ? 0 : 2;
        }

        if (*sweep) {
            amc::PipelineConfig cfg;
            if (!config_path.empty()) cfg = amc::load_config(config_path);
            amc::SweepSpec spec;
            spec.schemes = parse_schemes(sweep_schemes);
            spec.snr_grid_db = parse_snr_range(sweep_snr);
            spec.symbols_per_trial = sweep_symbols;
            spec.trials_per_point = sweep_trials;
            spec.seed = sweep_seed;
            const amc::SweepResult result = amc::run_sweep(spec, cfg, sweep_threads);
            amc::write_sweep_csv(result, sweep_out, sweep_timing);
            std::cout << "wrote " << result.points.size() << " points to " << sweep_out << "\n";
            return 0;
        }

        if (*thr) {
            amc::PipelineConfig cfg;
            if (!config_path.empty()) cfg = amc::load_config(config_path);
            const auto scheme = amc::ModulationScheme::parse(thr_scheme);
            const amc::ThresholdResult result =
                amc::find_threshold_snr(scheme, thr_target, cfg, thr_opt);
            if (result.attained)
                std::cout << result.scheme << " reaches " << thr_target * 100.0 << "% at "
                          << result.snr_db << " dB\n";
            else
                std::cout << result.scheme << " does not reach " << thr_target * 100.0
                          << "% within the grid (unattained)\n";
            for (const auto& p : result.curve)
                std::cout << "  " << p.snr_db << " dB: " << p.successes << "/" << p.trials
                          << " (ci " << p.ci.lo << ".." << p.ci.hi << ")\n";
            if (!thr_out.empty()) {
                amc::SweepResult curve;
                curve.points = result.curve;
                amc::write_sweep_csv(curve, thr_out);
            }
            return result.attained ? 0 : 2;
        }

        if (*tpl) {
            if (!tpl_dump.empty()) {
                amc::save_templates(amc::builtin_templates(), tpl_dump);
                std::cout << "wrote template stock to " << tpl_dump << "\n";
            }
            if (!tpl_validate.empty()) {
                const auto stock = amc::load_templates(tpl_validate);
                std::cout << tpl_validate << ": " << stock.size() << " templates ok\n";
            }
            if (tpl_dump.empty() && tpl_validate.empty()) {
                std::cerr << "templates: need --dump or --validate\n";
                return 1;
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
