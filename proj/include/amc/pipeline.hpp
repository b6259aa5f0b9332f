#pragma once

#include <chrono>
#include <fstream>
#include <map>

#include <json.hpp>

#include "amc/cluster.hpp"
#include "amc/matcher.hpp"
#include "amc/spectrum.hpp"
#include "amc/svm.hpp"
#include "amc/types.hpp"

namespace amc {

struct SpectrumParams {
    std::size_t nfft = 1024;
    double prominence = 0.5;
    std::size_t min_separation_bins = 16;  // nfft/64
};

/// Screens each order hypothesis for degenerate clusterings before its
/// templates may win the verdict. A hypothesis below the true order merges
/// real clusters (member sets split cleanly into far-apart halves); a
/// hypothesis fitted to featureless noise cuts a blob into wedges whose
/// members pile up against the cut (strong skew toward a neighbor class or
/// away from the origin). Scores are still reported for inadmissible
/// hypotheses; they are only barred from deciding.
struct OrderGuardParams {
    bool enabled = true;
    std::size_t min_class_size = 24;   // smaller classes are never flagged
    double refine_ratio_min = 0.30;    // 4-way refit WCSS ratio below this = merged
    double skew_max = 0.60;            // |skewness| above this = cut artifact
};

struct PipelineConfig {
    SvmHyperParams svm;
    SpectrumParams spectrum;
    std::vector<int> hypothesis_orders = {2, 4, 8, 16, 64};
    std::string templates_path;  // empty = built-in stock
    std::map<std::string, double> threshold_overrides;
    OrderGuardParams order_guard;
    std::size_t irregular_max_points = 1024;
    std::uint64_t rng_seed = 1;

    std::vector<Template> load_template_stock() const {
        auto stock = templates_path.empty() ? builtin_templates() : load_templates(templates_path);
        for (const auto& [name, thr] : threshold_overrides) {
            if (!(thr >= 0.0 && thr <= 1.0))
                throw std::invalid_argument("threshold override for " + name + " outside [0,1]");
            bool found = false;
            for (Template& t : stock)
                if (t.name == name) {
                    t.threshold = thr;
                    found = true;
                }
            if (!found) throw std::invalid_argument("threshold override for unknown template " + name);
        }
        return stock;
    }

    void validate() const {
        svm.validate();
        if (hypothesis_orders.empty())
            throw std::invalid_argument("config: hypothesis set must be non-empty");
        for (int m : hypothesis_orders)
            if (m < 2) throw std::invalid_argument("config: hypothesis orders must be >= 2");
        if (!(spectrum.prominence > 0.0 && spectrum.prominence <= 1.0))
            throw std::invalid_argument("config: prominence must be in (0,1]");
        if (spectrum.nfft == 0 || (spectrum.nfft & (spectrum.nfft - 1)))
            throw std::invalid_argument("config: nfft must be a power of two");
    }
};

struct HypothesisDetail {
    int order = 0;
    ScatterEstimate estimate;
    std::size_t incorrect_count = 0;  // SVM margin violators + misclassified
    bool admissible = false;
    bool skipped = false;  // not enough points for this order
};

struct ClassificationReport {
    BranchDecision branch;
    std::optional<ModulationScheme> verdict;
    std::map<std::string, double> scores;
    std::vector<HypothesisDetail> hypotheses;
    int best_hypothesis = -1;  // index into hypotheses
    std::map<std::string, double> stage_ms;
    std::string error;  // non-empty when a stage failed and forced Undecided

    bool decided() const { return verdict.has_value(); }
};

namespace detail {

inline double axis_skewness(const std::vector<cpoint>& pts, const cpoint& center,
                            const cpoint& axis) {
    const double norm = std::abs(axis);
    if (norm <= 0.0 || pts.size() < 3) return 0.0;
    const cpoint u = axis / norm;
    double m2 = 0.0, m3 = 0.0;
    double mean = 0.0;
    std::vector<double> t(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        t[i] = (pts[i] - center).real() * u.real() + (pts[i] - center).imag() * u.imag();
        mean += t[i];
    }
    mean /= double(pts.size());
    for (double v : t) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= double(pts.size());
    m3 /= double(pts.size());
    if (m2 <= 1e-30) return 0.0;
    return m3 / std::pow(m2, 1.5);
}

inline bool hypothesis_admissible(const LabeledSet& correct, int order,
                                  const OrderGuardParams& guard, std::uint64_t seed) {
    if (!guard.enabled) return true;
    std::vector<std::vector<cpoint>> classes(static_cast<std::size_t>(order));
    for (std::size_t i = 0; i < correct.size(); ++i)
        classes[correct.labels[i] - 1].push_back(correct.points[i]);

    std::vector<cpoint> centers(classes.size());
    cpoint global{};
    std::size_t total = 0;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        if (classes[c].empty()) return false;
        cpoint sum{};
        for (const cpoint& p : classes[c]) sum += p;
        centers[c] = sum / double(classes[c].size());
        global += sum;
        total += classes[c].size();
    }
    global /= double(total);

    int flagged = 0;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        const auto& members = classes[c];
        if (members.size() < guard.min_class_size) continue;

        bool bad = false;
        // merged real clusters: refitting 4 centers inside the class shrinks
        // the scatter far beyond what one mode allows
        double wcss1 = 0.0;
        for (const cpoint& p : members) wcss1 += std::norm(p - centers[c]);
        if (wcss1 > 1e-30) {
            const auto sub = kmeans(members, 4, mix_seed(seed, 0x5ade, c), 4);
            if (sub.wcss / wcss1 < guard.refine_ratio_min) bad = true;
        }
        if (!bad) {
            // cut artifacts: member mass piled against a class boundary
            std::size_t nearest = c;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t o = 0; o < centers.size(); ++o) {
                if (o == c) continue;
                const double d = std::norm(centers[o] - centers[c]);
                if (d < best) {
                    best = d;
                    nearest = o;
                }
            }
            const double toward = axis_skewness(members, centers[c], centers[nearest] - centers[c]);
            const double radial = axis_skewness(members, centers[c], centers[c] - global);
            if (std::abs(toward) > guard.skew_max || std::abs(radial) > guard.skew_max) bad = true;
        }
        if (bad) ++flagged;
    }
    return 2 * flagged <= order;
}

class StageTimer {
public:
    explicit StageTimer(std::map<std::string, double>& sink) : sink_(sink) { reset(); }
    void reset() { t0_ = std::chrono::steady_clock::now(); }
    void lap(const std::string& name) {
        const auto t1 = std::chrono::steady_clock::now();
        sink_[name] += std::chrono::duration<double, std::milli>(t1 - t0_).count();
        t0_ = t1;
    }

private:
    std::map<std::string, double>& sink_;
    std::chrono::steady_clock::time_point t0_;
};

}  // namespace detail

/// Full blind classification of one frame: spectrum branch; FSK order by
/// peak count on the regular path; otherwise per-order provisional labels ->
/// one-vs-rest SVM -> symbol filtering -> class centers -> template
/// correlation, with the verdict taken over admissible hypotheses that meet
/// their template thresholds. Stage errors degrade to Undecided.
inline ClassificationReport classify(const SymbolFrame& frame, const PipelineConfig& cfg,
                                     const std::vector<Template>* preloaded_templates = nullptr) {
    ClassificationReport report;
    detail::StageTimer timer(report.stage_ms);
    try {
        cfg.validate();
        std::vector<Template> local_stock;
        const std::vector<Template>* stock = preloaded_templates;
        if (!stock) {
            local_stock = cfg.load_template_stock();
            stock = &local_stock;
        }
        for (const Template& t : *stock) report.scores[t.name] = 0.0;

        const SpectrumEstimate spec = estimate_spectrum(frame, cfg.spectrum.nfft);
        const PeakSet peaks = detect_peaks(spec, cfg.spectrum.prominence,
                                           cfg.spectrum.min_separation_bins);
        report.branch = branch(peaks, spec);
        timer.lap("spectrum");

        if (report.branch.regular) {
            for (const Template& t : *stock)
                if (t.is_fsk() && t.peak_count == report.branch.peak_count) {
                    report.scores[t.name] = 1.0;
                    report.verdict = ModulationScheme(ModulationFamily::Fsk, t.order);
                }
            timer.lap("decide");
            return report;
        }

        std::vector<cpoint> pts(
            frame.samples.begin(),
            frame.samples.begin() +
                std::min<std::size_t>(frame.samples.size(), cfg.irregular_max_points));

        // auto gamma adapts to the per-class scale: the cloud-level median
        // heuristic divided by the hypothesized class count (class spacing
        // shrinks roughly as area/M in 2-D)
        const double base_gamma =
            cfg.svm.gamma > 0.0 ? cfg.svm.gamma : median_heuristic_gamma(pts);
        timer.lap("gram");

        std::vector<int> orders = cfg.hypothesis_orders;
        std::sort(orders.begin(), orders.end());
        orders.erase(std::unique(orders.begin(), orders.end()), orders.end());

        for (int m : orders) {
            HypothesisDetail hyp;
            hyp.order = m;
            if (pts.size() < 4 * static_cast<std::size_t>(m)) {
                hyp.skipped = true;
                report.hypotheses.push_back(std::move(hyp));
                continue;
            }
            const LabeledSet labeled =
                provisional_labels(pts, m, mix_seed(cfg.rng_seed, 0xc1a5, std::uint64_t(m)));
            std::vector<std::size_t> counts(static_cast<std::size_t>(m), 0);
            for (int l : labeled.labels) ++counts[l - 1];
            const bool any_empty = std::any_of(counts.begin(), counts.end(),
                                               [](std::size_t c) { return c == 0; });
            timer.lap("cluster");

            if (!any_empty) {
                SvmHyperParams hp = cfg.svm;
                hp.gamma = cfg.svm.gamma > 0.0 ? cfg.svm.gamma : base_gamma / double(m);
                const KernelMatrix gram(pts, hp.gamma);
                timer.lap("gram");
                const MulticlassModel model = train_multiclass(labeled, hp, &gram);
                auto [correct, incorrect] = filter_correct(model, labeled);
                hyp.incorrect_count = incorrect.size();
                timer.lap("svm");

                hyp.estimate = k_centers(correct, m);
                hyp.admissible =
                    hyp.estimate.valid &&
                    detail::hypothesis_admissible(correct, m, cfg.order_guard,
                                                  mix_seed(cfg.rng_seed, 0x9a7d, std::uint64_t(m)));
                timer.lap("centers");
            }

            for (const Template& t : *stock)
                if (!t.is_fsk() && t.order == m)
                    report.scores[t.name] = correlate(hyp.estimate, t).value;
            timer.lap("correlate");
            report.hypotheses.push_back(std::move(hyp));
        }

        std::vector<Template> candidates;
        for (const Template& t : *stock) {
            if (t.is_fsk()) continue;
            for (const HypothesisDetail& h : report.hypotheses)
                if (h.order == t.order && h.admissible) {
                    candidates.push_back(t);
                    break;
                }
        }
        if (!candidates.empty()) {
            if (auto name = decide(report.scores, candidates))
                report.verdict = ModulationScheme::parse(*name);
        }
        for (std::size_t h = 0; h < report.hypotheses.size(); ++h) {
            if (report.verdict && report.hypotheses[h].order == report.verdict->order()) {
                report.best_hypothesis = static_cast<int>(h);
                break;
            }
        }
        if (report.best_hypothesis < 0 && !report.hypotheses.empty()) {
            double best_score = -1.0;
            for (std::size_t h = 0; h < report.hypotheses.size(); ++h)
                for (const Template& t : *stock)
                    if (!t.is_fsk() && t.order == report.hypotheses[h].order &&
                        report.scores.at(t.name) > best_score) {
                        best_score = report.scores.at(t.name);
                        report.best_hypothesis = static_cast<int>(h);
                    }
        }
        timer.lap("decide");
    } catch (const std::exception& e) {
        report.verdict.reset();
        report.error = e.what();
    }
    return report;
}

inline nlohmann::json report_to_json(const ClassificationReport& report) {
    nlohmann::json j;
    j["branch"] = report.branch.regular
                      ? nlohmann::json{{"kind", "regular"}, {"peak_count", report.branch.peak_count}}
                      : nlohmann::json{{"kind", "irregular"}};
    j["verdict"] = report.verdict ? report.verdict->name() : "Undecided";
    j["scores"] = report.scores;
    nlohmann::json hyps = nlohmann::json::array();
    for (const HypothesisDetail& h : report.hypotheses) {
        nlohmann::json hj;
        hj["order"] = h.order;
        hj["skipped"] = h.skipped;
        hj["admissible"] = h.admissible;
        hj["valid_estimate"] = h.estimate.valid;
        hj["incorrect_symbols"] = h.incorrect_count;
        if (h.estimate.valid) {
            nlohmann::json centers = nlohmann::json::array();
            for (const cpoint& c : h.estimate.centers) centers.push_back({c.real(), c.imag()});
            hj["centers"] = centers;
            hj["member_counts"] = h.estimate.member_counts;
        }
        hyps.push_back(hj);
    }
    j["hypotheses"] = hyps;
    j["best_hypothesis"] = report.best_hypothesis;
    j["stage_ms"] = report.stage_ms;
    if (!report.error.empty()) j["error"] = report.error;
    return j;
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const char* where,
                                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw std::invalid_argument(std::string("config: unknown key \"") + it.key() +
                                        "\" in " + where);
    }
}

}  // namespace detail

inline PipelineConfig config_from_json(const nlohmann::json& j) {
    PipelineConfig cfg;
    detail::reject_unknown_keys(j, "top level",
                                {"svm", "spectrum", "hypothesis_orders", "templates_path",
                                 "thresholds", "order_guard", "irregular_max_points", "rng_seed"});
    if (j.contains("svm")) {
        const auto& s = j.at("svm");
        detail::reject_unknown_keys(s, "svm", {"c_reg", "gamma", "kkt_tol", "max_passes"});
        if (s.contains("c_reg")) cfg.svm.c_reg = s.at("c_reg").get<double>();
        if (s.contains("gamma")) cfg.svm.gamma = s.at("gamma").get<double>();
        if (s.contains("kkt_tol")) cfg.svm.kkt_tol = s.at("kkt_tol").get<double>();
        if (s.contains("max_passes")) cfg.svm.max_passes = s.at("max_passes").get<std::size_t>();
    }
    if (j.contains("spectrum")) {
        const auto& s = j.at("spectrum");
        detail::reject_unknown_keys(s, "spectrum", {"nfft", "prominence", "min_separation_bins"});
        if (s.contains("nfft")) cfg.spectrum.nfft = s.at("nfft").get<std::size_t>();
        if (s.contains("prominence")) cfg.spectrum.prominence = s.at("prominence").get<double>();
        if (s.contains("min_separation_bins"))
            cfg.spectrum.min_separation_bins = s.at("min_separation_bins").get<std::size_t>();
    }
    if (j.contains("hypothesis_orders"))
        cfg.hypothesis_orders = j.at("hypothesis_orders").get<std::vector<int>>();
    if (j.contains("templates_path")) cfg.templates_path = j.at("templates_path").get<std::string>();
    if (j.contains("thresholds"))
        cfg.threshold_overrides =
            j.at("thresholds").get<std::map<std::string, double>>();
    if (j.contains("order_guard")) {
        const auto& g = j.at("order_guard");
        detail::reject_unknown_keys(g, "order_guard",
                                    {"enabled", "min_class_size", "refine_ratio_min", "skew_max"});
        if (g.contains("enabled")) cfg.order_guard.enabled = g.at("enabled").get<bool>();
        if (g.contains("min_class_size"))
            cfg.order_guard.min_class_size = g.at("min_class_size").get<std::size_t>();
        if (g.contains("refine_ratio_min"))
            cfg.order_guard.refine_ratio_min = g.at("refine_ratio_min").get<double>();
        if (g.contains("skew_max")) cfg.order_guard.skew_max = g.at("skew_max").get<double>();
    }
    if (j.contains("irregular_max_points"))
        cfg.irregular_max_points = j.at("irregular_max_points").get<std::size_t>();
    if (j.contains("rng_seed")) cfg.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    cfg.validate();
    return cfg;
}

inline PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    return config_from_json(j);
}

}  // namespace amc
