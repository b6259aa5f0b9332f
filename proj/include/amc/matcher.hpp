#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>

#include <json.hpp>

#include "amc/cluster.hpp"
#include "amc/sigsynth.hpp"
#include "amc/types.hpp"

namespace amc {

/// Pre-saved ideal scatter diagram with its acceptance threshold. FSK entries
/// carry a spectrum peak-count signature instead of I/Q points.
struct Template {
    std::string name;
    ModulationFamily family = ModulationFamily::Qam;
    int order = 0;
    std::vector<cpoint> points;  // unit average power; empty for FSK
    int peak_count = 0;          // FSK only
    double threshold = 0.8;

    bool is_fsk() const { return family == ModulationFamily::Fsk; }
};

struct CorrelationScore {
    double value = 0.0;
    bool estimate_valid = true;
};

namespace detail {

inline double min_pairwise_distance(const std::vector<cpoint>& pts) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            best = std::min(best, std::abs(pts[i] - pts[j]));
    return best;
}

// Greedy best-first one-to-one matching of rotated centers to template
// points; returns the mean matched similarity.
inline double match_score(const std::vector<cpoint>& rotated, const std::vector<cpoint>& tmpl,
                          double inv_sigma2) {
    const std::size_t m = tmpl.size();
    struct Entry {
        double sim;
        std::uint32_t c, t;
    };
    std::vector<Entry> entries;
    entries.reserve(m * m);
    for (std::uint32_t c = 0; c < m; ++c)
        for (std::uint32_t t = 0; t < m; ++t)
            entries.push_back({std::exp(-std::norm(rotated[c] - tmpl[t]) * inv_sigma2), c, t});
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.sim != b.sim) return a.sim > b.sim;
        if (a.c != b.c) return a.c < b.c;
        return a.t < b.t;
    });
    std::vector<bool> c_used(m, false), t_used(m, false);
    double sum = 0.0;
    std::size_t matched = 0;
    for (const Entry& e : entries) {
        if (c_used[e.c] || t_used[e.t]) continue;
        c_used[e.c] = t_used[e.t] = true;
        sum += e.sim;
        if (++matched == m) break;
    }
    return sum / double(m);
}

}  // namespace detail

/// Rotation-aligned Gaussian point-set similarity in [0,1].
/// A 1-degree rotation sweep aligns the estimate to the template; at each
/// angle every estimated center claims at most one template point (greedy
/// best-first) and contributes exp(-d^2/sigma_c^2) with sigma_c half the
/// minimum template point spacing. Order mismatch or an invalid estimate
/// scores 0 (flagged, not thrown) so a hypothesis sweep can keep going.
inline CorrelationScore correlate(const ScatterEstimate& estimate, const Template& tmpl) {
    if (!estimate.valid) return {0.0, false};
    if (tmpl.is_fsk() || tmpl.order != estimate.order ||
        estimate.centers.size() != tmpl.points.size())
        return {0.0, true};

    const double sigma_c = 0.5 * detail::min_pairwise_distance(tmpl.points);
    const double inv_sigma2 = 1.0 / (sigma_c * sigma_c);
    const std::size_t m = tmpl.points.size();

    double best = 0.0;
    std::vector<cpoint> rotated(m);
    for (int deg = 0; deg < 360; ++deg) {
        const double theta = deg * std::numbers::pi / 180.0;
        const cpoint rot(std::cos(theta), std::sin(theta));
        double upper = 0.0;  // matchless per-center best: bounds the 1-1 score
        for (std::size_t c = 0; c < m; ++c) {
            rotated[c] = estimate.centers[c] * rot;
            double mx = 0.0;
            for (std::size_t t = 0; t < m; ++t)
                mx = std::max(mx, std::exp(-std::norm(rotated[c] - tmpl.points[t]) * inv_sigma2));
            upper += mx;
        }
        if (upper / double(m) <= best) continue;
        best = std::max(best, detail::match_score(rotated, tmpl.points, inv_sigma2));
    }
    return {std::min(best, 1.0), true};
}

/// The eight Table-style stock entries plus 16PSK (needed so sweeps over the
/// full scheme list can ever produce a 16PSK verdict).
inline std::vector<Template> builtin_templates() {
    auto iq = [](const char* name, ModulationFamily f, int order, double threshold) {
        Template t;
        t.name = name;
        t.family = f;
        t.order = order;
        t.threshold = threshold;
        t.points = ideal_constellation(ModulationScheme(f, order));
        return t;
    };
    auto fsk = [](const char* name, int order, double threshold) {
        Template t;
        t.name = name;
        t.family = ModulationFamily::Fsk;
        t.order = order;
        t.peak_count = order;
        t.threshold = threshold;
        return t;
    };
    return {
        iq("4QAM", ModulationFamily::Qam, 4, 0.8),
        iq("16QAM", ModulationFamily::Qam, 16, 0.8),
        iq("64QAM", ModulationFamily::Qam, 64, 0.9),
        iq("BPSK", ModulationFamily::Psk, 2, 0.8),
        iq("QPSK", ModulationFamily::Psk, 4, 0.8),
        iq("8PSK", ModulationFamily::Psk, 8, 0.85),
        iq("16PSK", ModulationFamily::Psk, 16, 0.8),
        fsk("2FSK", 2, 0.8),
        fsk("4FSK", 4, 0.8),
    };
}

/// Winning template among those meeting their thresholds: highest score,
/// ties toward lower order, then stock order. nullopt = no template passed.
inline std::optional<std::string> decide(const std::map<std::string, double>& scores,
                                         const std::vector<Template>& templates) {
    if (scores.empty()) throw std::invalid_argument("decide: empty score map");
    const Template* best = nullptr;
    double best_score = 0.0;
    for (const Template& t : templates) {
        auto it = scores.find(t.name);
        if (it == scores.end()) continue;
        const double s = it->second;
        if (s < t.threshold - 1e-12) continue;
        if (!best || s > best_score ||
            (s == best_score && t.order < best->order)) {
            best = &t;
            best_score = s;
        }
    }
    if (!best) return std::nullopt;
    return best->name;
}

inline nlohmann::json templates_to_json(const std::vector<Template>& templates) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Template& t : templates) {
        nlohmann::json obj;
        obj["name"] = t.name;
        obj["family"] = family_name(t.family);
        obj["order"] = t.order;
        obj["threshold"] = t.threshold;
        if (t.is_fsk()) {
            obj["peak_count"] = t.peak_count;
        } else {
            nlohmann::json pts = nlohmann::json::array();
            for (const cpoint& p : t.points) pts.push_back({p.real(), p.imag()});
            obj["points"] = pts;
        }
        arr.push_back(obj);
    }
    return arr;
}

/// Parse and validate a template stock document. Rejects duplicate names,
/// non-unit average power, coincident points, and out-of-range thresholds.
inline std::vector<Template> parse_templates(const nlohmann::json& doc) {
    if (!doc.is_array()) throw std::invalid_argument("template stock: top level must be a list");
    std::vector<Template> out;
    for (const auto& obj : doc) {
        Template t;
        t.name = obj.at("name").get<std::string>();
        const std::string fam = obj.at("family").get<std::string>();
        if (fam == "QAM") t.family = ModulationFamily::Qam;
        else if (fam == "PSK") t.family = ModulationFamily::Psk;
        else if (fam == "FSK") t.family = ModulationFamily::Fsk;
        else throw std::invalid_argument("template " + t.name + ": unknown family " + fam);
        t.order = obj.at("order").get<int>();
        if (t.order < 1) throw std::invalid_argument("template " + t.name + ": bad order");
        t.threshold = obj.at("threshold").get<double>();
        if (!(t.threshold >= 0.0 && t.threshold <= 1.0))
            throw std::invalid_argument("template " + t.name + ": threshold outside [0,1]");

        if (t.family == ModulationFamily::Fsk) {
            t.peak_count = obj.at("peak_count").get<int>();
            if (t.peak_count < 1)
                throw std::invalid_argument("template " + t.name + ": bad peak_count");
        } else {
            for (const auto& p : obj.at("points"))
                t.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
            if (t.points.size() != static_cast<std::size_t>(t.order))
                throw std::invalid_argument("template " + t.name + ": point count != order");
            double power = 0.0;
            for (const cpoint& p : t.points) power += std::norm(p);
            power /= double(t.points.size());
            if (std::abs(power - 1.0) > 1e-9)
                throw std::invalid_argument("template " + t.name + ": average power " +
                                            std::to_string(power) + ", expected 1");
            if (detail::min_pairwise_distance(t.points) <= 0.0)
                throw std::invalid_argument("template " + t.name + ": coincident points");
        }
        for (const Template& prev : out)
            if (prev.name == t.name)
                throw std::invalid_argument("duplicate template name: " + t.name);
        out.push_back(std::move(t));
    }
    if (out.empty()) throw std::invalid_argument("template stock: no templates");
    return out;
}

inline std::vector<Template> load_templates(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open template file: " + path);
    nlohmann::json doc;
    in >> doc;
    return parse_templates(doc);
}

inline void save_templates(const std::vector<Template>& templates, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write template file: " + path);
    out << templates_to_json(templates).dump(2) << "\n";
}

}  // namespace amc
