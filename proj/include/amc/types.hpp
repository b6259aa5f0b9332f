#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace amc {

using cpoint = std::complex<double>;

enum class ModulationFamily { Qam, Psk, Fsk };

inline const char* family_name(ModulationFamily f) {
    switch (f) {
        case ModulationFamily::Qam: return "QAM";
        case ModulationFamily::Psk: return "PSK";
        case ModulationFamily::Fsk: return "FSK";
    }
    return "?";
}

/// A modulation scheme identified by family and order. Only the orders the
/// classifier's template stock knows about are constructible.
class ModulationScheme {
public:
    ModulationScheme(ModulationFamily family, int order)
        : family_(family), order_(order) {
        if (!supported(family, order))
            throw std::invalid_argument("unsupported modulation: " +
                                        std::string(family_name(family)) + "-" +
                                        std::to_string(order));
    }

    static bool supported(ModulationFamily family, int order) {
        switch (family) {
            case ModulationFamily::Qam: return order == 4 || order == 16 || order == 64;
            case ModulationFamily::Psk: return order == 2 || order == 4 || order == 8 || order == 16;
            case ModulationFamily::Fsk: return order == 2 || order == 4;
        }
        return false;
    }

    ModulationFamily family() const { return family_; }
    int order() const { return order_; }

    // "4QAM", "BPSK", "QPSK", "8PSK", "2FSK", ...
    std::string name() const {
        if (family_ == ModulationFamily::Psk) {
            if (order_ == 2) return "BPSK";
            if (order_ == 4) return "QPSK";
        }
        return std::to_string(order_) + family_name(family_);
    }

    static ModulationScheme parse(const std::string& s);

    friend bool operator==(const ModulationScheme& a, const ModulationScheme& b) {
        return a.family_ == b.family_ && a.order_ == b.order_;
    }
    friend bool operator!=(const ModulationScheme& a, const ModulationScheme& b) {
        return !(a == b);
    }

private:
    ModulationFamily family_;
    int order_;
};

inline ModulationScheme ModulationScheme::parse(const std::string& s) {
    if (s == "BPSK") return {ModulationFamily::Psk, 2};
    if (s == "QPSK") return {ModulationFamily::Psk, 4};
    auto tail = [&](const char* suffix, ModulationFamily f) -> std::optional<ModulationScheme> {
        auto pos = s.find(suffix);
        if (pos == std::string::npos || pos == 0 || pos + 3 != s.size()) return std::nullopt;
        int order = 0;
        try {
            order = std::stoi(s.substr(0, pos));
        } catch (...) {
            return std::nullopt;
        }
        if (!supported(f, order)) return std::nullopt;
        return ModulationScheme(f, order);
    };
    for (auto [suffix, fam] : {std::pair{"QAM", ModulationFamily::Qam},
                               std::pair{"PSK", ModulationFamily::Psk},
                               std::pair{"FSK", ModulationFamily::Fsk}}) {
        if (auto m = tail(suffix, fam)) return *m;
    }
    throw std::invalid_argument("unknown modulation scheme: " + s);
}

/// A block of complex baseband samples. QAM/PSK frames carry one sample per
/// symbol; FSK frames carry the oversampled tone waveform.
struct SymbolFrame {
    std::vector<cpoint> samples;
    std::optional<ModulationScheme> scheme_truth;  // absent in blind use
    double symbol_rate = 1.0;
    int samples_per_symbol = 1;

    std::size_t size() const { return samples.size(); }
};

struct ChannelConfig {
    double snr_db = 0.0;  // +infinity disables the noise entirely
    std::uint64_t rng_seed = 0;
};

/// 2-D labeled point set. Labels are 1..M for multiclass training and +/-1
/// for a binary problem.
struct LabeledSet {
    std::vector<cpoint> points;
    std::vector<int> labels;

    std::size_t size() const { return points.size(); }
};

// splitmix64; used everywhere a derived deterministic seed is needed.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return mix_seed(a ^ mix_seed(b));
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b), c);
}

}  // namespace amc
