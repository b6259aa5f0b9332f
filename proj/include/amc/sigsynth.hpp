#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "amc/types.hpp"

namespace amc {

namespace detail {

inline unsigned gray_decode(unsigned g) {
    unsigned b = 0;
    for (; g; g >>= 1) b ^= g;
    return b;
}

}  // namespace detail

/// Ideal constellation of a QAM or PSK scheme, scaled to unit average power.
/// Index k maps to the point the modulator emits for data symbol k.
/// QAM uses a Gray-mapped square grid; PSK points sit on the unit circle
/// starting at angle 0. FSK has no I/Q constellation (tones instead).
inline std::vector<cpoint> ideal_constellation(const ModulationScheme& scheme) {
    const int m = scheme.order();
    std::vector<cpoint> pts(static_cast<std::size_t>(m));
    switch (scheme.family()) {
        case ModulationFamily::Psk: {
            for (int k = 0; k < m; ++k) {
                const double phi = 2.0 * std::numbers::pi * k / m;
                pts[k] = {std::cos(phi), std::sin(phi)};
            }
            break;
        }
        case ModulationFamily::Qam: {
            const int side = static_cast<int>(std::lround(std::sqrt(double(m))));
            int bits_per_axis = 0;
            while ((1 << bits_per_axis) < side) ++bits_per_axis;
            // average power of the +/-1, +/-3, ... grid
            const double scale = 1.0 / std::sqrt(2.0 * (side * side - 1) / 3.0);
            for (int k = 0; k < m; ++k) {
                const unsigned gi = static_cast<unsigned>(k) >> bits_per_axis;
                const unsigned gq = static_cast<unsigned>(k) & unsigned(side - 1);
                const int ai = 2 * static_cast<int>(detail::gray_decode(gi)) - (side - 1);
                const int aq = 2 * static_cast<int>(detail::gray_decode(gq)) - (side - 1);
                pts[k] = {ai * scale, aq * scale};
            }
            break;
        }
        case ModulationFamily::Fsk:
            throw std::invalid_argument("FSK has no I/Q constellation");
    }
    return pts;
}

/// Map data symbol indices onto baseband samples.
/// QAM/PSK: one constellation point per symbol.
/// FSK: per-symbol complex tone at f_k = (k - (M-1)/2) * symbol_rate,
/// sampled at 4*M samples per symbol so all tones stay well inside Nyquist.
inline SymbolFrame modulate(const ModulationScheme& scheme,
                            const std::vector<int>& data_symbols,
                            double symbol_rate = 1.0) {
    if (data_symbols.empty()) throw std::invalid_argument("modulate: empty symbol sequence");
    const int m = scheme.order();
    for (int s : data_symbols)
        if (s < 0 || s >= m)
            throw std::out_of_range("modulate: symbol index " + std::to_string(s) +
                                    " out of range for order " + std::to_string(m));

    SymbolFrame frame;
    frame.scheme_truth = scheme;
    frame.symbol_rate = symbol_rate;

    if (scheme.family() == ModulationFamily::Fsk) {
        const int sps = 4 * m;
        const double fs = sps * symbol_rate;
        frame.samples_per_symbol = sps;
        frame.samples.reserve(data_symbols.size() * sps);
        std::size_t n = 0;
        for (int s : data_symbols) {
            const double fk = (s - (m - 1) / 2.0) * symbol_rate;
            for (int i = 0; i < sps; ++i, ++n) {
                const double phase = 2.0 * std::numbers::pi * fk * (double(n) / fs);
                frame.samples.emplace_back(std::cos(phase), std::sin(phase));
            }
        }
    } else {
        const auto constellation = ideal_constellation(scheme);
        frame.samples_per_symbol = 1;
        frame.samples.reserve(data_symbols.size());
        for (int s : data_symbols) frame.samples.push_back(constellation[s]);
    }
    return frame;
}

/// Uniform random data symbols -> modulated frame. Deterministic given seed.
inline SymbolFrame random_frame(const ModulationScheme& scheme, std::size_t n_symbols,
                                std::uint64_t seed, double symbol_rate = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dist(0, scheme.order() - 1);
    std::vector<int> data(n_symbols);
    for (auto& s : data) s = dist(rng);
    return modulate(scheme, data, symbol_rate);
}

/// Add circularly symmetric complex Gaussian noise with per-sample variance
/// sigma^2 = 10^(-snr_db/10). Assumes the input is at unit average power.
/// snr_db = +inf passes the frame through untouched.
inline SymbolFrame awgn(const SymbolFrame& frame, const ChannelConfig& cfg) {
    if (!std::isfinite(cfg.snr_db)) {
        if (cfg.snr_db > 0) return frame;  // no-noise sentinel
        throw std::invalid_argument("awgn: snr_db must be finite or +inf");
    }
    const double sigma = std::sqrt(std::pow(10.0, -cfg.snr_db / 10.0) / 2.0);  // per dimension
    std::mt19937_64 rng(cfg.rng_seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    SymbolFrame out = frame;
    for (auto& s : out.samples) s += cpoint(gauss(rng), gauss(rng));
    return out;
}

/// Pure-noise frame: i.i.d. CN(0,1) samples (unit average power).
inline SymbolFrame noise_frame(std::size_t n, std::uint64_t seed) {
    SymbolFrame frame;
    frame.samples.resize(n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    for (auto& s : frame.samples) s = cpoint(gauss(rng), gauss(rng));
    return frame;
}

}  // namespace amc
