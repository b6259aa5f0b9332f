#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "amc/types.hpp"

namespace amc {

namespace detail {

// In-place iterative radix-2 FFT. n must be a power of two.
inline void fft_radix2(std::vector<cpoint>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / double(len);
        const cpoint wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cpoint w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cpoint u = a[i + k];
                const cpoint v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace detail

/// Averaged magnitude spectrum, DC-centered.
struct SpectrumEstimate {
    std::vector<double> magnitudes;  // linear magnitude per bin, all >= 0
    double bin_hz = 0.0;
    std::size_t nfft = 0;
};

struct Peak {
    std::size_t bin = 0;
    double magnitude = 0.0;
};

/// Peaks sorted by descending magnitude (ties by ascending bin).
struct PeakSet {
    std::vector<Peak> peaks;

    std::size_t size() const { return peaks.size(); }
};

struct BranchDecision {
    bool regular = false;   // tone-structured (FSK-like) spectrum
    int peak_count = 0;     // meaningful when regular
};

/// Welch-averaged magnitude spectrum: Hann window, 50% overlap, segments of
/// length nfft, DC-centered bin order. Frames shorter than nfft are
/// zero-padded into a single segment.
inline SpectrumEstimate estimate_spectrum(const SymbolFrame& frame, std::size_t nfft = 1024) {
    if (frame.samples.empty()) throw std::invalid_argument("estimate_spectrum: empty frame");
    if (!detail::is_pow2(nfft)) throw std::invalid_argument("estimate_spectrum: nfft must be a power of two");
    if (frame.samples.size() < nfft / 4)
        throw std::invalid_argument("estimate_spectrum: frame shorter than nfft/4");

    std::vector<double> window(nfft);
    for (std::size_t i = 0; i < nfft; ++i)
        window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / nfft));

    const std::size_t n = frame.samples.size();
    const std::size_t hop = nfft / 2;
    const std::size_t segments = n >= nfft ? 1 + (n - nfft) / hop : 1;

    std::vector<double> power(nfft, 0.0);
    std::vector<cpoint> buf(nfft);
    for (std::size_t s = 0; s < segments; ++s) {
        const std::size_t off = s * hop;
        for (std::size_t i = 0; i < nfft; ++i) {
            const std::size_t idx = off + i;
            buf[i] = idx < n ? frame.samples[idx] * window[i] : cpoint(0.0, 0.0);
        }
        detail::fft_radix2(buf);
        for (std::size_t i = 0; i < nfft; ++i) power[i] += std::norm(buf[i]);
    }

    SpectrumEstimate est;
    est.nfft = nfft;
    const double fs = frame.symbol_rate * frame.samples_per_symbol;
    est.bin_hz = fs / double(nfft);
    est.magnitudes.resize(nfft);
    const double norm = double(segments) * double(nfft);
    for (std::size_t i = 0; i < nfft; ++i) {
        // fftshift so bin 0 is -fs/2 and bin nfft/2 is DC
        const std::size_t src = (i + nfft / 2) % nfft;
        est.magnitudes[i] = std::sqrt(power[src] / norm);
    }
    return est;
}

/// All interior strict local maxima at or above prominence * max(magnitudes),
/// greedily keeping stronger peaks and suppressing anything within
/// min_separation_bins of an already accepted one.
inline PeakSet detect_peaks(const SpectrumEstimate& spec, double prominence = 0.5,
                            std::size_t min_separation_bins = 16) {
    if (!(prominence > 0.0 && prominence <= 1.0))
        throw std::invalid_argument("detect_peaks: prominence must be in (0,1]");
    const auto& m = spec.magnitudes;
    PeakSet out;
    if (m.size() < 3) return out;

    const double max_mag = *std::max_element(m.begin(), m.end());
    if (max_mag <= 0.0) return out;
    const double floor = prominence * max_mag;

    std::vector<Peak> candidates;
    for (std::size_t i = 1; i + 1 < m.size(); ++i)
        if (m[i] > m[i - 1] && m[i] > m[i + 1] && m[i] >= floor)
            candidates.push_back({i, m[i]});

    std::sort(candidates.begin(), candidates.end(), [](const Peak& a, const Peak& b) {
        if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
        return a.bin < b.bin;
    });

    for (const Peak& c : candidates) {
        bool clear = true;
        for (const Peak& kept : out.peaks) {
            const std::size_t d = c.bin > kept.bin ? c.bin - kept.bin : kept.bin - c.bin;
            if (d < min_separation_bins) {
                clear = false;
                break;
            }
        }
        if (clear) out.peaks.push_back(c);
    }
    return out;
}

/// Regular (FSK-like) iff the peak count maps to a supported FSK order, the
/// peaks are near-equally spaced, and their magnitudes are comparable.
/// Anything ambiguous falls through to Irregular.
inline BranchDecision branch(const PeakSet& peaks, const SpectrumEstimate&) {
    constexpr double kMaxSpacingDeviation = 0.25;  // of mean adjacent spacing
    constexpr double kMaxMagnitudeRatio = 3.0;

    const int count = static_cast<int>(peaks.size());
    if (count != 2 && count != 4) return {};

    std::vector<std::size_t> bins;
    bins.reserve(peaks.size());
    double mag_min = peaks.peaks.front().magnitude, mag_max = mag_min;
    for (const Peak& p : peaks.peaks) {
        bins.push_back(p.bin);
        mag_min = std::min(mag_min, p.magnitude);
        mag_max = std::max(mag_max, p.magnitude);
    }
    if (mag_min <= 0.0 || mag_max / mag_min >= kMaxMagnitudeRatio) return {};

    std::sort(bins.begin(), bins.end());
    if (count > 2) {
        std::vector<double> gaps;
        for (std::size_t i = 1; i < bins.size(); ++i) gaps.push_back(double(bins[i] - bins[i - 1]));
        double mean = 0.0;
        for (double g : gaps) mean += g;
        mean /= double(gaps.size());
        for (double g : gaps)
            if (std::abs(g - mean) >= kMaxSpacingDeviation * mean) return {};
    }
    return {true, count};
}

}  // namespace amc
