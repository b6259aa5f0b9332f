#pragma once

#include <array>
#include <cstring>
#include <fstream>

#include "amc/types.hpp"

namespace amc {

// Frame file layout (little endian):
//   bytes 0..3   magic "AMCF"
//   bytes 4..7   u32 format version (1)
//   bytes 8..15  u64 sample count
//   then count * (f64 I, f64 Q)
inline constexpr std::array<char, 4> kFrameMagic{'A', 'M', 'C', 'F'};
inline constexpr std::uint32_t kFrameVersion = 1;

inline void write_frame(const SymbolFrame& frame, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write frame file: " + path);
    out.write(kFrameMagic.data(), kFrameMagic.size());
    const std::uint32_t version = kFrameVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    const std::uint64_t count = frame.samples.size();
    out.write(reinterpret_cast<const char*>(&count), sizeof count);
    for (const cpoint& s : frame.samples) {
        const double iq[2] = {s.real(), s.imag()};
        out.write(reinterpret_cast<const char*>(iq), sizeof iq);
    }
    if (!out) throw std::runtime_error("short write to frame file: " + path);
}

inline SymbolFrame read_frame(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open frame file: " + path);
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kFrameMagic) throw std::runtime_error("bad frame file magic: " + path);
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    if (!in || version != kFrameVersion)
        throw std::runtime_error("unsupported frame file version in " + path);
    std::uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&count), sizeof count);
    if (!in) throw std::runtime_error("truncated frame file header: " + path);

    SymbolFrame frame;
    frame.samples.resize(count);
    for (auto& s : frame.samples) {
        double iq[2];
        in.read(reinterpret_cast<char*>(iq), sizeof iq);
        if (!in) throw std::runtime_error("truncated frame file payload: " + path);
        s = {iq[0], iq[1]};
    }
    return frame;
}

}  // namespace amc
