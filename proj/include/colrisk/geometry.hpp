#pragma once
#include <cstdint>
#include <stdexcept>

namespace colrisk {

// Ring-structured code layout: `rings` concentric rings, each sampled at
// `angular_positions` angles. Bit index = ring * angular_positions + angle.
struct CodeGeometry {
    uint32_t rings = 8;
    uint32_t angular_positions = 256;

    uint32_t total_bits() const { return rings * angular_positions; }

    void validate() const {
        if (rings < 1) throw std::invalid_argument("geometry: rings must be >= 1");
        if (angular_positions < 2)
            throw std::invalid_argument("geometry: angular_positions must be >= 2");
    }

    bool operator==(const CodeGeometry&) const = default;
};

inline CodeGeometry default_geometry() { return CodeGeometry{8, 256}; }

} // namespace colrisk
