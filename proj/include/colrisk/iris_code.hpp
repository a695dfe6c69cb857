#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "colrisk/geometry.hpp"

namespace colrisk {

// Packed bit code + validity mask (1 = valid, 0 = occluded). Bits live in
// 64-bit words, plain linear index: bit b -> word b/64, bit b%64. Trailing
// bits beyond total_bits are kept zero (construction invariant), so word-wise
// popcounts never see garbage. Immutable by convention after construction.
class IrisCode {
  public:
    IrisCode(CodeGeometry geom, std::vector<uint64_t> code_words,
             std::vector<uint64_t> mask_words);

    // all-zero code with a full mask
    static IrisCode zeros(CodeGeometry geom);

    const CodeGeometry& geometry() const { return geom_; }
    const std::vector<uint64_t>& code_words() const { return code_; }
    const std::vector<uint64_t>& mask_words() const { return mask_; }
    uint32_t words() const { return static_cast<uint32_t>(code_.size()); }
    bool full_mask() const { return full_mask_; }

    bool code_bit(uint32_t b) const { return (code_[b >> 6] >> (b & 63)) & 1; }
    bool mask_bit(uint32_t b) const { return (mask_[b >> 6] >> (b & 63)) & 1; }

    bool operator==(const IrisCode& o) const {
        return geom_ == o.geom_ && code_ == o.code_ && mask_ == o.mask_;
    }

    static uint32_t word_count(CodeGeometry geom) { return (geom.total_bits() + 63) / 64; }

  private:
    CodeGeometry geom_;
    std::vector<uint64_t> code_;
    std::vector<uint64_t> mask_;
    bool full_mask_ = false;
};

// Builder used by generators and decoders: set bits then freeze.
class CodeBuilder {
  public:
    explicit CodeBuilder(CodeGeometry geom)
        : geom_(geom), code_(IrisCode::word_count(geom), 0),
          mask_(IrisCode::word_count(geom), 0) {}

    void set_code_bit(uint32_t b, bool v) {
        if (v) code_[b >> 6] |= 1ull << (b & 63);
        else code_[b >> 6] &= ~(1ull << (b & 63));
    }
    void set_mask_bit(uint32_t b, bool v) {
        if (v) mask_[b >> 6] |= 1ull << (b & 63);
        else mask_[b >> 6] &= ~(1ull << (b & 63));
    }
    void fill_mask() {
        uint32_t n = geom_.total_bits();
        for (uint32_t w = 0; w < mask_.size(); ++w) mask_[w] = ~0ull;
        uint32_t tail = n & 63;
        if (tail) mask_.back() = (1ull << tail) - 1;
    }
    IrisCode freeze() { return IrisCode(geom_, std::move(code_), std::move(mask_)); }

  private:
    CodeGeometry geom_;
    std::vector<uint64_t> code_;
    std::vector<uint64_t> mask_;
};

// Wire format: ring-major bit order, big-endian within each byte; the code's
// hex digits followed by the mask's (total_bits/4 hex chars each).
std::string encode_hex(const IrisCode& a);
IrisCode decode_hex(const std::string& text, CodeGeometry geom);

} // namespace colrisk
