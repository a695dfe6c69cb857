#pragma once
#include <cstdint>
#include <vector>

#include "colrisk/iris_code.hpp"

namespace colrisk {

struct MatchScore {
    double hd = 0.0;             // disagreeing / valid, exactly
    uint32_t disagreeing_bits = 0;
    uint32_t valid_bits = 0;
    int32_t best_rotation = 0;
};

// XOR + joint-mask AND + popcount over the packed words.
// Throws on geometry mismatch or empty joint mask.
MatchScore hamming_distance(const IrisCode& a, const IrisCode& b);

// Cyclic shift of every ring by the same offset: content at angular position p
// moves to (p + offset) mod angular_positions, masks included.
IrisCode rotate_code(const IrisCode& a, int32_t offset);

// Minimum-hd score over offsets in [-half_window, +half_window] applied to b
// (k = 2*half_window + 1 trials). Ties: smaller |offset| wins, then the
// negative one; trial order 0, -1, +1, -2, +2, ... with strict improvement
// makes that the natural outcome.
MatchScore best_rotation_hd(const IrisCode& a, const IrisCode& b, uint32_t half_window);

// --- campaign kernel ------------------------------------------------------
// Comparing one probe against a long gallery stream re-uses the probe's
// rotated copies; this is the throughput-critical path (billions of pairs).
struct word_span {
    const uint64_t* code;
    const uint64_t* mask;
};

class RotatedProbe {
  public:
    RotatedProbe(const IrisCode& probe, uint32_t half_window);

    uint32_t trials() const { return static_cast<uint32_t>(offsets_.size()); }
    int32_t offset_at(uint32_t t) const { return offsets_[t]; }
    word_span span_at(uint32_t t) const {
        return {rotated_code_.data() + static_cast<size_t>(t) * words_,
                rotated_mask_.data() + static_cast<size_t>(t) * words_};
    }
    uint32_t words() const { return words_; }
    bool full_mask() const { return full_mask_; }

    // min-hd over all rotations against one gallery code; assumes same
    // geometry (checked upstream once per campaign).
    MatchScore min_against(const IrisCode& gallery) const;

  private:
    uint32_t words_;
    uint32_t total_bits_;
    bool full_mask_;
    std::vector<int32_t> offsets_;        // preference order 0,-1,+1,-2,+2,...
    std::vector<uint64_t> rotated_code_;  // trials * words
    std::vector<uint64_t> rotated_mask_;
};

// Raw word-level counters, exposed for the kernel and its tests.
void xor_masked_count(const uint64_t* ac, const uint64_t* am, const uint64_t* bc,
                      const uint64_t* bm, uint32_t words, uint64_t& diff, uint64_t& valid);
uint64_t xor_count(const uint64_t* ac, const uint64_t* bc, uint32_t words);

} // namespace colrisk
