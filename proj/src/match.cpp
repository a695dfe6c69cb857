#include "colrisk/match.hpp"

#include <bit>
#include <stdexcept>

#if defined(__AVX512F__) && defined(__AVX512BW__)
#include <immintrin.h>
#define COLRISK_AVX512 1
#if defined(__AVX512VPOPCNTDQ__)
#define COLRISK_VPOPCNT 1
#endif
#endif

namespace colrisk {

// --- popcount kernels -------------------------------------------------------
// The campaign cost is dominated by popcounts over 2048-bit codes. With
// AVX512VPOPCNTDQ each 512-bit chunk is one instruction; otherwise the
// nibble-LUT + psadbw scheme (Mula) still beats scalar POPCNT by ~3x. Scalar
// remains as the tail/fallback path.

#ifdef COLRISK_AVX512
namespace {

#ifndef COLRISK_VPOPCNT
inline __m512i popcount_nibbles(__m512i v) {
    const __m512i lut = _mm512_broadcast_i32x4(
        _mm_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4));
    const __m512i low = _mm512_set1_epi8(0x0f);
    __m512i lo = _mm512_and_si512(v, low);
    __m512i hi = _mm512_and_si512(_mm512_srli_epi16(v, 4), low);
    return _mm512_add_epi8(_mm512_shuffle_epi8(lut, lo), _mm512_shuffle_epi8(lut, hi));
}
#endif

inline __m512i popcount_qwords(__m512i v) {
#ifdef COLRISK_VPOPCNT
    return _mm512_popcnt_epi64(v);
#else
    return _mm512_sad_epu8(popcount_nibbles(v), _mm512_setzero_si512());
#endif
}

} // namespace
#endif

uint64_t xor_count(const uint64_t* ac, const uint64_t* bc, uint32_t words) {
    uint64_t total = 0;
    uint32_t w = 0;
#ifdef COLRISK_AVX512
    if (words >= 8) {
        __m512i acc = _mm512_setzero_si512();
        for (; w + 8 <= words; w += 8) {
            __m512i x = _mm512_xor_si512(_mm512_loadu_si512(ac + w), _mm512_loadu_si512(bc + w));
            acc = _mm512_add_epi64(acc, popcount_qwords(x));
        }
        total = static_cast<uint64_t>(_mm512_reduce_add_epi64(acc));
    }
#endif
    for (; w < words; ++w) total += std::popcount(ac[w] ^ bc[w]);
    return total;
}

void xor_masked_count(const uint64_t* ac, const uint64_t* am, const uint64_t* bc,
                      const uint64_t* bm, uint32_t words, uint64_t& diff, uint64_t& valid) {
    uint64_t d = 0, v = 0;
    uint32_t w = 0;
#ifdef COLRISK_AVX512
    if (words >= 8) {
        __m512i dacc = _mm512_setzero_si512();
        __m512i vacc = _mm512_setzero_si512();
        for (; w + 8 <= words; w += 8) {
            __m512i joint =
                _mm512_and_si512(_mm512_loadu_si512(am + w), _mm512_loadu_si512(bm + w));
            __m512i x = _mm512_and_si512(
                _mm512_xor_si512(_mm512_loadu_si512(ac + w), _mm512_loadu_si512(bc + w)), joint);
            dacc = _mm512_add_epi64(dacc, popcount_qwords(x));
            vacc = _mm512_add_epi64(vacc, popcount_qwords(joint));
        }
        d = static_cast<uint64_t>(_mm512_reduce_add_epi64(dacc));
        v = static_cast<uint64_t>(_mm512_reduce_add_epi64(vacc));
    }
#endif
    for (; w < words; ++w) {
        uint64_t joint = am[w] & bm[w];
        d += std::popcount((ac[w] ^ bc[w]) & joint);
        v += std::popcount(joint);
    }
    diff = d;
    valid = v;
}

// --- batched rotation kernels --------------------------------------------------
// One gallery code is compared against all rotated probe planes in a single
// sweep: each 512-bit gallery chunk is loaded once, every trial's count is kept
// in a per-trial byte accumulator, and the psadbw widening happens once per
// trial instead of once per chunk. This is what makes the rotation-compensated
// campaign throughput land above 1e7 masked comparisons per second per core.

namespace {

#ifdef COLRISK_AVX512
// Horizontal sums of eight qword accumulators in one transpose-add tree;
// lane i of the result is the total of accumulator i. ~21 ops versus ~7 per
// scalar reduce_add, and the result lands with a single masked store.
inline __m512i hsum8_epi64(__m512i v0, __m512i v1, __m512i v2, __m512i v3, __m512i v4,
                           __m512i v5, __m512i v6, __m512i v7) {
    const __m512i s01 =
        _mm512_add_epi64(_mm512_unpacklo_epi64(v0, v1), _mm512_unpackhi_epi64(v0, v1));
    const __m512i s23 =
        _mm512_add_epi64(_mm512_unpacklo_epi64(v2, v3), _mm512_unpackhi_epi64(v2, v3));
    const __m512i s45 =
        _mm512_add_epi64(_mm512_unpacklo_epi64(v4, v5), _mm512_unpackhi_epi64(v4, v5));
    const __m512i s67 =
        _mm512_add_epi64(_mm512_unpacklo_epi64(v6, v7), _mm512_unpackhi_epi64(v6, v7));
    const __m512i s0123 = _mm512_add_epi64(_mm512_shuffle_i64x2(s01, s23, 0x88),
                                           _mm512_shuffle_i64x2(s01, s23, 0xdd));
    const __m512i s4567 = _mm512_add_epi64(_mm512_shuffle_i64x2(s45, s67, 0x88),
                                           _mm512_shuffle_i64x2(s45, s67, 0xdd));
    return _mm512_add_epi64(_mm512_shuffle_i64x2(s0123, s4567, 0x88),
                            _mm512_shuffle_i64x2(s0123, s4567, 0xdd));
}

// TN is a compile-time trial count so the accumulators become registers and
// the per-chunk loop fully unrolls; the dispatcher below slices arbitrary
// trial counts into blocks of at most 8. The accumulators are named locals
// guarded by `if constexpr` rather than a __m512i array: array elements are
// not scalarized into registers before unrolling, which would cost a stack
// round-trip per trial per chunk. noinline keeps each instantiation a
// standalone function so the register allocator is not starved by the
// dispatcher inlining every variant into one frame.
template <uint32_t TN>
__attribute__((noinline)) void xor_count_block(const uint64_t* planes, const uint64_t* g,
                                               uint32_t words, uint32_t vw, uint64_t* d_out) {
    const __m512i zero = _mm512_setzero_si512();
    __m512i a0 = zero, a1 = zero, a2 = zero, a3 = zero;
    __m512i a4 = zero, a5 = zero, a6 = zero, a7 = zero;
    for (uint32_t w = 0; w < vw; w += 8) {
        const __m512i gv = _mm512_loadu_si512(g + w);
#define COLRISK_STEP(i)                                                                     \
    if constexpr (TN > i) {                                                                 \
        const __m512i pv = _mm512_loadu_si512(planes + static_cast<size_t>(i) * words + w); \
        a##i = _mm512_add_epi64(a##i, popcount_qwords(_mm512_xor_si512(pv, gv)));           \
    }
        COLRISK_STEP(0) COLRISK_STEP(1) COLRISK_STEP(2) COLRISK_STEP(3)
        COLRISK_STEP(4) COLRISK_STEP(5) COLRISK_STEP(6) COLRISK_STEP(7)
#undef COLRISK_STEP
    }
    const __mmask8 lanes = static_cast<__mmask8>((1u << TN) - 1);
    _mm512_mask_storeu_epi64(d_out, lanes, hsum8_epi64(a0, a1, a2, a3, a4, a5, a6, a7));
}

template <uint32_t TN>
__attribute__((noinline)) void
xor_masked_count_block(const uint64_t* code_planes, const uint64_t* mask_planes,
                       const uint64_t* gc, const uint64_t* gm, uint32_t words, uint32_t vw,
                       uint64_t* d_out, uint64_t* v_out) {
    const __m512i zero = _mm512_setzero_si512();
    __m512i d0 = zero, d1 = zero, d2 = zero, d3 = zero;
    __m512i d4 = zero, d5 = zero, d6 = zero, d7 = zero;
    __m512i v0 = zero, v1 = zero, v2 = zero, v3 = zero;
    __m512i v4 = zero, v5 = zero, v6 = zero, v7 = zero;
    for (uint32_t w = 0; w < vw; w += 8) {
        const __m512i gcv = _mm512_loadu_si512(gc + w);
        const __m512i gmv = _mm512_loadu_si512(gm + w);
#define COLRISK_STEP(i)                                                                         \
    if constexpr (TN > i) {                                                                     \
        const size_t off = static_cast<size_t>(i) * words + w;                                  \
        const __m512i joint = _mm512_and_si512(_mm512_loadu_si512(mask_planes + off), gmv);     \
        /* (pc ^ gc) & joint as one ternary-logic op (truth table 0x28) */                      \
        const __m512i x =                                                                       \
            _mm512_ternarylogic_epi64(_mm512_loadu_si512(code_planes + off), gcv, joint, 0x28); \
        d##i = _mm512_add_epi64(d##i, popcount_qwords(x));                                      \
        v##i = _mm512_add_epi64(v##i, popcount_qwords(joint));                                  \
    }
        COLRISK_STEP(0) COLRISK_STEP(1) COLRISK_STEP(2) COLRISK_STEP(3)
        COLRISK_STEP(4) COLRISK_STEP(5) COLRISK_STEP(6) COLRISK_STEP(7)
#undef COLRISK_STEP
    }
    const __mmask8 lanes = static_cast<__mmask8>((1u << TN) - 1);
    _mm512_mask_storeu_epi64(d_out, lanes, hsum8_epi64(d0, d1, d2, d3, d4, d5, d6, d7));
    _mm512_mask_storeu_epi64(v_out, lanes, hsum8_epi64(v0, v1, v2, v3, v4, v5, v6, v7));
}
#endif

// d_out[t] = popcount(planes[t] ^ g); planes are `trials` contiguous rows of
// `words` words each.
void xor_count_multi(const uint64_t* planes, uint32_t trials, const uint64_t* g, uint32_t words,
                     uint64_t* d_out) {
    for (uint32_t t = 0; t < trials; ++t) d_out[t] = 0;
    uint32_t vw = 0;
#ifdef COLRISK_AVX512
    vw = words & ~7u;
    if (vw) {
        uint32_t tb = 0;
        for (; tb + 8 <= trials; tb += 8)
            xor_count_block<8>(planes + static_cast<size_t>(tb) * words, g, words, vw, d_out + tb);
        const uint64_t* p = planes + static_cast<size_t>(tb) * words;
        uint64_t* d = d_out + tb;
        switch (trials - tb) {
            case 1: xor_count_block<1>(p, g, words, vw, d); break;
            case 2: xor_count_block<2>(p, g, words, vw, d); break;
            case 3: xor_count_block<3>(p, g, words, vw, d); break;
            case 4: xor_count_block<4>(p, g, words, vw, d); break;
            case 5: xor_count_block<5>(p, g, words, vw, d); break;
            case 6: xor_count_block<6>(p, g, words, vw, d); break;
            case 7: xor_count_block<7>(p, g, words, vw, d); break;
            default: break;
        }
    }
#endif
    for (uint32_t t = 0; t < trials; ++t) {
        const uint64_t* p = planes + static_cast<size_t>(t) * words;
        uint64_t d = d_out[t];
        for (uint32_t w = vw; w < words; ++w) d += std::popcount(p[w] ^ g[w]);
        d_out[t] = d;
    }
}

// Masked variant: d_out[t] = popcount((code_planes[t] ^ gc) & mask_planes[t] & gm),
// v_out[t] = popcount(mask_planes[t] & gm).
void xor_masked_count_multi(const uint64_t* code_planes, const uint64_t* mask_planes,
                            uint32_t trials, const uint64_t* gc, const uint64_t* gm,
                            uint32_t words, uint64_t* d_out, uint64_t* v_out) {
    for (uint32_t t = 0; t < trials; ++t) {
        d_out[t] = 0;
        v_out[t] = 0;
    }
    uint32_t vw = 0;
#ifdef COLRISK_AVX512
    vw = words & ~7u;
    if (vw) {
        uint32_t tb = 0;
        for (; tb + 8 <= trials; tb += 8) {
            const size_t base = static_cast<size_t>(tb) * words;
            xor_masked_count_block<8>(code_planes + base, mask_planes + base, gc, gm, words, vw,
                                      d_out + tb, v_out + tb);
        }
        const size_t base = static_cast<size_t>(tb) * words;
        const uint64_t* pc = code_planes + base;
        const uint64_t* pm = mask_planes + base;
        uint64_t* d = d_out + tb;
        uint64_t* v = v_out + tb;
        switch (trials - tb) {
            case 1: xor_masked_count_block<1>(pc, pm, gc, gm, words, vw, d, v); break;
            case 2: xor_masked_count_block<2>(pc, pm, gc, gm, words, vw, d, v); break;
            case 3: xor_masked_count_block<3>(pc, pm, gc, gm, words, vw, d, v); break;
            case 4: xor_masked_count_block<4>(pc, pm, gc, gm, words, vw, d, v); break;
            case 5: xor_masked_count_block<5>(pc, pm, gc, gm, words, vw, d, v); break;
            case 6: xor_masked_count_block<6>(pc, pm, gc, gm, words, vw, d, v); break;
            case 7: xor_masked_count_block<7>(pc, pm, gc, gm, words, vw, d, v); break;
            default: break;
        }
    }
#endif
    for (uint32_t t = 0; t < trials; ++t) {
        const uint64_t* pc = code_planes + static_cast<size_t>(t) * words;
        const uint64_t* pm = mask_planes + static_cast<size_t>(t) * words;
        uint64_t d = d_out[t], v = v_out[t];
        for (uint32_t w = vw; w < words; ++w) {
            uint64_t joint = pm[w] & gm[w];
            d += std::popcount((pc[w] ^ gc[w]) & joint);
            v += std::popcount(joint);
        }
        d_out[t] = d;
        v_out[t] = v;
    }
}

} // namespace

// --- single-pair operations ---------------------------------------------------

MatchScore hamming_distance(const IrisCode& a, const IrisCode& b) {
    if (!(a.geometry() == b.geometry()))
        throw std::invalid_argument("hamming_distance: geometry mismatch");
    uint64_t diff, valid;
    if (a.full_mask() && b.full_mask()) {
        diff = xor_count(a.code_words().data(), b.code_words().data(), a.words());
        valid = a.geometry().total_bits();
    } else {
        xor_masked_count(a.code_words().data(), a.mask_words().data(), b.code_words().data(),
                         b.mask_words().data(), a.words(), diff, valid);
        if (valid == 0) throw std::domain_error("hamming_distance: empty joint mask");
    }
    MatchScore s;
    s.disagreeing_bits = static_cast<uint32_t>(diff);
    s.valid_bits = static_cast<uint32_t>(valid);
    s.hd = static_cast<double>(diff) / static_cast<double>(valid);
    s.best_rotation = 0;
    return s;
}

IrisCode rotate_code(const IrisCode& a, int32_t offset) {
    const auto geom = a.geometry();
    const int32_t A = static_cast<int32_t>(geom.angular_positions);
    if (offset <= -A || offset >= A)
        throw std::invalid_argument("rotate_code: |offset| must be < angular_positions");
    int32_t off = ((offset % A) + A) % A;
    CodeBuilder out(geom);
    for (uint32_t r = 0; r < geom.rings; ++r) {
        uint32_t base = r * geom.angular_positions;
        for (int32_t p = 0; p < A; ++p) {
            uint32_t dst = base + static_cast<uint32_t>((p + off) % A);
            if (a.code_bit(base + p)) out.set_code_bit(dst, true);
            if (a.mask_bit(base + p)) out.set_mask_bit(dst, true);
        }
    }
    return out.freeze();
}

// --- rotated-probe batch kernel ------------------------------------------------

namespace {

// Circular left-rotation of every ring by off bits, for rings that span whole
// words (the production geometry: 256 angular positions = 4 words per ring).
// dst bit (r*A + (p+off) mod A) = src bit (r*A + p), same mapping as
// rotate_code but word-at-a-time.
void rotate_plane_words(const uint64_t* src, uint64_t* dst, uint32_t rings, uint32_t ring_words,
                        uint32_t off) {
    const uint32_t s = off / 64, b = off % 64;
    for (uint32_t r = 0; r < rings; ++r, src += ring_words, dst += ring_words) {
        for (uint32_t w = 0; w < ring_words; ++w) {
            const uint64_t hi = src[(w + ring_words - s) % ring_words];
            if (b == 0) {
                dst[w] = hi;
            } else {
                const uint64_t lo = src[(w + 2 * ring_words - s - 1) % ring_words];
                dst[w] = (hi << b) | (lo >> (64 - b));
            }
        }
    }
}

} // namespace

RotatedProbe::RotatedProbe(const IrisCode& probe, uint32_t half_window) {
    const auto geom = probe.geometry();
    if (half_window >= geom.angular_positions)
        throw std::invalid_argument("best_rotation_hd: half_window must be < angular_positions");
    words_ = probe.words();
    total_bits_ = geom.total_bits();
    full_mask_ = probe.full_mask();

    offsets_.push_back(0);
    for (int32_t o = 1; o <= static_cast<int32_t>(half_window); ++o) {
        offsets_.push_back(-o);  // tie preference: smaller |offset|, then negative
        offsets_.push_back(+o);
    }
    rotated_code_.resize(static_cast<size_t>(offsets_.size()) * words_);
    rotated_mask_.resize(static_cast<size_t>(offsets_.size()) * words_);
    const int32_t A = static_cast<int32_t>(geom.angular_positions);
    const bool word_rings = geom.angular_positions % 64 == 0;
    for (size_t t = 0; t < offsets_.size(); ++t) {
        uint64_t* code_dst = rotated_code_.data() + static_cast<size_t>(t) * words_;
        uint64_t* mask_dst = rotated_mask_.data() + static_cast<size_t>(t) * words_;
        if (offsets_[t] == 0) {
            std::copy(probe.code_words().begin(), probe.code_words().end(), code_dst);
            std::copy(probe.mask_words().begin(), probe.mask_words().end(), mask_dst);
        } else if (word_rings) {
            const uint32_t off =
                static_cast<uint32_t>(((offsets_[t] % A) + A) % A);
            rotate_plane_words(probe.code_words().data(), code_dst, geom.rings,
                               geom.angular_positions / 64, off);
            rotate_plane_words(probe.mask_words().data(), mask_dst, geom.rings,
                               geom.angular_positions / 64, off);
        } else {
            IrisCode rot = rotate_code(probe, offsets_[t]);
            std::copy(rot.code_words().begin(), rot.code_words().end(), code_dst);
            std::copy(rot.mask_words().begin(), rot.mask_words().end(), mask_dst);
        }
    }
}

MatchScore RotatedProbe::min_against(const IrisCode& gallery) const {
    constexpr uint32_t kStackTrials = 64;
    const uint64_t* gc = gallery.code_words().data();
    const uint32_t n = static_cast<uint32_t>(offsets_.size());
    if (n == 0) throw std::logic_error("RotatedProbe: no rotation trials");
    uint64_t dstack[kStackTrials], vstack[kStackTrials];
    std::vector<uint64_t> dheap, vheap;
    uint64_t* d = dstack;
    uint64_t* v = vstack;
    if (n > kStackTrials) {
        dheap.resize(n);
        vheap.resize(n);
        d = dheap.data();
        v = vheap.data();
    }

    MatchScore best;
    if (full_mask_ && gallery.full_mask()) {
        xor_count_multi(rotated_code_.data(), n, gc, words_, d);
        uint64_t best_diff = d[0];
        uint32_t best_t = 0;
        for (uint32_t t = 1; t < n; ++t) {
            if (d[t] < best_diff) {  // strict: ties keep the earlier (preferred) offset
                best_diff = d[t];
                best_t = t;
            }
        }
        best.disagreeing_bits = static_cast<uint32_t>(best_diff);
        best.valid_bits = total_bits_;
        best.hd = static_cast<double>(best_diff) / total_bits_;
        best.best_rotation = offsets_[best_t];
        return best;
    }
    const uint64_t* gm = gallery.mask_words().data();
    xor_masked_count_multi(rotated_code_.data(), rotated_mask_.data(), n, gc, gm, words_, d, v);
    uint64_t best_d = 1, best_v = 0;  // hd = +inf sentinel until first trial
    uint32_t best_t = 0;
    bool have = false;
    for (uint32_t t = 0; t < n; ++t) {
        if (v[t] == 0)
            throw std::domain_error("best_rotation_hd: empty joint mask at offset " +
                                    std::to_string(offsets_[t]));
        // d/v < best_d/best_v without division; counts < 2^32 so the
        // products fit comfortably
        if (!have || static_cast<unsigned __int128>(d[t]) * best_v <
                         static_cast<unsigned __int128>(best_d) * v[t]) {
            best_d = d[t];
            best_v = v[t];
            best_t = t;
            have = true;
        }
    }
    best.disagreeing_bits = static_cast<uint32_t>(best_d);
    best.valid_bits = static_cast<uint32_t>(best_v);
    best.hd = static_cast<double>(best_d) / static_cast<double>(best_v);
    best.best_rotation = offsets_[best_t];
    return best;
}

MatchScore best_rotation_hd(const IrisCode& a, const IrisCode& b, uint32_t half_window) {
    if (!(a.geometry() == b.geometry()))
        throw std::invalid_argument("best_rotation_hd: geometry mismatch");
    if (half_window == 0) return hamming_distance(a, b);
    RotatedProbe rp(b, half_window);
    return rp.min_against(a);
}

} // namespace colrisk
