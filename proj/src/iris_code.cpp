#include "colrisk/iris_code.hpp"

#include <bit>
#include <stdexcept>

namespace colrisk {

namespace {

bool trailing_bits_clear(const std::vector<uint64_t>& words, uint32_t total_bits) {
    uint32_t tail = total_bits & 63;
    if (tail == 0) return true;
    return (words.back() & ~((1ull << tail) - 1)) == 0;
}

bool any_bit(const std::vector<uint64_t>& words) {
    for (uint64_t w : words)
        if (w) return true;
    return false;
}

} // namespace

IrisCode::IrisCode(CodeGeometry geom, std::vector<uint64_t> code_words,
                   std::vector<uint64_t> mask_words)
    : geom_(geom), code_(std::move(code_words)), mask_(std::move(mask_words)) {
    geom_.validate();
    size_t want = word_count(geom_);
    if (code_.size() != want || mask_.size() != want)
        throw std::invalid_argument("iris code: word count does not match geometry");
    if (!trailing_bits_clear(code_, geom_.total_bits()) ||
        !trailing_bits_clear(mask_, geom_.total_bits()))
        throw std::invalid_argument("iris code: bits set beyond total_bits");
    if (!any_bit(mask_))
        throw std::invalid_argument("iris code: fully masked code rejected");

    uint32_t n = geom_.total_bits();
    uint64_t valid = 0;
    for (uint64_t w : mask_) valid += std::popcount(w);
    full_mask_ = (valid == n);
}

IrisCode IrisCode::zeros(CodeGeometry geom) {
    CodeBuilder b(geom);
    b.fill_mask();
    return b.freeze();
}

// --- hex wire format --------------------------------------------------------
// Bit b maps to byte b/8, bit (7 - b%8) within the byte (big-endian in byte);
// bytes stream in ring-major order. Code digits first, then mask digits.

namespace {

int hex_val(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

void append_hex(std::string& out, const IrisCode& a, bool mask_plane) {
    uint32_t n = a.geometry().total_bits();
    static const char* digits = "0123456789abcdef";
    for (uint32_t byte = 0; byte < n / 8; ++byte) {
        unsigned v = 0;
        for (uint32_t i = 0; i < 8; ++i) {
            uint32_t b = byte * 8 + i;
            bool bit = mask_plane ? a.mask_bit(b) : a.code_bit(b);
            v = (v << 1) | (bit ? 1u : 0u);
        }
        out.push_back(digits[v >> 4]);
        out.push_back(digits[v & 15]);
    }
}

} // namespace

std::string encode_hex(const IrisCode& a) {
    uint32_t n = a.geometry().total_bits();
    if (n % 8 != 0)
        throw std::invalid_argument("encode_hex: total_bits must be a multiple of 8");
    std::string out;
    out.reserve(n / 2);
    append_hex(out, a, false);
    append_hex(out, a, true);
    return out;
}

IrisCode decode_hex(const std::string& text, CodeGeometry geom) {
    geom.validate();
    uint32_t n = geom.total_bits();
    if (n % 8 != 0)
        throw std::invalid_argument("decode_hex: total_bits must be a multiple of 8");
    size_t want = static_cast<size_t>(n) / 2;  // n/4 hex chars per plane, 2 planes
    if (text.size() != want)
        throw std::invalid_argument("decode_hex: expected " + std::to_string(want) +
                                    " hex characters, got " + std::to_string(text.size()));
    CodeBuilder b(geom);
    for (size_t i = 0; i < text.size(); i += 2) {
        int hi = hex_val(text[i]), lo = hex_val(text[i + 1]);
        if (hi < 0 || lo < 0) throw std::invalid_argument("decode_hex: non-hex character");
        unsigned v = static_cast<unsigned>(hi) << 4 | static_cast<unsigned>(lo);
        uint32_t byte = static_cast<uint32_t>(i / 2);
        bool mask_plane = byte >= n / 8;
        uint32_t base = (mask_plane ? byte - n / 8 : byte) * 8;
        for (uint32_t k = 0; k < 8; ++k) {
            bool bit = (v >> (7 - k)) & 1;
            if (mask_plane) b.set_mask_bit(base + k, bit);
            else b.set_code_bit(base + k, bit);
        }
    }
    return b.freeze();  // rejects an all-zero mask
}

} // namespace colrisk
