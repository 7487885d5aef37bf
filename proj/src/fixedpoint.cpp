#include "wage/fixedpoint.hpp"

#include <bit>
#include <limits>

namespace wage {

double step_size(int k) {
    if (k < 2) throw std::invalid_argument("step_size: bitwidth must be >= 2");
    return std::ldexp(1.0, 1 - k);
}

int quantize_code(double x, int k) {
    if (!std::isfinite(x)) throw std::invalid_argument("quantize: non-finite input");
    const double sigma = step_size(k);
    // std::round rounds halves away from zero, which keeps the grid symmetric.
    const double r = std::round(x / sigma);
    const int m = max_code(k);
    if (r > m) return m;
    if (r < -m) return -m;
    return static_cast<int>(r);
}

double quantize(double x, int k) {
    return std::ldexp(double(quantize_code(x, k)), 1 - k);
}

namespace {

// round(log2(f * 2^e)) for an integer significand f in [2^52, 2^53).
// log2 is >= e + 53 - 0.5 exactly when f^2 >= 2^105; f^2 fits in 128 bits.
int round_log2_sig(uint64_t f, int e) {
    const unsigned __int128 sq = static_cast<unsigned __int128>(f) * f;
    const unsigned __int128 threshold = static_cast<unsigned __int128>(1) << 105;
    return e + 52 + (sq >= threshold ? 1 : 0);
}

}  // namespace

int shift_exponent(double x) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw std::invalid_argument("shift: input must be positive and finite");
    int e;
    const double m = std::frexp(x, &e);  // x = m * 2^e, m in [0.5, 1)
    const auto f = static_cast<uint64_t>(std::ldexp(m, 53));  // in [2^52, 2^53)
    return round_log2_sig(f, e - 53);
}

int shift_exponent_i64(int64_t m) {
    if (m <= 0) throw std::invalid_argument("shift: input must be positive");
    const auto u = static_cast<uint64_t>(m);
    const int w = 64 - std::countl_zero(u);  // floor(log2 m) + 1
    // Normalize to a 53-bit significand, exact when m < 2^53 (always, given
    // accumulator width checks), so both shift routes share one definition.
    if (w <= 53) return round_log2_sig(u << (53 - w), w - 53);
    return round_log2_sig(u >> (w - 53), w - 53);  // unreachable under width checks
}

PowerOfTwo shift(double x) { return PowerOfTwo{shift_exponent(x)}; }

int64_t rshift_round(int64_t v, int t) {
    if (t <= 0) return v << (-t);
    const int64_t half = int64_t(1) << (t - 1);
    if (v >= 0) return (v + half) >> t;
    return -((-v + half) >> t);
}

uint64_t Rng16::bounded(uint64_t n) {
    const uint64_t limit = std::numeric_limits<uint64_t>::max() - std::numeric_limits<uint64_t>::max() % n;
    uint64_t u;
    do {
        u = next_u64();
    } while (u >= limit);
    return u % n;
}

Rng16 Rng16::derive(uint64_t seed, uint64_t tag) {
    Rng16 mixer(seed ^ (tag * 0xD6E8FEB86659FD93ull));
    return Rng16(mixer.next_u64());
}

int64_t stochastic_round(double g_s, Rng16& rng) {
    if (!std::isfinite(g_s)) throw std::invalid_argument("stochastic_round: non-finite input");
    const double a = std::fabs(g_s);
    const double fl = std::floor(a);
    // Probability held at 16-bit fixed point before the comparison.
    const auto p16 = static_cast<uint32_t>(std::floor((a - fl) * 65536.0));
    const uint16_t draw = rng.next16();
    const int64_t steps = static_cast<int64_t>(fl) + (draw < p16 ? 1 : 0);
    return g_s < 0 ? -steps : steps;
}

}  // namespace wage
