#include "wage/operators.hpp"

#include <algorithm>
#include <cctype>

namespace wage {

namespace {

BitEntry parse_entry(char c) {
    if (c == 'f') return BitEntry{0, false};
    if (c >= '2' && c <= '9') return BitEntry{c - '0', true};
    if (c >= 'A' && c <= 'F') return BitEntry{c - 'A' + 10, true};
    if (c >= 'a' && c <= 'e') return BitEntry{c - 'a' + 10, true};
    throw std::invalid_argument(std::string("bits pattern: bad character '") + c + "'");
}

char entry_char(BitEntry e) {
    if (!e.quantized) return 'f';
    if (e.bits <= 9) return char('0' + e.bits);
    return char('A' + e.bits - 10);
}

int16_t clip_code(int64_t c, int k, int64_t* sat) {
    const int64_t m = max_code(k);
    if (c > m) {
        if (sat) ++*sat;
        return static_cast<int16_t>(m);
    }
    if (c < -m) {
        if (sat) ++*sat;
        return static_cast<int16_t>(-m);
    }
    return static_cast<int16_t>(c);
}

int64_t max_abs_i64(const std::vector<int64_t>& v) {
    int64_t m = 0;
#pragma omp parallel for reduction(max : m) schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(v.size()); ++i)
        m = std::max(m, std::abs(v[i]));
    return m;
}

double max_abs_f64(const std::vector<double>& v) {
    double m = 0.0;
#pragma omp parallel for reduction(max : m) schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(v.size()); ++i)
        m = std::max(m, std::fabs(v[i]));
    return m;
}

// floor(frac * 2^16) where frac = rem / 2^d, rem < 2^d.
uint32_t frac_p16(uint64_t rem, int d) {
    if (d <= 16) return static_cast<uint32_t>(rem << (16 - d));
    if (d - 16 >= 64) return 0;
    return static_cast<uint32_t>(rem >> (d - 16));
}

}  // namespace

BitConfig BitConfig::parse(const std::string& pattern) {
    if (pattern.size() != 4)
        throw std::invalid_argument("bits pattern must have exactly 4 characters (e.g. 2888)");
    BitConfig c;
    c.w = parse_entry(pattern[0]);
    c.a = parse_entry(pattern[1]);
    c.g = parse_entry(pattern[2]);
    c.e = parse_entry(pattern[3]);
    return c;
}

std::string BitConfig::str() const {
    return {entry_char(w), entry_char(a), entry_char(g), entry_char(e)};
}

FixedPointTensor quantize_weights_int(const FixedPointTensor& stored, int k_w) {
    FixedPointTensor out(stored.shape, k_w);
    const int t = stored.bits - k_w;  // value/sigma(k_w) = code * 2^(k_w - k_G)
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < stored.size(); ++i)
        out.codes[i] = clip_code(rshift_round(stored.codes[i], t), k_w, nullptr);
    return out;
}

FixedPointTensor quantize_activations_int(const WideTensor& z, PowerOfTwo alpha, int k_a) {
    FixedPointTensor out(z.shape, k_a);
    // value/(alpha*sigma) = code * 2^(z.scale - e_alpha - (1-k_a))
    const int t = (1 - k_a) + alpha.exponent - z.scale_exp;
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < z.size(); ++i)
        out.codes[i] = clip_code(rshift_round(z.codes[i], t), k_a, nullptr);
    return out;
}

FixedPointTensor quantize_errors_int(const WideTensor& e, int k_e, PowerOfTwo gamma,
                                     int64_t* sat_count) {
    FixedPointTensor out(e.shape, k_e);
    if (sat_count) *sat_count = 0;
    const int64_t m = max_abs_i64(e.codes);
    if (m == 0) return out;  // orientation-free error: skip Shift entirely
    const int r = shift_exponent_i64(m);
    // scaled/sigma = code * 2^(gamma - r + k_e - 1); the 2^scale of the input
    // cancels between numerator and Shift.
    const int t = r - gamma.exponent - k_e + 1;
    int64_t sat = 0;
#pragma omp parallel for reduction(+ : sat) schedule(static)
    for (int64_t i = 0; i < e.size(); ++i)
        out.codes[i] = clip_code(rshift_round(e.codes[i], t), k_e, &sat);
    if (sat_count) *sat_count = sat;
    return out;
}

FixedPointTensor quantize_gradients_int(const WideTensor& g, PowerOfTwo eta, int k_g,
                                        Rng16& rng) {
    FixedPointTensor out(g.shape, k_g);
    const int64_t m = max_abs_i64(g.codes);
    if (m == 0) return out;
    const int r = shift_exponent_i64(m);
    const int d = r - eta.exponent;  // |g_s| = |code| * 2^-d
    // Serial loop: draw order over elements is part of the contract.
    for (int64_t i = 0; i < g.size(); ++i) {
        const int64_t c = g.codes[i];
        const uint64_t a = static_cast<uint64_t>(c < 0 ? -c : c);
        uint64_t whole;
        uint32_t p16;
        if (d <= 0) {
            whole = a << (-d);
            p16 = 0;
        } else if (d < 64) {
            whole = a >> d;
            p16 = frac_p16(a & ((uint64_t(1) << d) - 1), d);
        } else {
            whole = 0;
            p16 = frac_p16(a, d);
        }
        const uint16_t draw = rng.next16();
        const int64_t steps = static_cast<int64_t>(whole) + (draw < p16 ? 1 : 0);
        out.codes[i] = static_cast<int16_t>(c < 0 ? -steps : steps);
    }
    return out;
}

FixedPointTensor quantize_weights_float(const FloatTensor& w, int k_w) {
    FixedPointTensor out(w.shape, k_w);
    for (int64_t i = 0; i < w.size(); ++i)
        out.codes[i] = static_cast<int16_t>(quantize_code(w.v[i], k_w));
    return out;
}

FixedPointTensor quantize_activations_float(const FloatTensor& a, PowerOfTwo alpha, int k_a) {
    FixedPointTensor out(a.shape, k_a);
    const double inv = 1.0 / alpha.value();
    for (int64_t i = 0; i < a.size(); ++i)
        out.codes[i] = static_cast<int16_t>(quantize_code(a.v[i] * inv, k_a));
    return out;
}

FixedPointTensor quantize_errors_float(const FloatTensor& e, int k_e, PowerOfTwo gamma,
                                       int64_t* sat_count) {
    FixedPointTensor out(e.shape, k_e);
    if (sat_count) *sat_count = 0;
    const double m = max_abs_f64(e.v);
    if (m == 0.0) return out;
    const double scale = std::ldexp(gamma.value(), -shift_exponent(m));
    const double sigma = step_size(k_e);
    int64_t sat = 0;
    for (int64_t i = 0; i < e.size(); ++i) {
        const double r = std::round(e.v[i] * scale / sigma);
        out.codes[i] = clip_code(static_cast<int64_t>(r), k_e, &sat);
    }
    if (sat_count) *sat_count = sat;
    return out;
}

FixedPointTensor quantize_gradients_float(const FloatTensor& g, PowerOfTwo eta, int k_g,
                                          Rng16& rng) {
    FixedPointTensor out(g.shape, k_g);
    const double m = max_abs_f64(g.v);
    if (m == 0.0) return out;
    const double scale = std::ldexp(eta.value(), -shift_exponent(m));
    for (int64_t i = 0; i < g.size(); ++i)
        out.codes[i] = static_cast<int16_t>(stochastic_round(g.v[i] * scale, rng));
    return out;
}

}  // namespace wage
