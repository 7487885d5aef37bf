#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace wage {

using Shape = std::vector<int>;

inline int64_t numel(const Shape& s) {
    int64_t n = 1;
    for (int d : s) n *= d;
    return n;
}

// Thrown by dataset parsers on malformed input (CLI exit code 3).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a runtime invariant is violated (CLI exit code 4).
struct InvariantError : std::logic_error {
    using std::logic_error::logic_error;
};

// A power of two held as its exponent, so products and divisions on the
// scaling path are exponent arithmetic and never lose precision.
struct PowerOfTwo {
    int exponent = 0;

    double value() const { return std::ldexp(1.0, exponent); }

    static PowerOfTwo from_value(double v) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument("PowerOfTwo: value must be positive and finite");
        int e = std::ilogb(v);
        if (std::ldexp(1.0, e) != v)
            throw std::invalid_argument("PowerOfTwo: value is not an exact power of two");
        return PowerOfTwo{e};
    }

    friend bool operator==(PowerOfTwo a, PowerOfTwo b) { return a.exponent == b.exponent; }
};

// Tensor of signed grid codes i; the represented value is i * 2^(1-bits).
// Codes stay within the symmetric range +-(2^(bits-1) - 1).
struct FixedPointTensor {
    std::vector<int16_t> codes;
    Shape shape;
    int bits = 8;

    FixedPointTensor() = default;
    FixedPointTensor(Shape s, int k)
        : codes(static_cast<size_t>(numel(s)), 0), shape(std::move(s)), bits(k) {}

    int64_t size() const { return static_cast<int64_t>(codes.size()); }
    double value_at(int64_t i) const { return std::ldexp(double(codes[i]), 1 - bits); }
    int max_abs_code() const {
        int m = 0;
        for (int16_t c : codes) m = std::max(m, std::abs(int(c)));
        return m;
    }
};

// Wide accumulator tensor produced by integer MACs; value = code * 2^scale_exp.
struct WideTensor {
    std::vector<int64_t> codes;
    Shape shape;
    int scale_exp = 0;

    WideTensor() = default;
    WideTensor(Shape s, int se)
        : codes(static_cast<size_t>(numel(s)), 0), shape(std::move(s)), scale_exp(se) {}

    int64_t size() const { return static_cast<int64_t>(codes.size()); }
    double value_at(int64_t i) const { return std::ldexp(double(codes[i]), scale_exp); }
};

// Real-valued tensor for the float-simulation route.
struct FloatTensor {
    std::vector<double> v;
    Shape shape;

    FloatTensor() = default;
    explicit FloatTensor(Shape s) : v(static_cast<size_t>(numel(s)), 0.0), shape(std::move(s)) {}

    int64_t size() const { return static_cast<int64_t>(v.size()); }
};

// Quantization step of the symmetric k-bit grid.
double step_size(int k);

// Largest code magnitude of the k-bit grid: 2^(k-1) - 1.
inline int max_code(int k) { return (1 << (k - 1)) - 1; }

// Saturating linear quantizer: clip(sigma * round(x / sigma), -1+sigma, 1-sigma),
// rounding halves away from zero. quantize() returns the grid value,
// quantize_code() the integer code.
double quantize(double x, int k);
int quantize_code(double x, int k);

// Exponent of the power of two nearest to x in log scale: round(log2 x).
// Exact for every representable x; the mantissa/sqrt(2) comparison is done on
// integer significands so no log rounding can flip the result.
int shift_exponent(double x);
int shift_exponent_i64(int64_t m);
PowerOfTwo shift(double x);

// Round-half-away-from-zero of v / 2^t on integer codes.
int64_t rshift_round(int64_t v, int t);

// Deterministic seedable generator emitting 16-bit uniform draws; one stream
// per consumer, never shared. splitmix64 underneath.
class Rng16 {
public:
    explicit Rng16(uint64_t seed = 0) : state_(seed) {}

    uint16_t next16() { return static_cast<uint16_t>(next_u64() >> 48); }

    uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1).
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), exact via rejection.
    uint64_t bounded(uint64_t n);

    uint64_t state() const { return state_; }
    void set_state(uint64_t s) { state_ = s; }

    // Child stream keyed off a seed and tag; independent of this stream's
    // consumption position.
    static Rng16 derive(uint64_t seed, uint64_t tag);

private:
    uint64_t state_;
};

// Stochastic rounding of a step count: sgn(g) * (floor|g| + Bernoulli(frac)),
// the Bernoulli realized by comparing one fresh 16-bit draw against
// floor(frac * 2^16). Exactly one draw is consumed per call.
int64_t stochastic_round(double g_s, Rng16& rng);

}  // namespace wage
