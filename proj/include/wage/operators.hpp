#pragma once

#include <optional>
#include <string>

#include "wage/fixedpoint.hpp"

namespace wage {

// One entry of the W-A-G-E pattern: a bitwidth in [2,16], or unconstrained
// ("f" in pattern strings), which bypasses the operator entirely.
struct BitEntry {
    int bits = 8;
    bool quantized = true;

    friend bool operator==(BitEntry a, BitEntry b) {
        return a.quantized == b.quantized && (!a.quantized || a.bits == b.bits);
    }
};

struct BitConfig {
    BitEntry w, a, g, e;

    bool fully_quantized() const {
        return w.quantized && a.quantized && g.quantized && e.quantized;
    }

    // Pattern grammar: 4 chars, each 2-9 for those widths, A-F (or a-e) for
    // 10-15, or literal 'f' for unconstrained. "2888", "28ff", "288C".
    static BitConfig parse(const std::string& pattern);
    std::string str() const;
};

struct OperatorConfig {
    BitConfig bits;
    PowerOfTwo gamma{0};  // error-window left shift, >= 1
    PowerOfTwo eta{0};    // shift-based learning rate
};

// ---- integer-code route: shifts, adds and compares on codes only ----

// Stored k_G-bit weight codes -> k_W-bit codes.
FixedPointTensor quantize_weights_int(const FixedPointTensor& stored, int k_w);

// Wide MAC output -> k_A-bit codes of value/(alpha * sigma(k_A)).
FixedPointTensor quantize_activations_int(const WideTensor& z, PowerOfTwo alpha, int k_a);

// Wide error -> k_E-bit codes of value * gamma / Shift(max|value|).
// All-zero input maps to all-zero output without evaluating Shift.
// sat_count, when given, receives the number of window-truncated elements.
FixedPointTensor quantize_errors_int(const WideTensor& e, int k_e, PowerOfTwo gamma,
                                     int64_t* sat_count = nullptr);

// Wide gradient -> update step counts (codes of Delta W in sigma(k_G) units).
// Consumes exactly one 16-bit draw per element in row-major order.
FixedPointTensor quantize_gradients_int(const WideTensor& g, PowerOfTwo eta, int k_g,
                                        Rng16& rng);

// ---- float-simulation route: the saturating quantizer evaluated literally ----

FixedPointTensor quantize_weights_float(const FloatTensor& w, int k_w);
FixedPointTensor quantize_activations_float(const FloatTensor& a, PowerOfTwo alpha, int k_a);
FixedPointTensor quantize_errors_float(const FloatTensor& e, int k_e, PowerOfTwo gamma,
                                       int64_t* sat_count = nullptr);
FixedPointTensor quantize_gradients_float(const FloatTensor& g, PowerOfTwo eta, int k_g,
                                          Rng16& rng);

}  // namespace wage
