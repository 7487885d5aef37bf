#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "wage/fixedpoint.hpp"

namespace wage {

enum class Padding { Same, Valid };

struct ConvGeom {
    int in_h = 0, in_w = 0, in_c = 0;
    int out_c = 0, kh = 0, kw = 0;
    int pad_h = 0, pad_w = 0;
    int out_h = 0, out_w = 0;

    static ConvGeom make(int in_h, int in_w, int in_c, int out_c, int k, Padding pad);
    int fan_in() const { return kh * kw * in_c; }
};

// Worst-case |accumulator| for a MAC of k1- and k2-bit codes over `terms`
// terms; saturates at INT64_MAX.
int64_t mac_bound(int k1, int k2, int64_t terms);

// Counts invocations of kernels that use general multiplies; the ternary
// kernels below never bump it, which is what the inference-path check
// asserts for k_W = 2.
uint64_t generic_mac_calls();

// ---- forward MACs on codes (exact integer arithmetic, no rounding) ----

WideTensor conv2d_forward(const FixedPointTensor& in, const FixedPointTensor& w,
                          const ConvGeom& g, int batch);
WideTensor fc_forward(const FixedPointTensor& in, const FixedPointTensor& w,
                      int in_f, int out_f, int batch);

// Multiplication-free variants for ternary weights (codes in {-1,0,+1}).
WideTensor conv2d_forward_ternary(const FixedPointTensor& in, const FixedPointTensor& w,
                                  const ConvGeom& g, int batch);
WideTensor fc_forward_ternary(const FixedPointTensor& in, const FixedPointTensor& w,
                              int in_f, int out_f, int batch);

// ---- backward MACs ----

// e at the layer output (out_h x out_w x out_c) -> error at the input.
WideTensor conv2d_backward_input(const FixedPointTensor& e, const FixedPointTensor& w,
                                 const ConvGeom& g, int batch);
// Weight gradient, summed over batch and spatial positions (never averaged).
WideTensor conv2d_backward_weights(const FixedPointTensor& e, const FixedPointTensor& in,
                                   const ConvGeom& g, int batch);
WideTensor fc_backward_input(const FixedPointTensor& e, const FixedPointTensor& w,
                             int in_f, int out_f, int batch);
WideTensor fc_backward_weights(const FixedPointTensor& e, const FixedPointTensor& in,
                               int in_f, int out_f, int batch);

// ---- elementwise / structural ops on the wide domain ----

// In-place max(x,0); mask[i] = 1 where x > 0 (backward passes error there).
void relu_forward(WideTensor& z, std::vector<uint8_t>& mask);

// 2x2 stride-2 max pooling; argmax holds the flat index of the winning input
// element per pooled cell, first (lowest index) maximum on ties.
WideTensor maxpool2_forward(const WideTensor& z, int h, int w, int c, int batch,
                            std::vector<int32_t>& argmax);

// Routes each pooled error code to its stored argmax position, zero elsewhere.
FixedPointTensor maxpool2_backward(const FixedPointTensor& e, const std::vector<int32_t>& argmax,
                                   const Shape& unpooled_shape);

void apply_relu_mask(FixedPointTensor& e, const std::vector<uint8_t>& mask);

// SSE criterion: loss = sum (a - a*)^2 over everything (batch included),
// error = a - a* on the activation grid. Shapes must match.
WideTensor sse_error(const FixedPointTensor& a, const FixedPointTensor& target, double* loss);

}  // namespace wage
