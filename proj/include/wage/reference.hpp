#pragma once

#include "wage/fixedpoint.hpp"
#include "wage/layers.hpp"

namespace wage::ref {

// Serial float-simulation kernels. Same dataflow as the integer kernels but
// carried in doubles with straightforward nested loops; kept as the reference
// both for testing the parallel integer path and for the benchmark baseline.
// All grid values involved are dyadic rationals well inside double precision,
// so results are exact and the two routes can be compared bit for bit after
// quantization.

FloatTensor dequant(const FixedPointTensor& t);

FloatTensor conv2d_forward(const FloatTensor& in, const FloatTensor& w, const ConvGeom& g,
                           int batch);
FloatTensor conv2d_backward_input(const FloatTensor& e, const FloatTensor& w, const ConvGeom& g,
                                  int batch);
FloatTensor conv2d_backward_weights(const FloatTensor& e, const FloatTensor& in,
                                    const ConvGeom& g, int batch);
FloatTensor fc_forward(const FloatTensor& in, const FloatTensor& w, int in_f, int out_f,
                       int batch);
FloatTensor fc_backward_input(const FloatTensor& e, const FloatTensor& w, int in_f, int out_f,
                              int batch);
FloatTensor fc_backward_weights(const FloatTensor& e, const FloatTensor& in, int in_f, int out_f,
                                int batch);

void relu_forward(FloatTensor& z, std::vector<uint8_t>& mask);
FloatTensor maxpool2_forward(const FloatTensor& z, int h, int w, int c, int batch,
                             std::vector<int32_t>& argmax);
FloatTensor maxpool2_backward(const FloatTensor& e, const std::vector<int32_t>& argmax,
                              const Shape& unpooled_shape);
void apply_relu_mask(FloatTensor& e, const std::vector<uint8_t>& mask);

FloatTensor sse_error(const FloatTensor& a, const FloatTensor& target, double* loss);

}  // namespace wage::ref
