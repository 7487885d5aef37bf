#pragma once

#include "wage/fixedpoint.hpp"

namespace wage {

struct InitParams {
    double beta = 1.5;  // overlap constant between grid step and init limit
};

// Uniform init limit L = max(sqrt(6/n_in), beta * sigma(k_W)). The floor keeps
// randomly initialized weights reachable by the k_W grid; pass quantized=false
// to get the plain limit.
double init_limit(int fan_in, int k_w, bool w_quantized, const InitParams& p = {});

// Layer scaling factor alpha = max(Shift(L_min / sqrt(6/n_in)), 1), a fixed
// power of two per layer that stands in for batch normalization.
PowerOfTwo compute_alpha(int fan_in, int k_w, bool w_quantized, const InitParams& p = {});

// Samples count values from U(-L, +L).
std::vector<double> init_weights(int64_t count, double limit, Rng16& rng);

}  // namespace wage
