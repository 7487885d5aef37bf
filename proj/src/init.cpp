#include "wage/init.hpp"

#include <cmath>

namespace wage {

double init_limit(int fan_in, int k_w, bool w_quantized, const InitParams& p) {
    if (fan_in < 1) throw std::invalid_argument("init_limit: fan_in must be >= 1");
    const double msra = std::sqrt(6.0 / fan_in);
    if (!w_quantized) return msra;
    return std::max(msra, p.beta * step_size(k_w));
}

PowerOfTwo compute_alpha(int fan_in, int k_w, bool w_quantized, const InitParams& p) {
    if (fan_in < 1) throw std::invalid_argument("compute_alpha: fan_in must be >= 1");
    if (!w_quantized) return PowerOfTwo{0};
    const double msra = std::sqrt(6.0 / fan_in);
    const double ratio = p.beta * step_size(k_w) / msra;
    return PowerOfTwo{std::max(shift_exponent(ratio), 0)};
}

std::vector<double> init_weights(int64_t count, double limit, Rng16& rng) {
    std::vector<double> w(static_cast<size_t>(count));
    for (auto& x : w) x = (2.0 * rng.uniform() - 1.0) * limit;
    return w;
}

}  // namespace wage
