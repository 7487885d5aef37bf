#pragma once

#include <string>
#include <vector>

#include "wage/init.hpp"
#include "wage/layers.hpp"
#include "wage/operators.hpp"

namespace wage {

enum class LayerKind { Conv2d, FullyConnected, MaxPool2, Relu, SseOutput };

struct LayerSpec {
    LayerKind kind;
    int kernel = 0;        // conv
    int out_channels = 0;  // conv
    int out_features = 0;  // fc
    Padding pad = Padding::Same;
    // Filled by the builder:
    int fan_in = 0;
    PowerOfTwo alpha{0};
};

struct NetworkSpec {
    std::string arch;   // lenet-wage | vgg-wage | mlp
    int in_h = 0, in_w = 0, in_c = 0;
    int classes = 10;
    std::vector<LayerSpec> layers;
};

// Known architectures:
//   lenet-wage : 32C5-MP2-64C5-MP2-512FC-10SSE on 28x28x1 (valid padding)
//   vgg-wage   : 2x(128C3)-MP2-2x(256C3)-MP2-2x(512C3)-MP2-1024FC-10SSE on 32x32x3
//   mlp        : 784-512FC-10SSE
// fan_in and alpha are resolved against the W bitwidth of `bits`.
NetworkSpec make_network(const std::string& arch, const BitConfig& bits,
                         const InitParams& init = {});

// One trainable layer compiled with its geometry and any relu/pool stages
// that follow it before the next quantization point.
struct Block {
    bool is_conv = false;
    ConvGeom geom;              // conv only
    int in_f = 0, out_f = 0;    // fc only
    bool relu = false;
    bool pool = false;
    int fan_in = 0;
    PowerOfTwo alpha{0};
    Shape w_shape;              // {kh,kw,ic,oc} or {in,out}
    // Per-sample element counts at the stage boundaries.
    int in_h = 0, in_w = 0, in_c = 0;       // input geometry (conv)
    int pre_pool_h = 0, pre_pool_w = 0;     // conv output before pooling
    int out_h = 0, out_w = 0, out_c = 0;    // after pooling (== block output)
};

std::vector<Block> compile_blocks(const NetworkSpec& spec);

// Verifies every MAC in the network stays inside a 64-bit accumulator for the
// given widths and batch size; throws InvariantError otherwise.
void check_accumulator_widths(const NetworkSpec& spec, const BitConfig& bits, int batch);

}  // namespace wage
