#include "wage/network.hpp"

namespace wage {

namespace {

LayerSpec conv(int k, int out_c, Padding pad) {
    LayerSpec l;
    l.kind = LayerKind::Conv2d;
    l.kernel = k;
    l.out_channels = out_c;
    l.pad = pad;
    return l;
}

LayerSpec fc(int out_f) {
    LayerSpec l;
    l.kind = LayerKind::FullyConnected;
    l.out_features = out_f;
    return l;
}

LayerSpec simple(LayerKind k) {
    LayerSpec l;
    l.kind = k;
    return l;
}

}  // namespace

NetworkSpec make_network(const std::string& arch, const BitConfig& bits, const InitParams& init) {
    NetworkSpec spec;
    spec.arch = arch;
    if (arch == "lenet-wage") {
        spec.in_h = spec.in_w = 28;
        spec.in_c = 1;
        spec.layers = {conv(5, 32, Padding::Valid), simple(LayerKind::Relu),
                       simple(LayerKind::MaxPool2), conv(5, 64, Padding::Valid),
                       simple(LayerKind::Relu),     simple(LayerKind::MaxPool2),
                       fc(512),                     simple(LayerKind::Relu),
                       fc(10),                      simple(LayerKind::SseOutput)};
    } else if (arch == "vgg-wage") {
        spec.in_h = spec.in_w = 32;
        spec.in_c = 3;
        spec.layers = {conv(3, 128, Padding::Same), simple(LayerKind::Relu),
                       conv(3, 128, Padding::Same), simple(LayerKind::Relu),
                       simple(LayerKind::MaxPool2),
                       conv(3, 256, Padding::Same), simple(LayerKind::Relu),
                       conv(3, 256, Padding::Same), simple(LayerKind::Relu),
                       simple(LayerKind::MaxPool2),
                       conv(3, 512, Padding::Same), simple(LayerKind::Relu),
                       conv(3, 512, Padding::Same), simple(LayerKind::Relu),
                       simple(LayerKind::MaxPool2),
                       fc(1024),                    simple(LayerKind::Relu),
                       fc(10),                      simple(LayerKind::SseOutput)};
    } else if (arch == "mlp") {
        spec.in_h = spec.in_w = 28;
        spec.in_c = 1;
        spec.layers = {fc(512), simple(LayerKind::Relu), fc(10), simple(LayerKind::SseOutput)};
    } else {
        throw std::invalid_argument("unknown architecture: " + arch);
    }

    // Resolve fan-in and alpha walking the activation geometry.
    int h = spec.in_h, w = spec.in_w, c = spec.in_c;
    for (auto& l : spec.layers) {
        switch (l.kind) {
            case LayerKind::Conv2d: {
                l.fan_in = l.kernel * l.kernel * c;
                l.alpha = compute_alpha(l.fan_in, bits.w.bits, bits.w.quantized, init);
                const auto g = ConvGeom::make(h, w, c, l.out_channels, l.kernel, l.pad);
                h = g.out_h;
                w = g.out_w;
                c = l.out_channels;
                break;
            }
            case LayerKind::FullyConnected: {
                l.fan_in = h * w * c;
                l.alpha = compute_alpha(l.fan_in, bits.w.bits, bits.w.quantized, init);
                h = w = 1;
                c = l.out_features;
                break;
            }
            case LayerKind::MaxPool2:
                if (h % 2 != 0 || w % 2 != 0)
                    throw InvariantError("maxpool2: spatial dims must be even in " + arch);
                h /= 2;
                w /= 2;
                break;
            case LayerKind::Relu:
                break;
            case LayerKind::SseOutput:
                spec.classes = c;
                break;
        }
    }
    return spec;
}

std::vector<Block> compile_blocks(const NetworkSpec& spec) {
    std::vector<Block> blocks;
    int h = spec.in_h, w = spec.in_w, c = spec.in_c;
    for (size_t i = 0; i < spec.layers.size(); ++i) {
        const auto& l = spec.layers[i];
        if (l.kind == LayerKind::Relu || l.kind == LayerKind::MaxPool2)
            throw InvariantError("relu/pool layer without a preceding conv/fc layer");
        if (l.kind == LayerKind::SseOutput) {
            if (i + 1 != spec.layers.size())
                throw InvariantError("sse output must be the final layer");
            break;
        }
        Block b;
        b.fan_in = l.fan_in;
        b.alpha = l.alpha;
        if (l.kind == LayerKind::Conv2d) {
            b.is_conv = true;
            b.geom = ConvGeom::make(h, w, c, l.out_channels, l.kernel, l.pad);
            b.in_h = h;
            b.in_w = w;
            b.in_c = c;
            b.w_shape = {l.kernel, l.kernel, c, l.out_channels};
            h = b.geom.out_h;
            w = b.geom.out_w;
            c = l.out_channels;
        } else {
            b.in_f = h * w * c;
            b.out_f = l.out_features;
            b.w_shape = {b.in_f, b.out_f};
            h = w = 1;
            c = l.out_features;
        }
        b.pre_pool_h = h;
        b.pre_pool_w = w;
        // Absorb relu/pool stages up to the next quantization point.
        while (i + 1 < spec.layers.size()) {
            const auto k = spec.layers[i + 1].kind;
            if (k == LayerKind::Relu) {
                b.relu = true;
                ++i;
            } else if (k == LayerKind::MaxPool2) {
                if (h % 2 != 0 || w % 2 != 0)
                    throw InvariantError("maxpool2: spatial dims must be even");
                b.pool = true;
                h /= 2;
                w /= 2;
                ++i;
            } else {
                break;
            }
        }
        b.out_h = h;
        b.out_w = w;
        b.out_c = c;
        blocks.push_back(b);
    }
    if (blocks.empty()) throw InvariantError("network has no trainable layers");
    return blocks;
}

void check_accumulator_widths(const NetworkSpec& spec, const BitConfig& bits, int batch) {
    if (!bits.fully_quantized()) return;  // float route carries doubles
    // Keeping every accumulator under 2^52 also keeps max|codes| exactly
    // representable for the Shift computation.
    const int64_t limit = int64_t(1) << 52;
    for (const auto& b : compile_blocks(spec)) {
        const int64_t fwd = mac_bound(bits.a.bits, bits.w.bits, b.fan_in);
        int64_t bwd_in, bwd_w;
        if (b.is_conv) {
            bwd_in = mac_bound(bits.e.bits, bits.w.bits,
                               int64_t(b.geom.kh) * b.geom.kw * b.geom.out_c);
            bwd_w = mac_bound(bits.e.bits, bits.a.bits,
                              int64_t(batch) * b.geom.out_h * b.geom.out_w);
        } else {
            bwd_in = mac_bound(bits.e.bits, bits.w.bits, b.out_f);
            bwd_w = mac_bound(bits.e.bits, bits.a.bits, batch);
        }
        if (fwd > limit || bwd_in > limit || bwd_w > limit)
            throw InvariantError("accumulator width exceeded for bits " + bits.str());
    }
}

}  // namespace wage
