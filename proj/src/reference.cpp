#include "wage/reference.hpp"

#include <limits>

namespace wage::ref {

FloatTensor dequant(const FixedPointTensor& t) {
    FloatTensor out(t.shape);
    for (int64_t i = 0; i < t.size(); ++i) out.v[i] = t.value_at(i);
    return out;
}

FloatTensor conv2d_forward(const FloatTensor& in, const FloatTensor& w, const ConvGeom& g,
                           int batch) {
    FloatTensor out({batch, g.out_h, g.out_w, g.out_c});
    for (int n = 0; n < batch; ++n)
        for (int oh = 0; oh < g.out_h; ++oh)
            for (int ow = 0; ow < g.out_w; ++ow)
                for (int oc = 0; oc < g.out_c; ++oc) {
                    double acc = 0.0;
                    for (int r = 0; r < g.kh; ++r)
                        for (int s = 0; s < g.kw; ++s) {
                            const int ih = oh + r - g.pad_h;
                            const int iw = ow + s - g.pad_w;
                            if (ih < 0 || ih >= g.in_h || iw < 0 || iw >= g.in_w) continue;
                            for (int ic = 0; ic < g.in_c; ++ic)
                                acc += in.v[((int64_t(n) * g.in_h + ih) * g.in_w + iw) * g.in_c +
                                            ic] *
                                       w.v[(int64_t(r * g.kw + s) * g.in_c + ic) * g.out_c + oc];
                        }
                    out.v[((int64_t(n) * g.out_h + oh) * g.out_w + ow) * g.out_c + oc] = acc;
                }
    return out;
}

FloatTensor conv2d_backward_input(const FloatTensor& e, const FloatTensor& w, const ConvGeom& g,
                                  int batch) {
    FloatTensor out({batch, g.in_h, g.in_w, g.in_c});
    for (int n = 0; n < batch; ++n)
        for (int ih = 0; ih < g.in_h; ++ih)
            for (int iw = 0; iw < g.in_w; ++iw)
                for (int ic = 0; ic < g.in_c; ++ic) {
                    double acc = 0.0;
                    for (int r = 0; r < g.kh; ++r)
                        for (int s = 0; s < g.kw; ++s) {
                            const int oh = ih - r + g.pad_h;
                            const int ow = iw - s + g.pad_w;
                            if (oh < 0 || oh >= g.out_h || ow < 0 || ow >= g.out_w) continue;
                            for (int oc = 0; oc < g.out_c; ++oc)
                                acc += e.v[((int64_t(n) * g.out_h + oh) * g.out_w + ow) * g.out_c +
                                           oc] *
                                       w.v[(int64_t(r * g.kw + s) * g.in_c + ic) * g.out_c + oc];
                        }
                    out.v[((int64_t(n) * g.in_h + ih) * g.in_w + iw) * g.in_c + ic] = acc;
                }
    return out;
}

FloatTensor conv2d_backward_weights(const FloatTensor& e, const FloatTensor& in,
                                    const ConvGeom& g, int batch) {
    FloatTensor out({g.kh, g.kw, g.in_c, g.out_c});
    for (int r = 0; r < g.kh; ++r)
        for (int s = 0; s < g.kw; ++s)
            for (int ic = 0; ic < g.in_c; ++ic)
                for (int oc = 0; oc < g.out_c; ++oc) {
                    double acc = 0.0;
                    for (int n = 0; n < batch; ++n)
                        for (int oh = 0; oh < g.out_h; ++oh)
                            for (int ow = 0; ow < g.out_w; ++ow) {
                                const int ih = oh + r - g.pad_h;
                                const int iw = ow + s - g.pad_w;
                                if (ih < 0 || ih >= g.in_h || iw < 0 || iw >= g.in_w) continue;
                                acc += e.v[((int64_t(n) * g.out_h + oh) * g.out_w + ow) * g.out_c +
                                           oc] *
                                       in.v[((int64_t(n) * g.in_h + ih) * g.in_w + iw) * g.in_c +
                                            ic];
                            }
                    out.v[(int64_t(r * g.kw + s) * g.in_c + ic) * g.out_c + oc] = acc;
                }
    return out;
}

FloatTensor fc_forward(const FloatTensor& in, const FloatTensor& w, int in_f, int out_f,
                       int batch) {
    FloatTensor out({batch, out_f});
    for (int n = 0; n < batch; ++n)
        for (int o = 0; o < out_f; ++o) {
            double acc = 0.0;
            for (int i = 0; i < in_f; ++i)
                acc += in.v[int64_t(n) * in_f + i] * w.v[int64_t(i) * out_f + o];
            out.v[int64_t(n) * out_f + o] = acc;
        }
    return out;
}

FloatTensor fc_backward_input(const FloatTensor& e, const FloatTensor& w, int in_f, int out_f,
                              int batch) {
    FloatTensor out({batch, in_f});
    for (int n = 0; n < batch; ++n)
        for (int i = 0; i < in_f; ++i) {
            double acc = 0.0;
            for (int o = 0; o < out_f; ++o)
                acc += e.v[int64_t(n) * out_f + o] * w.v[int64_t(i) * out_f + o];
            out.v[int64_t(n) * in_f + i] = acc;
        }
    return out;
}

FloatTensor fc_backward_weights(const FloatTensor& e, const FloatTensor& in, int in_f, int out_f,
                                int batch) {
    FloatTensor out({in_f, out_f});
    for (int i = 0; i < in_f; ++i)
        for (int o = 0; o < out_f; ++o) {
            double acc = 0.0;
            for (int n = 0; n < batch; ++n)
                acc += in.v[int64_t(n) * in_f + i] * e.v[int64_t(n) * out_f + o];
            out.v[int64_t(i) * out_f + o] = acc;
        }
    return out;
}

void relu_forward(FloatTensor& z, std::vector<uint8_t>& mask) {
    mask.assign(z.v.size(), 0);
    for (int64_t i = 0; i < z.size(); ++i) {
        if (z.v[i] > 0.0)
            mask[i] = 1;
        else
            z.v[i] = 0.0;
    }
}

FloatTensor maxpool2_forward(const FloatTensor& z, int h, int w, int c, int batch,
                             std::vector<int32_t>& argmax) {
    if (h % 2 != 0 || w % 2 != 0)
        throw InvariantError("maxpool2: spatial dims must be even");
    const int oh = h / 2, ow = w / 2;
    FloatTensor out({batch, oh, ow, c});
    argmax.assign(out.v.size(), 0);
    for (int n = 0; n < batch; ++n)
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x)
                for (int ch = 0; ch < c; ++ch) {
                    double best = -std::numeric_limits<double>::infinity();
                    int64_t best_idx = 0;
                    for (int dy = 0; dy < 2; ++dy)
                        for (int dx = 0; dx < 2; ++dx) {
                            const int64_t idx =
                                ((int64_t(n) * h + (2 * y + dy)) * w + (2 * x + dx)) * c + ch;
                            if (z.v[idx] > best) {
                                best = z.v[idx];
                                best_idx = idx;
                            }
                        }
                    const int64_t o = ((int64_t(n) * oh + y) * ow + x) * c + ch;
                    out.v[o] = best;
                    argmax[o] = static_cast<int32_t>(best_idx);
                }
    return out;
}

FloatTensor maxpool2_backward(const FloatTensor& e, const std::vector<int32_t>& argmax,
                              const Shape& unpooled_shape) {
    FloatTensor out(unpooled_shape);
    for (int64_t i = 0; i < e.size(); ++i) out.v[argmax[i]] = e.v[i];
    return out;
}

void apply_relu_mask(FloatTensor& e, const std::vector<uint8_t>& mask) {
    for (int64_t i = 0; i < e.size(); ++i)
        if (!mask[i]) e.v[i] = 0.0;
}

FloatTensor sse_error(const FloatTensor& a, const FloatTensor& target, double* loss) {
    if (a.shape != target.shape) throw InvariantError("sse_error: output/target mismatch");
    FloatTensor e(a.shape);
    double sum = 0.0;
    for (int64_t i = 0; i < a.size(); ++i) {
        const double d = a.v[i] - target.v[i];
        e.v[i] = d;
        sum += d * d;
    }
    if (loss) *loss = sum;
    return e;
}

}  // namespace wage::ref
