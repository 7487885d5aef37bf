#include "wage/layers.hpp"

#include <algorithm>
#include <cassert>
#include <limits>

namespace wage {

namespace {

std::atomic<uint64_t> g_generic_mac_calls{0};

void note_generic_call() { g_generic_mac_calls.fetch_add(1, std::memory_order_relaxed); }

#ifndef NDEBUG
void assert_within(const WideTensor& t, int64_t bound) {
    for (int64_t c : t.codes) assert(std::abs(c) <= bound && "MAC accumulator exceeded bit-growth bound");
}
#else
void assert_within(const WideTensor&, int64_t) {}
#endif

template <typename Acc>
void conv_fwd_impl(const int16_t* in, const int16_t* w, int64_t* out, const ConvGeom& g,
                   int batch) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < batch; ++n) {
        for (int oh = 0; oh < g.out_h; ++oh) {
            std::vector<Acc> acc(g.out_c);
            for (int ow = 0; ow < g.out_w; ++ow) {
                std::fill(acc.begin(), acc.end(), Acc(0));
                for (int r = 0; r < g.kh; ++r) {
                    const int ih = oh + r - g.pad_h;
                    if (ih < 0 || ih >= g.in_h) continue;
                    for (int s = 0; s < g.kw; ++s) {
                        const int iw = ow + s - g.pad_w;
                        if (iw < 0 || iw >= g.in_w) continue;
                        const int16_t* arow =
                            in + ((int64_t(n) * g.in_h + ih) * g.in_w + iw) * g.in_c;
                        const int16_t* wbase = w + int64_t(r * g.kw + s) * g.in_c * g.out_c;
                        for (int ic = 0; ic < g.in_c; ++ic) {
                            const Acc av = arow[ic];
                            if (av == 0) continue;
                            const int16_t* wrow = wbase + int64_t(ic) * g.out_c;
                            for (int oc = 0; oc < g.out_c; ++oc)
                                acc[oc] += av * Acc(wrow[oc]);
                        }
                    }
                }
                int64_t* orow = out + ((int64_t(n) * g.out_h + oh) * g.out_w + ow) * g.out_c;
                for (int oc = 0; oc < g.out_c; ++oc) orow[oc] = acc[oc];
            }
        }
    }
}

template <typename Acc>
void conv_bwd_input_impl(const int16_t* e, const int16_t* w, int64_t* out, const ConvGeom& g,
                         int batch) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < batch; ++n) {
        for (int ih = 0; ih < g.in_h; ++ih) {
            std::vector<Acc> acc(g.in_c);
            for (int iw = 0; iw < g.in_w; ++iw) {
                std::fill(acc.begin(), acc.end(), Acc(0));
                for (int r = 0; r < g.kh; ++r) {
                    const int oh = ih - r + g.pad_h;
                    if (oh < 0 || oh >= g.out_h) continue;
                    for (int s = 0; s < g.kw; ++s) {
                        const int ow = iw - s + g.pad_w;
                        if (ow < 0 || ow >= g.out_w) continue;
                        const int16_t* erow =
                            e + ((int64_t(n) * g.out_h + oh) * g.out_w + ow) * g.out_c;
                        const int16_t* wbase = w + int64_t(r * g.kw + s) * g.in_c * g.out_c;
                        for (int ic = 0; ic < g.in_c; ++ic) {
                            const int16_t* wrow = wbase + int64_t(ic) * g.out_c;
                            Acc dot = 0;
                            for (int oc = 0; oc < g.out_c; ++oc)
                                dot += Acc(erow[oc]) * Acc(wrow[oc]);
                            acc[ic] += dot;
                        }
                    }
                }
                int64_t* orow = out + ((int64_t(n) * g.in_h + ih) * g.in_w + iw) * g.in_c;
                for (int ic = 0; ic < g.in_c; ++ic) orow[ic] = acc[ic];
            }
        }
    }
}

template <typename Acc>
void conv_bwd_weights_impl(const int16_t* e, const int16_t* in, int64_t* out, const ConvGeom& g,
                           int batch) {
#pragma omp parallel for collapse(3) schedule(static)
    for (int r = 0; r < g.kh; ++r) {
        for (int s = 0; s < g.kw; ++s) {
            for (int ic = 0; ic < g.in_c; ++ic) {
                std::vector<Acc> acc(g.out_c, Acc(0));
                for (int n = 0; n < batch; ++n) {
                    for (int oh = 0; oh < g.out_h; ++oh) {
                        const int ih = oh + r - g.pad_h;
                        if (ih < 0 || ih >= g.in_h) continue;
                        for (int ow = 0; ow < g.out_w; ++ow) {
                            const int iw = ow + s - g.pad_w;
                            if (iw < 0 || iw >= g.in_w) continue;
                            const Acc av =
                                in[((int64_t(n) * g.in_h + ih) * g.in_w + iw) * g.in_c + ic];
                            if (av == 0) continue;
                            const int16_t* erow =
                                e + ((int64_t(n) * g.out_h + oh) * g.out_w + ow) * g.out_c;
                            for (int oc = 0; oc < g.out_c; ++oc)
                                acc[oc] += av * Acc(erow[oc]);
                        }
                    }
                }
                int64_t* orow = out + (int64_t(r * g.kw + s) * g.in_c + ic) * g.out_c;
                for (int oc = 0; oc < g.out_c; ++oc) orow[oc] = acc[oc];
            }
        }
    }
}

template <typename Acc>
void fc_fwd_impl(const int16_t* in, const int16_t* w, int64_t* out, int in_f, int out_f,
                 int batch) {
#pragma omp parallel for schedule(static)
    for (int n = 0; n < batch; ++n) {
        std::vector<Acc> acc(out_f, Acc(0));
        const int16_t* arow = in + int64_t(n) * in_f;
        for (int i = 0; i < in_f; ++i) {
            const Acc av = arow[i];
            if (av == 0) continue;
            const int16_t* wrow = w + int64_t(i) * out_f;
            for (int o = 0; o < out_f; ++o) acc[o] += av * Acc(wrow[o]);
        }
        int64_t* orow = out + int64_t(n) * out_f;
        for (int o = 0; o < out_f; ++o) orow[o] = acc[o];
    }
}

template <typename Acc>
void fc_bwd_input_impl(const int16_t* e, const int16_t* w, int64_t* out, int in_f, int out_f,
                       int batch) {
#pragma omp parallel for schedule(static)
    for (int n = 0; n < batch; ++n) {
        const int16_t* erow = e + int64_t(n) * out_f;
        int64_t* orow = out + int64_t(n) * in_f;
        for (int i = 0; i < in_f; ++i) {
            const int16_t* wrow = w + int64_t(i) * out_f;
            Acc dot = 0;
            for (int o = 0; o < out_f; ++o) dot += Acc(erow[o]) * Acc(wrow[o]);
            orow[i] = dot;
        }
    }
}

template <typename Acc>
void fc_bwd_weights_impl(const int16_t* e, const int16_t* in, int64_t* out, int in_f, int out_f,
                         int batch) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < in_f; ++i) {
        std::vector<Acc> acc(out_f, Acc(0));
        for (int n = 0; n < batch; ++n) {
            const Acc av = in[int64_t(n) * in_f + i];
            if (av == 0) continue;
            const int16_t* erow = e + int64_t(n) * out_f;
            for (int o = 0; o < out_f; ++o) acc[o] += av * Acc(erow[o]);
        }
        int64_t* orow = out + int64_t(i) * out_f;
        for (int o = 0; o < out_f; ++o) orow[o] = acc[o];
    }
}

// Selects the 32-bit accumulator whenever the exact worst case fits.
template <void (*F32)(const int16_t*, const int16_t*, int64_t*, const ConvGeom&, int),
          void (*F64)(const int16_t*, const int16_t*, int64_t*, const ConvGeom&, int)>
void dispatch_conv(const int16_t* a, const int16_t* b, int64_t* out, const ConvGeom& g, int batch,
                   int64_t bound) {
    if (bound <= std::numeric_limits<int32_t>::max())
        F32(a, b, out, g, batch);
    else
        F64(a, b, out, g, batch);
}

}  // namespace

ConvGeom ConvGeom::make(int in_h, int in_w, int in_c, int out_c, int k, Padding pad) {
    ConvGeom g;
    g.in_h = in_h;
    g.in_w = in_w;
    g.in_c = in_c;
    g.out_c = out_c;
    g.kh = g.kw = k;
    if (pad == Padding::Same) {
        g.pad_h = g.pad_w = (k - 1) / 2;
        g.out_h = in_h;
        g.out_w = in_w;
    } else {
        g.pad_h = g.pad_w = 0;
        g.out_h = in_h - k + 1;
        g.out_w = in_w - k + 1;
    }
    if (g.out_h <= 0 || g.out_w <= 0)
        throw InvariantError("conv geometry: kernel larger than input");
    return g;
}

int64_t mac_bound(int k1, int k2, int64_t terms) {
    const auto p = static_cast<__int128>(max_code(k1)) * max_code(k2) * terms;
    const auto lim = static_cast<__int128>(std::numeric_limits<int64_t>::max());
    return static_cast<int64_t>(p > lim ? lim : p);
}

uint64_t generic_mac_calls() { return g_generic_mac_calls.load(std::memory_order_relaxed); }

WideTensor conv2d_forward(const FixedPointTensor& in, const FixedPointTensor& w,
                          const ConvGeom& g, int batch) {
    note_generic_call();
    WideTensor out({batch, g.out_h, g.out_w, g.out_c}, (1 - in.bits) + (1 - w.bits));
    const int64_t bound = mac_bound(in.bits, w.bits, g.fan_in());
    dispatch_conv<conv_fwd_impl<int32_t>, conv_fwd_impl<int64_t>>(
        in.codes.data(), w.codes.data(), out.codes.data(), g, batch, bound);
    assert_within(out, bound);
    return out;
}

WideTensor conv2d_forward_ternary(const FixedPointTensor& in, const FixedPointTensor& w,
                                  const ConvGeom& g, int batch) {
    if (w.bits != 2) throw InvariantError("ternary conv requires 2-bit weights");
    WideTensor out({batch, g.out_h, g.out_w, g.out_c}, (1 - in.bits) + (1 - w.bits));
    const int16_t* wp = w.codes.data();
    const int16_t* ip = in.codes.data();
    int64_t* op = out.codes.data();
#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < batch; ++n) {
        for (int oh = 0; oh < g.out_h; ++oh) {
            std::vector<int64_t> acc(g.out_c);
            for (int ow = 0; ow < g.out_w; ++ow) {
                std::fill(acc.begin(), acc.end(), int64_t(0));
                for (int r = 0; r < g.kh; ++r) {
                    const int ih = oh + r - g.pad_h;
                    if (ih < 0 || ih >= g.in_h) continue;
                    for (int s = 0; s < g.kw; ++s) {
                        const int iw = ow + s - g.pad_w;
                        if (iw < 0 || iw >= g.in_w) continue;
                        const int16_t* arow =
                            ip + ((int64_t(n) * g.in_h + ih) * g.in_w + iw) * g.in_c;
                        const int16_t* wbase = wp + int64_t(r * g.kw + s) * g.in_c * g.out_c;
                        for (int ic = 0; ic < g.in_c; ++ic) {
                            const int64_t av = arow[ic];
                            if (av == 0) continue;
                            const int16_t* wrow = wbase + int64_t(ic) * g.out_c;
                            // accumulate-compare only: weight selects +a, -a or skip
                            for (int oc = 0; oc < g.out_c; ++oc) {
                                const int16_t wc = wrow[oc];
                                if (wc == 1)
                                    acc[oc] += av;
                                else if (wc == -1)
                                    acc[oc] -= av;
                            }
                        }
                    }
                }
                int64_t* orow = op + ((int64_t(n) * g.out_h + oh) * g.out_w + ow) * g.out_c;
                for (int oc = 0; oc < g.out_c; ++oc) orow[oc] = acc[oc];
            }
        }
    }
    return out;
}

WideTensor fc_forward(const FixedPointTensor& in, const FixedPointTensor& w, int in_f, int out_f,
                      int batch) {
    note_generic_call();
    WideTensor out({batch, out_f}, (1 - in.bits) + (1 - w.bits));
    const int64_t bound = mac_bound(in.bits, w.bits, in_f);
    if (bound <= std::numeric_limits<int32_t>::max())
        fc_fwd_impl<int32_t>(in.codes.data(), w.codes.data(), out.codes.data(), in_f, out_f, batch);
    else
        fc_fwd_impl<int64_t>(in.codes.data(), w.codes.data(), out.codes.data(), in_f, out_f, batch);
    assert_within(out, bound);
    return out;
}

WideTensor fc_forward_ternary(const FixedPointTensor& in, const FixedPointTensor& w, int in_f,
                              int out_f, int batch) {
    if (w.bits != 2) throw InvariantError("ternary fc requires 2-bit weights");
    WideTensor out({batch, out_f}, (1 - in.bits) + (1 - w.bits));
    const int16_t* ip = in.codes.data();
    const int16_t* wp = w.codes.data();
#pragma omp parallel for schedule(static)
    for (int n = 0; n < batch; ++n) {
        std::vector<int64_t> acc(out_f, 0);
        const int16_t* arow = ip + int64_t(n) * in_f;
        for (int i = 0; i < in_f; ++i) {
            const int64_t av = arow[i];
            if (av == 0) continue;
            const int16_t* wrow = wp + int64_t(i) * out_f;
            for (int o = 0; o < out_f; ++o) {
                const int16_t wc = wrow[o];
                if (wc == 1)
                    acc[o] += av;
                else if (wc == -1)
                    acc[o] -= av;
            }
        }
        int64_t* orow = out.codes.data() + int64_t(n) * out_f;
        for (int o = 0; o < out_f; ++o) orow[o] = acc[o];
    }
    return out;
}

WideTensor conv2d_backward_input(const FixedPointTensor& e, const FixedPointTensor& w,
                                 const ConvGeom& g, int batch) {
    note_generic_call();
    WideTensor out({batch, g.in_h, g.in_w, g.in_c}, (1 - e.bits) + (1 - w.bits));
    const int64_t bound = mac_bound(e.bits, w.bits, int64_t(g.kh) * g.kw * g.out_c);
    dispatch_conv<conv_bwd_input_impl<int32_t>, conv_bwd_input_impl<int64_t>>(
        e.codes.data(), w.codes.data(), out.codes.data(), g, batch, bound);
    assert_within(out, bound);
    return out;
}

WideTensor conv2d_backward_weights(const FixedPointTensor& e, const FixedPointTensor& in,
                                   const ConvGeom& g, int batch) {
    note_generic_call();
    WideTensor out({g.kh, g.kw, g.in_c, g.out_c}, (1 - e.bits) + (1 - in.bits));
    const int64_t bound = mac_bound(e.bits, in.bits, int64_t(batch) * g.out_h * g.out_w);
    dispatch_conv<conv_bwd_weights_impl<int32_t>, conv_bwd_weights_impl<int64_t>>(
        e.codes.data(), in.codes.data(), out.codes.data(), g, batch, bound);
    assert_within(out, bound);
    return out;
}

WideTensor fc_backward_input(const FixedPointTensor& e, const FixedPointTensor& w, int in_f,
                             int out_f, int batch) {
    note_generic_call();
    WideTensor out({batch, in_f}, (1 - e.bits) + (1 - w.bits));
    const int64_t bound = mac_bound(e.bits, w.bits, out_f);
    if (bound <= std::numeric_limits<int32_t>::max())
        fc_bwd_input_impl<int32_t>(e.codes.data(), w.codes.data(), out.codes.data(), in_f, out_f,
                                   batch);
    else
        fc_bwd_input_impl<int64_t>(e.codes.data(), w.codes.data(), out.codes.data(), in_f, out_f,
                                   batch);
    assert_within(out, bound);
    return out;
}

WideTensor fc_backward_weights(const FixedPointTensor& e, const FixedPointTensor& in, int in_f,
                               int out_f, int batch) {
    note_generic_call();
    WideTensor out({in_f, out_f}, (1 - e.bits) + (1 - in.bits));
    const int64_t bound = mac_bound(e.bits, in.bits, batch);
    if (bound <= std::numeric_limits<int32_t>::max())
        fc_bwd_weights_impl<int32_t>(e.codes.data(), in.codes.data(), out.codes.data(), in_f,
                                     out_f, batch);
    else
        fc_bwd_weights_impl<int64_t>(e.codes.data(), in.codes.data(), out.codes.data(), in_f,
                                     out_f, batch);
    assert_within(out, bound);
    return out;
}

void relu_forward(WideTensor& z, std::vector<uint8_t>& mask) {
    mask.assign(z.codes.size(), 0);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < z.size(); ++i) {
        if (z.codes[i] > 0)
            mask[i] = 1;
        else
            z.codes[i] = 0;
    }
}

WideTensor maxpool2_forward(const WideTensor& z, int h, int w, int c, int batch,
                            std::vector<int32_t>& argmax) {
    if (h % 2 != 0 || w % 2 != 0)
        throw InvariantError("maxpool2: spatial dims must be even");
    const int oh = h / 2, ow = w / 2;
    WideTensor out({batch, oh, ow, c}, z.scale_exp);
    argmax.assign(out.codes.size(), 0);
#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < batch; ++n) {
        for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < ow; ++x) {
                for (int ch = 0; ch < c; ++ch) {
                    int64_t best = std::numeric_limits<int64_t>::min();
                    int64_t best_idx = 0;
                    for (int dy = 0; dy < 2; ++dy) {
                        for (int dx = 0; dx < 2; ++dx) {
                            const int64_t idx =
                                ((int64_t(n) * h + (2 * y + dy)) * w + (2 * x + dx)) * c + ch;
                            if (z.codes[idx] > best) {  // first max wins on ties
                                best = z.codes[idx];
                                best_idx = idx;
                            }
                        }
                    }
                    const int64_t o = ((int64_t(n) * oh + y) * ow + x) * c + ch;
                    out.codes[o] = best;
                    argmax[o] = static_cast<int32_t>(best_idx);
                }
            }
        }
    }
    return out;
}

FixedPointTensor maxpool2_backward(const FixedPointTensor& e, const std::vector<int32_t>& argmax,
                                   const Shape& unpooled_shape) {
    FixedPointTensor out(unpooled_shape, e.bits);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < e.size(); ++i) out.codes[argmax[i]] = e.codes[i];
    return out;
}

void apply_relu_mask(FixedPointTensor& e, const std::vector<uint8_t>& mask) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < e.size(); ++i)
        if (!mask[i]) e.codes[i] = 0;
}

WideTensor sse_error(const FixedPointTensor& a, const FixedPointTensor& target, double* loss) {
    if (a.shape != target.shape || a.bits != target.bits)
        throw InvariantError("sse_error: output/target mismatch");
    WideTensor e(a.shape, 1 - a.bits);
    int64_t sumsq = 0;
#pragma omp parallel for reduction(+ : sumsq) schedule(static)
    for (int64_t i = 0; i < a.size(); ++i) {
        const int64_t d = int64_t(a.codes[i]) - target.codes[i];
        e.codes[i] = d;
        sumsq += d * d;
    }
    if (loss) *loss = std::ldexp(double(sumsq), 2 * (1 - a.bits));
    return e;
}

}  // namespace wage
