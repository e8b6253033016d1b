#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "spectromind/tensor.hpp"

// Data-parallel inner loops. Every kernel comes in two flavours: the OpenMP
// build under kernels:: and a plain-loop reference under kernels::serial.
// Both call the same per-element helpers, so results are bitwise identical
// for any thread count: each output element is written by exactly one thread
// and accumulated in a fixed order. bench/bench_kernels compares the two.

namespace spectromind::kernels {

namespace detail {

template <typename T>
inline T conv2d_out_element(const TensorT<T>& x, const TensorT<T>& w, std::size_t b,
                            std::size_t o, std::size_t oh, std::size_t ow, std::size_t stride,
                            std::size_t pad) {
    const std::size_t C = x.shape[1], H = x.shape[2], W = x.shape[3];
    const std::size_t KH = w.shape[2], KW = w.shape[3];
    T acc = T(0);
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t kh = 0; kh < KH; ++kh) {
            const std::ptrdiff_t ih = std::ptrdiff_t(oh * stride + kh) - std::ptrdiff_t(pad);
            if (ih < 0 || ih >= std::ptrdiff_t(H)) continue;
            for (std::size_t kw = 0; kw < KW; ++kw) {
                const std::ptrdiff_t iw = std::ptrdiff_t(ow * stride + kw) - std::ptrdiff_t(pad);
                if (iw < 0 || iw >= std::ptrdiff_t(W)) continue;
                acc += x.at(b, c, std::size_t(ih), std::size_t(iw)) * w.at(o, c, kh, kw);
            }
        }
    }
    return acc;
}

template <typename T>
inline T conv2d_in_grad_element(const TensorT<T>& gout, const TensorT<T>& w, std::size_t b,
                                std::size_t c, std::size_t ih, std::size_t iw, std::size_t stride,
                                std::size_t pad) {
    const std::size_t O = gout.shape[1], OH = gout.shape[2], OW = gout.shape[3];
    const std::size_t KH = w.shape[2], KW = w.shape[3];
    T acc = T(0);
    for (std::size_t o = 0; o < O; ++o) {
        for (std::size_t kh = 0; kh < KH; ++kh) {
            const std::ptrdiff_t num_h = std::ptrdiff_t(ih + pad) - std::ptrdiff_t(kh);
            if (num_h < 0 || num_h % std::ptrdiff_t(stride) != 0) continue;
            const std::size_t oh = std::size_t(num_h) / stride;
            if (oh >= OH) continue;
            for (std::size_t kw = 0; kw < KW; ++kw) {
                const std::ptrdiff_t num_w = std::ptrdiff_t(iw + pad) - std::ptrdiff_t(kw);
                if (num_w < 0 || num_w % std::ptrdiff_t(stride) != 0) continue;
                const std::size_t ow = std::size_t(num_w) / stride;
                if (ow >= OW) continue;
                acc += gout.at(b, o, oh, ow) * w.at(o, c, kh, kw);
            }
        }
    }
    return acc;
}

template <typename T>
inline T conv2d_w_grad_element(const TensorT<T>& gout, const TensorT<T>& x, std::size_t o,
                               std::size_t c, std::size_t kh, std::size_t kw, std::size_t stride,
                               std::size_t pad) {
    const std::size_t B = x.shape[0], H = x.shape[2], W = x.shape[3];
    const std::size_t OH = gout.shape[2], OW = gout.shape[3];
    T acc = T(0);
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t oh = 0; oh < OH; ++oh) {
            const std::ptrdiff_t ih = std::ptrdiff_t(oh * stride + kh) - std::ptrdiff_t(pad);
            if (ih < 0 || ih >= std::ptrdiff_t(H)) continue;
            for (std::size_t ow = 0; ow < OW; ++ow) {
                const std::ptrdiff_t iw = std::ptrdiff_t(ow * stride + kw) - std::ptrdiff_t(pad);
                if (iw < 0 || iw >= std::ptrdiff_t(W)) continue;
                acc += gout.at(b, o, oh, ow) * x.at(b, c, std::size_t(ih), std::size_t(iw));
            }
        }
    }
    return acc;
}

template <typename T>
inline T linear_out_element(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>* bias,
                            std::size_t b, std::size_t o) {
    const std::size_t I = x.shape[1];
    T acc = bias ? (*bias)[o] : T(0);
    const T* xr = x.data.data() + b * I;
    const T* wr = w.data.data() + o * I;
    for (std::size_t i = 0; i < I; ++i) acc += xr[i] * wr[i];
    return acc;
}

// magnitude of one-sided DFT bin k of the windowed frame starting at x[start]
inline double stft_bin_mag(const double* x, std::size_t start, const std::vector<double>& window,
                           const std::vector<double>& cos_tab, const std::vector<double>& sin_tab,
                           std::size_t k) {
    const std::size_t W = window.size();
    const double* ct = cos_tab.data() + k * W;
    const double* st = sin_tab.data() + k * W;
    double re = 0.0, im = 0.0;
    for (std::size_t n = 0; n < W; ++n) {
        const double v = x[start + n] * window[n];
        re += v * ct[n];
        im -= v * st[n];
    }
    return std::sqrt(re * re + im * im);
}

}  // namespace detail

// out: [B, O, OH, OW]; x: [B, C, H, W]; w: [O, C, KH, KW]; bias optional [O]
template <typename T>
void conv2d_forward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>* bias,
                    std::size_t stride, std::size_t pad, TensorT<T>& out) {
    const std::ptrdiff_t B = std::ptrdiff_t(out.shape[0]), O = std::ptrdiff_t(out.shape[1]);
    const std::size_t OH = out.shape[2], OW = out.shape[3];
#pragma omp parallel for collapse(2) schedule(static)
    for (std::ptrdiff_t b = 0; b < B; ++b)
        for (std::ptrdiff_t o = 0; o < O; ++o)
            for (std::size_t oh = 0; oh < OH; ++oh)
                for (std::size_t ow = 0; ow < OW; ++ow) {
                    T v = detail::conv2d_out_element(x, w, b, o, oh, ow, stride, pad);
                    if (bias) v += (*bias)[std::size_t(o)];
                    out.at(b, o, oh, ow) = v;
                }
}

template <typename T>
void conv2d_backward_input(const TensorT<T>& gout, const TensorT<T>& w, std::size_t stride,
                           std::size_t pad, TensorT<T>& gin) {
    const std::ptrdiff_t B = std::ptrdiff_t(gin.shape[0]), C = std::ptrdiff_t(gin.shape[1]);
    const std::size_t H = gin.shape[2], W = gin.shape[3];
#pragma omp parallel for collapse(2) schedule(static)
    for (std::ptrdiff_t b = 0; b < B; ++b)
        for (std::ptrdiff_t c = 0; c < C; ++c)
            for (std::size_t ih = 0; ih < H; ++ih)
                for (std::size_t iw = 0; iw < W; ++iw)
                    gin.at(b, c, ih, iw) =
                        detail::conv2d_in_grad_element(gout, w, b, c, ih, iw, stride, pad);
}

// gw accumulated from scratch (overwritten); gbias optional
template <typename T>
void conv2d_backward_weights(const TensorT<T>& gout, const TensorT<T>& x, std::size_t stride,
                             std::size_t pad, TensorT<T>& gw, TensorT<T>* gbias) {
    const std::ptrdiff_t O = std::ptrdiff_t(gw.shape[0]), C = std::ptrdiff_t(gw.shape[1]);
    const std::size_t KH = gw.shape[2], KW = gw.shape[3];
#pragma omp parallel for collapse(2) schedule(static)
    for (std::ptrdiff_t o = 0; o < O; ++o)
        for (std::ptrdiff_t c = 0; c < C; ++c)
            for (std::size_t kh = 0; kh < KH; ++kh)
                for (std::size_t kw = 0; kw < KW; ++kw)
                    gw.at(o, c, kh, kw) =
                        detail::conv2d_w_grad_element(gout, x, o, c, kh, kw, stride, pad);
    if (gbias) {
        const std::size_t B = gout.shape[0], OH = gout.shape[2], OW = gout.shape[3];
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t o = 0; o < O; ++o) {
            T acc = T(0);
            for (std::size_t b = 0; b < B; ++b)
                for (std::size_t oh = 0; oh < OH; ++oh)
                    for (std::size_t ow = 0; ow < OW; ++ow) acc += gout.at(b, o, oh, ow);
            (*gbias)[std::size_t(o)] = acc;
        }
    }
}

// x: [B, I]; w: [O, I]; out: [B, O]
template <typename T>
void linear_forward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>* bias,
                    TensorT<T>& out) {
    const std::ptrdiff_t B = std::ptrdiff_t(x.shape[0]), O = std::ptrdiff_t(w.shape[0]);
#pragma omp parallel for collapse(2) schedule(static)
    for (std::ptrdiff_t b = 0; b < B; ++b)
        for (std::ptrdiff_t o = 0; o < O; ++o)
            out.at(b, o) = detail::linear_out_element(x, w, bias, b, o);
}

template <typename T>
void linear_backward(const TensorT<T>& gout, const TensorT<T>& x, const TensorT<T>& w,
                     TensorT<T>& gin, TensorT<T>& gw, TensorT<T>* gbias) {
    const std::ptrdiff_t B = std::ptrdiff_t(x.shape[0]);
    const std::ptrdiff_t O = std::ptrdiff_t(w.shape[0]), I = std::ptrdiff_t(w.shape[1]);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < B; ++b)
        for (std::ptrdiff_t i = 0; i < I; ++i) {
            T acc = T(0);
            for (std::ptrdiff_t o = 0; o < O; ++o) acc += gout.at(b, o) * w.at(o, i);
            gin.at(b, i) = acc;
        }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t o = 0; o < O; ++o) {
        for (std::ptrdiff_t i = 0; i < I; ++i) {
            T acc = T(0);
            for (std::ptrdiff_t b = 0; b < B; ++b) acc += gout.at(b, o) * x.at(b, i);
            gw.at(o, i) = acc;
        }
        if (gbias) {
            T acc = T(0);
            for (std::ptrdiff_t b = 0; b < B; ++b) acc += gout.at(b, o);
            (*gbias)[std::size_t(o)] = acc;
        }
    }
}

// signals: [C x N] row-major; out: [C x bins x frames] magnitudes (no scaling)
inline void stft_magnitudes(const std::vector<double>& signals, std::size_t channels,
                            std::size_t n, const std::vector<double>& window, std::size_t hop,
                            std::size_t frames, const std::vector<double>& cos_tab,
                            const std::vector<double>& sin_tab, std::size_t bins,
                            std::vector<double>& out) {
    out.assign(channels * bins * frames, 0.0);
#pragma omp parallel for collapse(2) schedule(static)
    for (std::ptrdiff_t c = 0; c < std::ptrdiff_t(channels); ++c)
        for (std::ptrdiff_t f = 0; f < std::ptrdiff_t(frames); ++f) {
            const double* x = signals.data() + std::size_t(c) * n;
            const std::size_t start = std::size_t(f) * hop;
            for (std::size_t k = 0; k < bins; ++k)
                out[(std::size_t(c) * bins + k) * frames + std::size_t(f)] =
                    detail::stft_bin_mag(x, start, window, cos_tab, sin_tab, k);
        }
}

namespace serial {

template <typename T>
void conv2d_forward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>* bias,
                    std::size_t stride, std::size_t pad, TensorT<T>& out) {
    const std::size_t B = out.shape[0], O = out.shape[1], OH = out.shape[2], OW = out.shape[3];
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t o = 0; o < O; ++o)
            for (std::size_t oh = 0; oh < OH; ++oh)
                for (std::size_t ow = 0; ow < OW; ++ow) {
                    T v = detail::conv2d_out_element(x, w, b, o, oh, ow, stride, pad);
                    if (bias) v += (*bias)[o];
                    out.at(b, o, oh, ow) = v;
                }
}

template <typename T>
void conv2d_backward_input(const TensorT<T>& gout, const TensorT<T>& w, std::size_t stride,
                           std::size_t pad, TensorT<T>& gin) {
    const std::size_t B = gin.shape[0], C = gin.shape[1], H = gin.shape[2], W = gin.shape[3];
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t ih = 0; ih < H; ++ih)
                for (std::size_t iw = 0; iw < W; ++iw)
                    gin.at(b, c, ih, iw) =
                        detail::conv2d_in_grad_element(gout, w, b, c, ih, iw, stride, pad);
}

template <typename T>
void conv2d_backward_weights(const TensorT<T>& gout, const TensorT<T>& x, std::size_t stride,
                             std::size_t pad, TensorT<T>& gw, TensorT<T>* gbias) {
    const std::size_t O = gw.shape[0], C = gw.shape[1], KH = gw.shape[2], KW = gw.shape[3];
    for (std::size_t o = 0; o < O; ++o)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t kh = 0; kh < KH; ++kh)
                for (std::size_t kw = 0; kw < KW; ++kw)
                    gw.at(o, c, kh, kw) =
                        detail::conv2d_w_grad_element(gout, x, o, c, kh, kw, stride, pad);
    if (gbias) {
        const std::size_t B = gout.shape[0], OH = gout.shape[2], OW = gout.shape[3];
        for (std::size_t o = 0; o < O; ++o) {
            T acc = T(0);
            for (std::size_t b = 0; b < B; ++b)
                for (std::size_t oh = 0; oh < OH; ++oh)
                    for (std::size_t ow = 0; ow < OW; ++ow) acc += gout.at(b, o, oh, ow);
            (*gbias)[o] = acc;
        }
    }
}

template <typename T>
void linear_forward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>* bias,
                    TensorT<T>& out) {
    const std::size_t B = x.shape[0], O = w.shape[0];
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t o = 0; o < O; ++o)
            out.at(b, o) = detail::linear_out_element(x, w, bias, b, o);
}

inline void stft_magnitudes(const std::vector<double>& signals, std::size_t channels,
                            std::size_t n, const std::vector<double>& window, std::size_t hop,
                            std::size_t frames, const std::vector<double>& cos_tab,
                            const std::vector<double>& sin_tab, std::size_t bins,
                            std::vector<double>& out) {
    out.assign(channels * bins * frames, 0.0);
    for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t f = 0; f < frames; ++f) {
            const double* x = signals.data() + c * n;
            for (std::size_t k = 0; k < bins; ++k)
                out[(c * bins + k) * frames + f] =
                    detail::stft_bin_mag(x, f * hop, window, cos_tab, sin_tab, k);
        }
}

}  // namespace serial
}  // namespace spectromind::kernels
