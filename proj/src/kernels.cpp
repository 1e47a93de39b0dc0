// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "splitlearn/kernels.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "splitlearn/error.hpp"

namespace splitlearn {

namespace {

#ifndef NDEBUG
void check_finite(const Tensor& t, const char* op) {
  if (!t.all_finite()) throw std::logic_error(std::string(op) + " produced a non-finite value");
}
#else
void check_finite(const Tensor&, const char*) {}
#endif

[[noreturn]] void mismatch(const char* op, const Shape& a, const Shape& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + to_string(a) + " and " + to_string(b));
}

struct ImageDims {
  std::size_t n, h, w, c;
};

ImageDims image_dims(const Tensor& t, const char* op) {
  if (t.rank() == 3) return {1, t.dim(0), t.dim(1), t.dim(2)};
  if (t.rank() == 4) return {t.dim(0), t.dim(1), t.dim(2), t.dim(3)};
  throw DimensionError(std::string(op) + ": expected H×W×C or N×H×W×C input, got " + to_string(t.shape()));
}

Shape image_shape(bool batched, std::size_t n, std::size_t h, std::size_t w, std::size_t c) {
  if (batched) return {n, h, w, c};
  return {h, w, c};
}

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw DimensionError(std::string(op) + ": expected a matrix, got " + to_string(t.shape()));
}

}  // namespace

ConvGeometry conv_geometry(std::size_t h, std::size_t w, std::size_t kh, std::size_t kw, std::size_t stride,
                           Padding padding) {
  if (stride == 0 || kh == 0 || kw == 0) throw DimensionError("kernel extent and stride must be positive");
  ConvGeometry g;
  if (padding == Padding::valid) {
    if (kh > h || kw > w) {
      throw DimensionError("kernel " + std::to_string(kh) + "x" + std::to_string(kw) + " exceeds input " +
                           std::to_string(h) + "x" + std::to_string(w));
    }
    g.out_h = (h - kh) / stride + 1;
    g.out_w = (w - kw) / stride + 1;
    return g;
  }
  g.out_h = (h + stride - 1) / stride;
  g.out_w = (w + stride - 1) / stride;
  const std::size_t need_h = (g.out_h - 1) * stride + kh;
  const std::size_t need_w = (g.out_w - 1) * stride + kw;
  const std::size_t pad_h = need_h > h ? need_h - h : 0;
  const std::size_t pad_w = need_w > w ? need_w - w : 0;
  if (kh > h + pad_h || kw > w + pad_w) throw DimensionError("kernel exceeds padded input");
  g.pad_top = pad_h / 2;
  g.pad_left = pad_w / 2;
  return g;
}

Shape conv_out_shape(const Shape& in, const Shape& kernel, std::size_t stride, Padding padding) {
  if (in.size() != 3 || kernel.size() != 4) mismatch("conv_out_shape", in, kernel);
  if (kernel[2] != in[2]) mismatch("conv_out_shape", in, kernel);
  const auto g = conv_geometry(in[0], in[1], kernel[0], kernel[1], stride, padding);
  return {g.out_h, g.out_w, kernel[3]};
}

Shape pool_out_shape(const Shape& in, std::size_t window, std::size_t stride) {
  if (in.size() != 3) throw DimensionError("maxpool: expected H×W×C input, got " + to_string(in));
  if (window == 0 || window > in[0] || window > in[1]) {
    throw DimensionError("maxpool window " + std::to_string(window) + " exceeds input " + to_string(in));
  }
  const auto g = conv_geometry(in[0], in[1], window, window, stride, Padding::valid);
  return {g.out_h, g.out_w, in[2]};
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) mismatch("matmul", a.shape(), b.shape());
  Tensor c({m, n});
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* row = pc + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      const double* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += av * brow[j];
    }
  }
  check_finite(c, "matmul");
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul_tn");
  require_rank2(b, "matmul_tn");
  const std::size_t k = a.dim(0), m = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) mismatch("matmul_tn", a.shape(), b.shape());
  Tensor c({m, n});
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
  for (std::size_t p = 0; p < k; ++p) {
    const double* brow = pb + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = pa[p * m + i];
      double* row = pc + i * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += av * brow[j];
    }
  }
  check_finite(c, "matmul_tn");
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul_nt");
  require_rank2(b, "matmul_nt");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
  if (b.dim(1) != k) mismatch("matmul_nt", a.shape(), b.shape());
  Tensor c({m, n});
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += pa[i * k + p] * pb[j * k + p];
      pc[i * n + j] = s;
    }
  }
  check_finite(c, "matmul_nt");
  return c;
}

Tensor conv2d(const Tensor& input, const Tensor& kernel, std::size_t stride, Padding padding) {
  const auto d = image_dims(input, "conv2d");
  if (kernel.rank() != 4 || kernel.dim(2) != d.c) mismatch("conv2d", input.shape(), kernel.shape());
  const std::size_t kh = kernel.dim(0), kw = kernel.dim(1), cout = kernel.dim(3);
  const auto g = conv_geometry(d.h, d.w, kh, kw, stride, padding);
  Tensor out(image_shape(input.rank() == 4, d.n, g.out_h, g.out_w, cout));

  const double* in = input.data().data();
  const double* k = kernel.data().data();
  double* o = out.data().data();
  for (std::size_t n = 0; n < d.n; ++n) {
    for (std::size_t oy = 0; oy < g.out_h; ++oy) {
      for (std::size_t ox = 0; ox < g.out_w; ++ox) {
        double* orow = o + ((n * g.out_h + oy) * g.out_w + ox) * cout;
        for (std::size_t ky = 0; ky < kh; ++ky) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) - static_cast<std::ptrdiff_t>(g.pad_top);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(d.h)) continue;
          for (std::size_t kx = 0; kx < kw; ++kx) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(ox * stride + kx) - static_cast<std::ptrdiff_t>(g.pad_left);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(d.w)) continue;
            const double* ipix = in + ((n * d.h + static_cast<std::size_t>(iy)) * d.w + static_cast<std::size_t>(ix)) * d.c;
            const double* kbase = k + (ky * kw + kx) * d.c * cout;
            for (std::size_t ci = 0; ci < d.c; ++ci) {
              const double v = ipix[ci];
              const double* krow = kbase + ci * cout;
              for (std::size_t co = 0; co < cout; ++co) orow[co] += v * krow[co];
            }
          }
        }
      }
    }
  }
  check_finite(out, "conv2d");
  return out;
}

Tensor conv2d_grad_input(const Tensor& grad_out, const Tensor& kernel, const Shape& input_shape, std::size_t stride,
                         Padding padding) {
  Tensor grad_in(input_shape);
  const auto d = image_dims(grad_in, "conv2d_grad_input");
  if (kernel.rank() != 4 || kernel.dim(2) != d.c) mismatch("conv2d_grad_input", input_shape, kernel.shape());
  const std::size_t kh = kernel.dim(0), kw = kernel.dim(1), cout = kernel.dim(3);
  const auto g = conv_geometry(d.h, d.w, kh, kw, stride, padding);
  if (grad_out.shape() != image_shape(input_shape.size() == 4, d.n, g.out_h, g.out_w, cout)) {
    mismatch("conv2d_grad_input", grad_out.shape(), input_shape);
  }

  const double* go = grad_out.data().data();
  const double* k = kernel.data().data();
  double* gi = grad_in.data().data();
  for (std::size_t n = 0; n < d.n; ++n) {
    for (std::size_t oy = 0; oy < g.out_h; ++oy) {
      for (std::size_t ox = 0; ox < g.out_w; ++ox) {
        const double* grow = go + ((n * g.out_h + oy) * g.out_w + ox) * cout;
        for (std::size_t ky = 0; ky < kh; ++ky) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) - static_cast<std::ptrdiff_t>(g.pad_top);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(d.h)) continue;
          for (std::size_t kx = 0; kx < kw; ++kx) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(ox * stride + kx) - static_cast<std::ptrdiff_t>(g.pad_left);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(d.w)) continue;
            double* gpix = gi + ((n * d.h + static_cast<std::size_t>(iy)) * d.w + static_cast<std::size_t>(ix)) * d.c;
            const double* kbase = k + (ky * kw + kx) * d.c * cout;
            for (std::size_t ci = 0; ci < d.c; ++ci) {
              const double* krow = kbase + ci * cout;
              double s = 0.0;
              for (std::size_t co = 0; co < cout; ++co) s += krow[co] * grow[co];
              gpix[ci] += s;
            }
          }
        }
      }
    }
  }
  check_finite(grad_in, "conv2d_grad_input");
  return grad_in;
}

Tensor conv2d_grad_kernel(const Tensor& input, const Tensor& grad_out, const Shape& kernel_shape, std::size_t stride,
                          Padding padding) {
  const auto d = image_dims(input, "conv2d_grad_kernel");
  if (kernel_shape.size() != 4 || kernel_shape[2] != d.c) mismatch("conv2d_grad_kernel", input.shape(), kernel_shape);
  const std::size_t kh = kernel_shape[0], kw = kernel_shape[1], cout = kernel_shape[3];
  const auto g = conv_geometry(d.h, d.w, kh, kw, stride, padding);
  if (grad_out.shape() != image_shape(input.rank() == 4, d.n, g.out_h, g.out_w, cout)) {
    mismatch("conv2d_grad_kernel", grad_out.shape(), input.shape());
  }
  Tensor grad_k(kernel_shape);

  const double* in = input.data().data();
  const double* go = grad_out.data().data();
  double* gk = grad_k.data().data();
  for (std::size_t n = 0; n < d.n; ++n) {
    for (std::size_t oy = 0; oy < g.out_h; ++oy) {
      for (std::size_t ox = 0; ox < g.out_w; ++ox) {
        const double* grow = go + ((n * g.out_h + oy) * g.out_w + ox) * cout;
        for (std::size_t ky = 0; ky < kh; ++ky) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) - static_cast<std::ptrdiff_t>(g.pad_top);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(d.h)) continue;
          for (std::size_t kx = 0; kx < kw; ++kx) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(ox * stride + kx) - static_cast<std::ptrdiff_t>(g.pad_left);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(d.w)) continue;
            const double* ipix = in + ((n * d.h + static_cast<std::size_t>(iy)) * d.w + static_cast<std::size_t>(ix)) * d.c;
            double* kbase = gk + (ky * kw + kx) * d.c * cout;
            for (std::size_t ci = 0; ci < d.c; ++ci) {
              const double v = ipix[ci];
              double* krow = kbase + ci * cout;
              for (std::size_t co = 0; co < cout; ++co) krow[co] += v * grow[co];
            }
          }
        }
      }
    }
  }
  check_finite(grad_k, "conv2d_grad_kernel");
  return grad_k;
}

PoolResult maxpool(const Tensor& input, std::size_t window, std::size_t stride) {
  const auto d = image_dims(input, "maxpool");
  const Shape out_hwc = pool_out_shape({d.h, d.w, d.c}, window, stride);
  PoolResult r{Tensor(image_shape(input.rank() == 4, d.n, out_hwc[0], out_hwc[1], d.c)), {}};
  r.argmax.resize(r.output.size());

  const double* in = input.data().data();
  double* o = r.output.data().data();
  std::size_t idx = 0;
  for (std::size_t n = 0; n < d.n; ++n) {
    for (std::size_t oy = 0; oy < out_hwc[0]; ++oy) {
      for (std::size_t ox = 0; ox < out_hwc[1]; ++ox) {
        for (std::size_t c = 0; c < d.c; ++c, ++idx) {
          double best = -std::numeric_limits<double>::infinity();
          std::size_t best_at = 0;
          for (std::size_t ky = 0; ky < window; ++ky) {
            for (std::size_t kx = 0; kx < window; ++kx) {
              const std::size_t at = ((n * d.h + oy * stride + ky) * d.w + ox * stride + kx) * d.c + c;
              if (in[at] > best || (ky == 0 && kx == 0)) {
                best = in[at];
                best_at = at;
              }
            }
          }
          o[idx] = best;
          r.argmax[idx] = best_at;
        }
      }
    }
  }
  return r;
}

Tensor maxpool_grad_input(const Tensor& grad_out, const std::vector<std::size_t>& argmax, const Shape& input_shape) {
  if (grad_out.size() != argmax.size()) {
    throw DimensionError("maxpool_grad_input: gradient has " + std::to_string(grad_out.size()) +
                         " elements but index map has " + std::to_string(argmax.size()));
  }
  Tensor grad_in(input_shape);
  for (std::size_t i = 0; i < argmax.size(); ++i) {
    if (argmax[i] >= grad_in.size()) throw DimensionError("maxpool_grad_input: index map out of range");
    grad_in[argmax[i]] += grad_out[i];
  }
  return grad_in;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) mismatch("add", a.shape(), b.shape());
  Tensor c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
  return c;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) mismatch("sub", a.shape(), b.shape());
  Tensor c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
  return c;
}

Tensor scale(const Tensor& a, double s) {
  Tensor c = a;
  for (auto& v : c.data()) v *= s;
  return c;
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  if (bias.rank() != 1 || x.rank() == 0 || x.shape().back() != bias.size()) mismatch("add_bias", x.shape(), bias.shape());
  Tensor y = x;
  const std::size_t c = bias.size();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bias[i % c];
  return y;
}

Tensor sum_to_last_axis(const Tensor& x) {
  const std::size_t c = x.shape().back();
  Tensor s({c});
  for (std::size_t i = 0; i < x.size(); ++i) s[i % c] += x[i];
  return s;
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.data()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor relu_grad(const Tensor& grad_out, const Tensor& out) {
  if (grad_out.shape() != out.shape()) mismatch("relu_grad", grad_out.shape(), out.shape());
  Tensor g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(out[i] > 0.0)) g[i] = 0.0;
  }
  return g;
}

Tensor softmax(const Tensor& x) {
  const std::size_t c = x.shape().back();
  Tensor y = x;
  for (std::size_t row = 0; row < y.size(); row += c) {
    double* p = y.data().data() + row;
    const double m = *std::max_element(p, p + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      p[j] = std::exp(p[j] - m);
      z += p[j];
    }
    for (std::size_t j = 0; j < c; ++j) p[j] /= z;
  }
  return y;
}

Tensor softmax_grad(const Tensor& grad_out, const Tensor& out) {
  if (grad_out.shape() != out.shape()) mismatch("softmax_grad", grad_out.shape(), out.shape());
  const std::size_t c = out.shape().back();
  Tensor g(out.shape());
  for (std::size_t row = 0; row < out.size(); row += c) {
    double dot = 0.0;
    for (std::size_t j = 0; j < c; ++j) dot += grad_out[row + j] * out[row + j];
    for (std::size_t j = 0; j < c; ++j) g[row + j] = out[row + j] * (grad_out[row + j] - dot);
  }
  return g;
}

}  // namespace splitlearn
