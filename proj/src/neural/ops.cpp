#include "semrl/neural/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "semrl/core/error.hpp"

namespace semrl::nn {

namespace {

template <typename T>
using RMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapM = Eigen::Map<RMat<T>>;
template <typename T>
using CMapM = Eigen::Map<const RMat<T>>;
template <typename T>
using MapV = Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>;
template <typename T>
using CMapV = Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>;

// Column sums of a row-major [rows, cols] block in fixed row order; Eigen's
// vectorized reductions pick their split from the buffer address.
template <typename T>
void add_column_sums(T* dst, const T* src, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const T* row = src + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) dst[c] += row[c];
  }
}

template <typename T>
bool tracking(std::initializer_list<const Tensor<T>*> inputs) {
  if (!grad_enabled()) return false;
  for (const auto* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

// Marks `out` as a tape node over the inputs that need gradients.
template <typename T, typename F>
void attach(Tensor<T>& out, std::initializer_list<const Tensor<T>*> inputs, F&& fn) {
  auto* o = out.impl();
  o->requires_grad = true;
  for (const auto* t : inputs) {
    (t->requires_grad() ? o->parents : o->saved).push_back(t->shared());
  }
  o->backward = std::forward<F>(fn);
}

template <typename T>
bool wants(const TensorImpl<T>* p) {
  return p->requires_grad;
}

[[noreturn]] void mismatch(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b));
}

template <typename T>
void need_rank(const char* op, const Tensor<T>& t, int rank) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " + shape_str(t.shape()));
  }
}

template <typename T>
void same_shape(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) mismatch(op, a.shape(), b.shape());
}

// Elementwise unary op with derivative expressed through input x and output y.
template <typename T, typename Fwd, typename Deriv>
Tensor<T> unary(const Tensor<T>& a, Fwd fwd, Deriv deriv) {
  std::vector<T> y(a.size());
  const auto& x = a.data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = fwd(x[i]);
  auto out = Tensor<T>::from(a.shape(), std::move(y));
  if (tracking({&a})) {
    attach(out, {&a}, [o = out.impl(), pa = a.impl(), deriv] {
      for (std::size_t i = 0; i < o->grad.size(); ++i) pa->grad[i] += o->grad[i] * deriv(pa->data[i], o->data[i]);
    });
  }
  return out;
}

}  // namespace

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  need_rank("matmul", a, 2);
  need_rank("matmul", b, 2);
  if (a.dim(1) != b.dim(0)) mismatch("matmul", a.shape(), b.shape());
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  auto out = Tensor<T>::zeros({m, n});
  MapM<T>(out.data().data(), m, n).noalias() = CMapM<T>(a.data().data(), m, k) * CMapM<T>(b.data().data(), k, n);
  if (tracking({&a, &b})) {
    attach(out, {&a, &b}, [o = out.impl(), pa = a.impl(), pb = b.impl(), m, k, n] {
      CMapM<T> g(o->grad.data(), m, n);
      if (wants(pa)) MapM<T>(pa->grad.data(), m, k).noalias() += g * CMapM<T>(pb->data.data(), k, n).transpose();
      if (wants(pb)) MapM<T>(pb->grad.data(), k, n).noalias() += CMapM<T>(pa->data.data(), m, k).transpose() * g;
    });
  }
  return out;
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias) {
  need_rank("linear", x, 2);
  need_rank("linear", w, 2);
  if (x.dim(1) != w.dim(1)) mismatch("linear", x.shape(), w.shape());
  if (bias.shape() != Shape{w.dim(0)}) mismatch("linear", w.shape(), bias.shape());
  const int b = x.dim(0), in = x.dim(1), outd = w.dim(0);
  auto out = Tensor<T>::zeros({b, outd});
  MapM<T> y(out.data().data(), b, outd);
  y.noalias() = CMapM<T>(x.data().data(), b, in) * CMapM<T>(w.data().data(), outd, in).transpose();
  y.rowwise() += CMapV<T>(bias.data().data(), outd);
  if (tracking({&x, &w, &bias})) {
    attach(out, {&x, &w, &bias}, [o = out.impl(), px = x.impl(), pw = w.impl(), pb = bias.impl(), b, in, outd] {
      CMapM<T> g(o->grad.data(), b, outd);
      if (wants(px)) MapM<T>(px->grad.data(), b, in).noalias() += g * CMapM<T>(pw->data.data(), outd, in);
      if (wants(pw)) MapM<T>(pw->grad.data(), outd, in).noalias() += g.transpose() * CMapM<T>(px->data.data(), b, in);
      if (wants(pb)) add_column_sums(pb->grad.data(), o->grad.data(), b, outd);
    });
  }
  return out;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  same_shape("add", a, b);
  std::vector<T> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.data()[i] + b.data()[i];
  auto out = Tensor<T>::from(a.shape(), std::move(y));
  if (tracking({&a, &b})) {
    attach(out, {&a, &b}, [o = out.impl(), pa = a.impl(), pb = b.impl()] {
      for (std::size_t i = 0; i < o->grad.size(); ++i) {
        if (wants(pa)) pa->grad[i] += o->grad[i];
        if (wants(pb)) pb->grad[i] += o->grad[i];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  same_shape("sub", a, b);
  std::vector<T> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.data()[i] - b.data()[i];
  auto out = Tensor<T>::from(a.shape(), std::move(y));
  if (tracking({&a, &b})) {
    attach(out, {&a, &b}, [o = out.impl(), pa = a.impl(), pb = b.impl()] {
      for (std::size_t i = 0; i < o->grad.size(); ++i) {
        if (wants(pa)) pa->grad[i] += o->grad[i];
        if (wants(pb)) pb->grad[i] -= o->grad[i];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  same_shape("mul", a, b);
  std::vector<T> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.data()[i] * b.data()[i];
  auto out = Tensor<T>::from(a.shape(), std::move(y));
  if (tracking({&a, &b})) {
    attach(out, {&a, &b}, [o = out.impl(), pa = a.impl(), pb = b.impl()] {
      for (std::size_t i = 0; i < o->grad.size(); ++i) {
        if (wants(pa)) pa->grad[i] += o->grad[i] * pb->data[i];
        if (wants(pb)) pb->grad[i] += o->grad[i] * pa->data[i];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T s) {
  return unary(a, [s](T x) { return x * s; }, [s](T, T) { return s; });
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& a, T s) {
  return unary(a, [s](T x) { return x + s; }, [](T, T) { return T(1); });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  return unary(a, [](T x) { return x > T(0) ? x : T(0); }, [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> exp(const Tensor<T>& a) {
  return unary(a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <typename T>
Tensor<T> square(const Tensor<T>& a) {
  return unary(a, [](T x) { return x * x; }, [](T x, T) { return T(2) * x; });
}

template <typename T>
Tensor<T> clip(const Tensor<T>& a, T lo, T hi) {
  if (!(lo <= hi)) throw UsageError("clip: lo > hi");
  return unary(a, [lo, hi](T x) { return std::clamp(x, lo, hi); },
               [lo, hi](T x, T) { return x > lo && x < hi ? T(1) : T(0); });
}

template <typename T>
Tensor<T> minimum(const Tensor<T>& a, const Tensor<T>& b) {
  same_shape("minimum", a, b);
  std::vector<T> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::min(a.data()[i], b.data()[i]);
  auto out = Tensor<T>::from(a.shape(), std::move(y));
  if (tracking({&a, &b})) {
    attach(out, {&a, &b}, [o = out.impl(), pa = a.impl(), pb = b.impl()] {
      for (std::size_t i = 0; i < o->grad.size(); ++i) {
        const bool to_a = pa->data[i] <= pb->data[i];
        if (to_a && wants(pa)) pa->grad[i] += o->grad[i];
        if (!to_a && wants(pb)) pb->grad[i] += o->grad[i];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  double acc = 0.0;
  for (T v : a.data()) acc += static_cast<double>(v);
  auto out = Tensor<T>::from({1}, {static_cast<T>(acc)});
  if (tracking({&a})) {
    attach(out, {&a}, [o = out.impl(), pa = a.impl()] {
      for (auto& g : pa->grad) g += o->grad[0];
    });
  }
  return out;
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
  if (a.size() == 0) throw ShapeError("mean of an empty tensor");
  double acc = 0.0;
  for (T v : a.data()) acc += static_cast<double>(v);
  const double n = static_cast<double>(a.size());
  auto out = Tensor<T>::from({1}, {static_cast<T>(acc / n)});
  if (tracking({&a})) {
    attach(out, {&a}, [o = out.impl(), pa = a.impl(), n] {
      const T g = static_cast<T>(static_cast<double>(o->grad[0]) / n);
      for (auto& x : pa->grad) x += g;
    });
  }
  return out;
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape) {
  if (numel(shape) != a.size()) mismatch("reshape", a.shape(), shape);
  auto out = Tensor<T>::from(std::move(shape), a.data());
  if (tracking({&a})) {
    attach(out, {&a}, [o = out.impl(), pa = a.impl()] {
      for (std::size_t i = 0; i < o->grad.size(); ++i) pa->grad[i] += o->grad[i];
    });
  }
  return out;
}

template <typename T>
Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const int b = parts[0].dim(0);
  int total = 0;
  for (const auto& p : parts) {
    need_rank("concat_cols", p, 2);
    if (p.dim(0) != b) mismatch("concat_cols", parts[0].shape(), p.shape());
    total += p.dim(1);
  }
  auto out = Tensor<T>::zeros({b, total});
  int off = 0;
  for (const auto& p : parts) {
    const int n = p.dim(1);
    for (int r = 0; r < b; ++r) {
      std::copy_n(p.data().begin() + r * n, n, out.data().begin() + r * total + off);
    }
    off += n;
  }
  bool any = false;
  for (const auto& p : parts) any = any || p.requires_grad();
  if (grad_enabled() && any) {
    auto* o = out.impl();
    o->requires_grad = true;
    std::vector<TensorImpl<T>*> raw;
    for (const auto& p : parts) {
      raw.push_back(p.impl());
      (p.requires_grad() ? o->parents : o->saved).push_back(p.shared());
    }
    o->backward = [o, raw, b, total] {
      int off = 0;
      for (auto* p : raw) {
        const int n = p->shape[1];
        if (p->requires_grad) {
          for (int r = 0; r < b; ++r) {
            for (int c = 0; c < n; ++c) p->grad[r * n + c] += o->grad[r * total + off + c];
          }
        }
        off += n;
      }
    };
  }
  return out;
}

template <typename T>
Tensor<T> slice_cols(const Tensor<T>& a, int start, int len) {
  need_rank("slice_cols", a, 2);
  const int b = a.dim(0), n = a.dim(1);
  if (start < 0 || len < 0 || start + len > n) {
    throw ShapeError("slice_cols: columns [" + std::to_string(start) + "," + std::to_string(start + len) +
                     ") outside " + shape_str(a.shape()));
  }
  auto out = Tensor<T>::zeros({b, len});
  for (int r = 0; r < b; ++r) std::copy_n(a.data().begin() + r * n + start, len, out.data().begin() + r * len);
  if (tracking({&a})) {
    attach(out, {&a}, [o = out.impl(), pa = a.impl(), b, n, start, len] {
      for (int r = 0; r < b; ++r) {
        for (int c = 0; c < len; ++c) pa->grad[r * n + start + c] += o->grad[r * len + c];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> gather_cols(const Tensor<T>& a, const std::vector<int>& idx) {
  need_rank("gather_cols", a, 2);
  const int b = a.dim(0), n = a.dim(1);
  if (static_cast<int>(idx.size()) != b) mismatch("gather_cols", a.shape(), {static_cast<int>(idx.size())});
  auto out = Tensor<T>::zeros({b});
  for (int r = 0; r < b; ++r) {
    if (idx[r] < 0 || idx[r] >= n) throw ShapeError("gather_cols: index out of range for " + shape_str(a.shape()));
    out.data()[r] = a.data()[r * n + idx[r]];
  }
  if (tracking({&a})) {
    attach(out, {&a}, [o = out.impl(), pa = a.impl(), idx, b, n] {
      for (int r = 0; r < b; ++r) pa->grad[r * n + idx[r]] += o->grad[r];
    });
  }
  return out;
}

template <typename T>
Tensor<T> max_rows(const Tensor<T>& a) {
  need_rank("max_rows", a, 2);
  const int b = a.dim(0), n = a.dim(1);
  if (n == 0) throw ShapeError("max_rows: empty rows");
  std::vector<int> arg(b);
  auto out = Tensor<T>::zeros({b});
  for (int r = 0; r < b; ++r) {
    const T* row = a.data().data() + r * n;
    arg[r] = static_cast<int>(std::max_element(row, row + n) - row);
    out.data()[r] = row[arg[r]];
  }
  if (tracking({&a})) {
    attach(out, {&a}, [o = out.impl(), pa = a.impl(), arg, b, n] {
      for (int r = 0; r < b; ++r) pa->grad[r * n + arg[r]] += o->grad[r];
    });
  }
  return out;
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& a) {
  need_rank("softmax", a, 2);
  const int b = a.dim(0), n = a.dim(1);
  auto out = Tensor<T>::zeros({b, n});
  for (int r = 0; r < b; ++r) {
    const T* x = a.data().data() + r * n;
    T* y = out.data().data() + r * n;
    const T mx = *std::max_element(x, x + n);
    double z = 0.0;
    for (int c = 0; c < n; ++c) z += std::exp(static_cast<double>(x[c] - mx));
    for (int c = 0; c < n; ++c) y[c] = static_cast<T>(std::exp(static_cast<double>(x[c] - mx)) / z);
  }
  if (tracking({&a})) {
    attach(out, {&a}, [o = out.impl(), pa = a.impl(), b, n] {
      for (int r = 0; r < b; ++r) {
        const T* y = o->data.data() + r * n;
        const T* g = o->grad.data() + r * n;
        double dot = 0.0;
        for (int c = 0; c < n; ++c) dot += static_cast<double>(g[c]) * y[c];
        for (int c = 0; c < n; ++c) pa->grad[r * n + c] += y[c] * (g[c] - static_cast<T>(dot));
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> log_softmax(const Tensor<T>& a) {
  need_rank("log_softmax", a, 2);
  const int b = a.dim(0), n = a.dim(1);
  auto out = Tensor<T>::zeros({b, n});
  for (int r = 0; r < b; ++r) {
    const T* x = a.data().data() + r * n;
    T* y = out.data().data() + r * n;
    const T mx = *std::max_element(x, x + n);
    double z = 0.0;
    for (int c = 0; c < n; ++c) z += std::exp(static_cast<double>(x[c] - mx));
    const double lse = static_cast<double>(mx) + std::log(z);
    for (int c = 0; c < n; ++c) y[c] = static_cast<T>(static_cast<double>(x[c]) - lse);
  }
  if (tracking({&a})) {
    attach(out, {&a}, [o = out.impl(), pa = a.impl(), b, n] {
      for (int r = 0; r < b; ++r) {
        const T* y = o->data.data() + r * n;
        const T* g = o->grad.data() + r * n;
        double gs = 0.0;
        for (int c = 0; c < n; ++c) gs += g[c];
        for (int c = 0; c < n; ++c) {
          pa->grad[r * n + c] += g[c] - static_cast<T>(std::exp(static_cast<double>(y[c])) * gs);
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias, int stride, int pad) {
  need_rank("conv2d", x, 4);
  need_rank("conv2d", w, 4);
  if (x.dim(1) != w.dim(1)) mismatch("conv2d", x.shape(), w.shape());
  if (bias.shape() != Shape{w.dim(0)}) mismatch("conv2d", w.shape(), bias.shape());
  if (stride < 1 || pad < 0) throw UsageError("conv2d: stride must be >= 1 and pad >= 0");
  const int b = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const int f = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const int oh = (h + 2 * pad - kh) / stride + 1, ow = (wd + 2 * pad - kw) / stride + 1;
  if (oh < 1 || ow < 1) mismatch("conv2d", x.shape(), w.shape());
  const int P = oh * ow, K = c * kh * kw, N = b * P;

  // im2col: cols[K, b*P]
  std::vector<T> cols(static_cast<std::size_t>(K) * N, T(0));
  const T* xd = x.data().data();
  for (int ci = 0; ci < c; ++ci) {
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj) {
        T* row = cols.data() + static_cast<std::size_t>((ci * kh + ki) * kw + kj) * N;
        for (int bi = 0; bi < b; ++bi) {
          const T* plane = xd + static_cast<std::size_t>(bi * c + ci) * h * wd;
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * stride - pad + ki;
            if (iy < 0 || iy >= h) continue;
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * stride - pad + kj;
              if (ix >= 0 && ix < wd) row[bi * P + oy * ow + ox] = plane[iy * wd + ix];
            }
          }
        }
      }
    }
  }
  RMat<T> tmp = CMapM<T>(w.data().data(), f, K) * CMapM<T>(cols.data(), K, N);
  auto out = Tensor<T>::zeros({b, f, oh, ow});
  for (int bi = 0; bi < b; ++bi) {
    for (int fi = 0; fi < f; ++fi) {
      T* dst = out.data().data() + static_cast<std::size_t>(bi * f + fi) * P;
      const T bv = bias.data()[fi];
      for (int p = 0; p < P; ++p) dst[p] = tmp(fi, bi * P + p) + bv;
    }
  }
  if (tracking({&x, &w, &bias})) {
    attach(out, {&x, &w, &bias},
           [o = out.impl(), px = x.impl(), pw = w.impl(), pb = bias.impl(), cols = std::move(cols), b, c, h, wd, f,
            kh, kw, oh, ow, stride, pad, P, K, N] {
             RMat<T> g(f, N);
             for (int bi = 0; bi < b; ++bi) {
               for (int fi = 0; fi < f; ++fi) {
                 const T* src = o->grad.data() + static_cast<std::size_t>(bi * f + fi) * P;
                 for (int p = 0; p < P; ++p) g(fi, bi * P + p) = src[p];
               }
             }
             if (wants(pb)) {
               for (int fi = 0; fi < f; ++fi) {
                 T acc = 0;
                 for (int j = 0; j < N; ++j) acc += g(fi, j);
                 pb->grad[static_cast<std::size_t>(fi)] += acc;
               }
             }
             if (wants(pw)) MapM<T>(pw->grad.data(), f, K).noalias() += g * CMapM<T>(cols.data(), K, N).transpose();
             if (wants(px)) {
               RMat<T> dcols = CMapM<T>(pw->data.data(), f, K).transpose() * g;
               for (int ci = 0; ci < c; ++ci) {
                 for (int ki = 0; ki < kh; ++ki) {
                   for (int kj = 0; kj < kw; ++kj) {
                     const T* row = dcols.data() + static_cast<std::size_t>((ci * kh + ki) * kw + kj) * N;
                     for (int bi = 0; bi < b; ++bi) {
                       T* plane = px->grad.data() + static_cast<std::size_t>(bi * c + ci) * h * wd;
                       for (int oy = 0; oy < oh; ++oy) {
                         const int iy = oy * stride - pad + ki;
                         if (iy < 0 || iy >= h) continue;
                         for (int ox = 0; ox < ow; ++ox) {
                           const int ix = ox * stride - pad + kj;
                           if (ix >= 0 && ix < wd) plane[iy * wd + ix] += row[bi * P + oy * ow + ox];
                         }
                       }
                     }
                   }
                 }
               }
             }
           });
  }
  return out;
}

namespace {

std::vector<int> window_counts(const std::vector<int>& windows, int batch, int available, const char* op) {
  if (windows.empty()) return std::vector<int>(static_cast<std::size_t>(batch), available);
  if (static_cast<int>(windows.size()) != batch) {
    throw ShapeError(std::string(op) + ": " + std::to_string(windows.size()) + " window counts for batch " +
                     std::to_string(batch));
  }
  std::vector<int> n(windows.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (windows[i] < 1) throw UsageError(std::string(op) + ": window count must be >= 1");
    n[i] = std::min(windows[i], available);
  }
  return n;
}

}  // namespace

template <typename T>
Tensor<T> conv1d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias, const std::vector<int>& windows) {
  need_rank("conv1d", x, 3);
  need_rank("conv1d", w, 3);
  if (x.dim(2) != w.dim(2)) mismatch("conv1d", x.shape(), w.shape());
  if (bias.shape() != Shape{w.dim(0)}) mismatch("conv1d", w.shape(), bias.shape());
  const int b = x.dim(0), L = x.dim(1), d = x.dim(2), f = w.dim(0), k = w.dim(1);
  const int To = L - k + 1;
  if (To < 1) mismatch("conv1d", x.shape(), w.shape());
  const auto n = window_counts(windows, b, To, "conv1d");
  using Strided = Eigen::Map<const RMat<T>, 0, Eigen::OuterStride<>>;

  auto out = Tensor<T>::zeros({b, To, f});
  CMapM<T> W(w.data().data(), f, k * d);
  CMapV<T> bv(bias.data().data(), f);
  for (int bi = 0; bi < b; ++bi) {
    Strided X(x.data().data() + static_cast<std::size_t>(bi) * L * d, n[bi], k * d, Eigen::OuterStride<>(d));
    MapM<T> Y(out.data().data() + static_cast<std::size_t>(bi) * To * f, n[bi], f);
    Y.noalias() = X * W.transpose();
    Y.rowwise() += bv;
  }
  if (tracking({&x, &w, &bias})) {
    attach(out, {&x, &w, &bias}, [o = out.impl(), px = x.impl(), pw = w.impl(), pb = bias.impl(), n, b, L, d, f, k, To] {
      CMapM<T> W(pw->data.data(), f, k * d);
      RMat<T> dX;
      for (int bi = 0; bi < b; ++bi) {
        CMapM<T> G(o->grad.data() + static_cast<std::size_t>(bi) * To * f, n[bi], f);
        if (wants(pb)) add_column_sums(pb->grad.data(), G.data(), n[bi], f);
        if (wants(pw)) {
          Strided X(px->data.data() + static_cast<std::size_t>(bi) * L * d, n[bi], k * d, Eigen::OuterStride<>(d));
          MapM<T>(pw->grad.data(), f, k * d).noalias() += G.transpose() * X;
        }
        if (wants(px)) {
          dX.noalias() = G * W;
          T* base = px->grad.data() + static_cast<std::size_t>(bi) * L * d;
          for (int t = 0; t < n[bi]; ++t) {
            const T* src = dX.data() + static_cast<std::size_t>(t) * k * d;
            T* dst = base + static_cast<std::size_t>(t) * d;
            for (int j = 0; j < k * d; ++j) dst[j] += src[j];
          }
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> max_over_time(const Tensor<T>& x, const std::vector<int>& windows) {
  need_rank("max_over_time", x, 3);
  const int b = x.dim(0), Tn = x.dim(1), f = x.dim(2);
  if (Tn < 1) throw ShapeError("max_over_time: empty time axis in " + shape_str(x.shape()));
  const auto n = window_counts(windows, b, Tn, "max_over_time");
  auto out = Tensor<T>::zeros({b, f});
  std::vector<int> arg(static_cast<std::size_t>(b) * f, 0);
  for (int bi = 0; bi < b; ++bi) {
    const T* base = x.data().data() + static_cast<std::size_t>(bi) * Tn * f;
    T* y = out.data().data() + static_cast<std::size_t>(bi) * f;
    int* a = arg.data() + static_cast<std::size_t>(bi) * f;
    std::copy_n(base, f, y);
    for (int t = 1; t < n[bi]; ++t) {
      const T* row = base + static_cast<std::size_t>(t) * f;
      for (int j = 0; j < f; ++j) {
        if (row[j] > y[j]) {
          y[j] = row[j];
          a[j] = t;
        }
      }
    }
  }
  if (tracking({&x})) {
    attach(out, {&x}, [o = out.impl(), px = x.impl(), arg = std::move(arg), b, Tn, f] {
      for (int bi = 0; bi < b; ++bi) {
        for (int j = 0; j < f; ++j) {
          const std::size_t i = static_cast<std::size_t>(bi) * f + j;
          px->grad[(static_cast<std::size_t>(bi) * Tn + arg[i]) * f + j] += o->grad[i];
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> embedding_lookup(const Tensor<T>& table, const std::vector<int>& ids, int batch, int length,
                           int frozen_row) {
  need_rank("embedding_lookup", table, 2);
  if (static_cast<int>(ids.size()) != batch * length) {
    throw ShapeError("embedding_lookup: " + std::to_string(ids.size()) + " ids for batch " + std::to_string(batch) +
                     " x length " + std::to_string(length));
  }
  const int V = table.dim(0), d = table.dim(1);
  auto out = Tensor<T>::zeros({batch, length, d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= V) {
      throw CorruptionError("token id " + std::to_string(ids[i]) + " outside vocabulary of size " + std::to_string(V));
    }
    std::copy_n(table.data().begin() + static_cast<std::ptrdiff_t>(ids[i]) * d, d,
                out.data().begin() + static_cast<std::ptrdiff_t>(i) * d);
  }
  if (tracking({&table})) {
    attach(out, {&table}, [o = out.impl(), pt = table.impl(), ids, d, frozen_row] {
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] == frozen_row) continue;
        T* dst = pt->grad.data() + static_cast<std::size_t>(ids[i]) * d;
        const T* src = o->grad.data() + i * d;
        for (int j = 0; j < d; ++j) dst[j] += src[j];
      }
    });
  }
  return out;
}

#define SEMRL_INSTANTIATE_OPS(T)                                                                             \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                             \
  template Tensor<T> linear(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                           \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                                \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                                \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                                \
  template Tensor<T> scale(const Tensor<T>&, T);                                                             \
  template Tensor<T> add_scalar(const Tensor<T>&, T);                                                        \
  template Tensor<T> relu(const Tensor<T>&);                                                                 \
  template Tensor<T> exp(const Tensor<T>&);                                                                  \
  template Tensor<T> square(const Tensor<T>&);                                                               \
  template Tensor<T> clip(const Tensor<T>&, T, T);                                                           \
  template Tensor<T> minimum(const Tensor<T>&, const Tensor<T>&);                                            \
  template Tensor<T> sum(const Tensor<T>&);                                                                  \
  template Tensor<T> mean(const Tensor<T>&);                                                                 \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                                       \
  template Tensor<T> concat_cols(const std::vector<Tensor<T>>&);                                             \
  template Tensor<T> slice_cols(const Tensor<T>&, int, int);                                                 \
  template Tensor<T> gather_cols(const Tensor<T>&, const std::vector<int>&);                                 \
  template Tensor<T> max_rows(const Tensor<T>&);                                                             \
  template Tensor<T> softmax(const Tensor<T>&);                                                              \
  template Tensor<T> log_softmax(const Tensor<T>&);                                                          \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int);                 \
  template Tensor<T> conv1d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, const std::vector<int>&);  \
  template Tensor<T> max_over_time(const Tensor<T>&, const std::vector<int>&);                               \
  template Tensor<T> embedding_lookup(const Tensor<T>&, const std::vector<int>&, int, int, int);

SEMRL_INSTANTIATE_OPS(float)
SEMRL_INSTANTIATE_OPS(double)

}  // namespace semrl::nn
