#pragma once

#include <vector>

#include "semrl/neural/tensor.hpp"

// Differentiable ops. Batched tensors are row-major; the leading dimension is
// the batch. Every op records a tape node when grad mode is on and at least
// one input requires gradients.
namespace semrl::nn {

// [m,k] x [k,n] -> [m,n]
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

// x [b,in], w [out,in], bias [out] -> x w^T + bias, [b,out]
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> scale(const Tensor<T>& a, T s);
template <typename T>
Tensor<T> add_scalar(const Tensor<T>& a, T s);
template <typename T>
Tensor<T> relu(const Tensor<T>& a);
template <typename T>
Tensor<T> exp(const Tensor<T>& a);
template <typename T>
Tensor<T> square(const Tensor<T>& a);
// Elementwise clamp; gradient passes only strictly inside (lo, hi).
template <typename T>
Tensor<T> clip(const Tensor<T>& a, T lo, T hi);
// Elementwise min; ties route the gradient to `a`.
template <typename T>
Tensor<T> minimum(const Tensor<T>& a, const Tensor<T>& b);

// Scalar reductions ([1]); accumulate in double.
template <typename T>
Tensor<T> sum(const Tensor<T>& a);
template <typename T>
Tensor<T> mean(const Tensor<T>& a);

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape);
// [b,n_i]... -> [b, sum n_i]
template <typename T>
Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts);
// [b,n] -> [b,len] starting at column `start`
template <typename T>
Tensor<T> slice_cols(const Tensor<T>& a, int start, int len);
// [b,n], idx[b] -> [b]
template <typename T>
Tensor<T> gather_cols(const Tensor<T>& a, const std::vector<int>& idx);
// Row maximum [b,n] -> [b]
template <typename T>
Tensor<T> max_rows(const Tensor<T>& a);
// Row-wise over [b,n].
template <typename T>
Tensor<T> softmax(const Tensor<T>& a);
template <typename T>
Tensor<T> log_softmax(const Tensor<T>& a);

// x [b,c,h,w], w [f,c,kh,kw], bias [f] -> [b,f,oh,ow]
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias, int stride, int pad);

// Valid 1-d convolution over time. x [b,L,d], w [f,k,d], bias [f] -> [b,L-k+1,f].
// `windows[i]`, when given, limits sample i to its first windows[i] outputs;
// later outputs are left at zero and receive no gradient.
template <typename T>
Tensor<T> conv1d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                 const std::vector<int>& windows = {});

// x [b,T,f] -> [b,f], maximum over the first windows[i] time steps (all when empty).
template <typename T>
Tensor<T> max_over_time(const Tensor<T>& x, const std::vector<int>& windows = {});

// table [V,d], ids (b*L) -> [b,L,d]. Rows listed in `frozen_row` (if >= 0)
// receive no gradient.
template <typename T>
Tensor<T> embedding_lookup(const Tensor<T>& table, const std::vector<int>& ids, int batch, int length,
                           int frozen_row = -1);

}  // namespace semrl::nn
