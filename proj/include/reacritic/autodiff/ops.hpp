#pragma once

#include <cstddef>
#include <vector>

#include "reacritic/autodiff/tape.hpp"
#include "reacritic/autodiff/tensor.hpp"

// Differentiable tensor operations. Each takes the tape it records onto as the
// first argument; nothing is recorded when no input requires a gradient.
//
// Binary elementwise ops accept a second operand whose shape equals the first
// or is a trailing suffix of it (bias vectors, positional tables). That is the
// only broadcasting supported.
//
// Every op verifies its output is finite and throws NumericError otherwise.
namespace reacritic::ad {

inline constexpr double kLayerNormEps = 1e-5;

// a[..., m, k] x b[..., k, n]. Either side may be rank 2 and is then shared
// across the other side's batch; otherwise batch shapes must match.
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);

Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor hadamard(Tape& tape, const Tensor& a, const Tensor& b);
Tensor minimum(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul_scalar(Tape& tape, const Tensor& x, double s);
Tensor add_scalar(Tape& tape, const Tensor& x, double s);

Tensor relu(Tape& tape, const Tensor& x);
// Exact (erf) form.
Tensor gelu(Tape& tape, const Tensor& x);
Tensor tanh(Tape& tape, const Tensor& x);
Tensor exp(Tape& tape, const Tensor& x);
Tensor log(Tape& tape, const Tensor& x);
Tensor square(Tape& tape, const Tensor& x);

// Reductions over every element; result is a scalar.
Tensor sum(Tape& tape, const Tensor& x);
Tensor mean(Tape& tape, const Tensor& x);
// Sum over the last axis: [..., n] -> [...]. A rank-1 input gives a scalar.
Tensor sum_last(Tape& tape, const Tensor& x);

Tensor layer_norm(Tape& tape, const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = kLayerNormEps);
Tensor softmax(Tape& tape, const Tensor& x, int axis = -1);

Tensor concat_last(Tape& tape, const Tensor& a, const Tensor& b);
Tensor reshape(Tape& tape, const Tensor& x, Shape shape);
Tensor permute(Tape& tape, const Tensor& x, const std::vector<std::size_t>& order);
// [B, d] -> [B, copies, d]
Tensor repeat_tokens(Tape& tape, const Tensor& x, std::size_t copies);

}  // namespace reacritic::ad
