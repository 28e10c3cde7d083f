#include "reacritic/autodiff/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "reacritic/autodiff/mac_counter.hpp"
#include "reacritic/errors.hpp"

namespace reacritic::ad {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

ConstMap cmap(const double* p, std::size_t rows, std::size_t cols) {
  return ConstMap(p, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}
Map mmap(double* p, std::size_t rows, std::size_t cols) {
  return Map(p, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

void check_finite(const char* op, std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError(std::string(op) + ": produced a non-finite value");
  }
}

Tensor make_output(const char* op, Shape shape, std::vector<double> values, bool requires_grad) {
  check_finite(op, values);
  return Tensor::from(std::move(shape), std::move(values), requires_grad);
}

bool is_suffix(const Shape& full, const Shape& tail) {
  if (tail.size() > full.size()) return false;
  return std::equal(tail.rbegin(), tail.rend(), full.rbegin());
}

void require_suffix(const char* op, const Tensor& a, const Tensor& b) {
  if (!is_suffix(a.shape(), b.shape())) {
    throw DimensionError(std::string(op) + ": cannot broadcast " + to_string(b.shape()) + " onto " +
                         to_string(a.shape()));
  }
}

void require_same(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
  }
}

// Sums a gradient laid out like the larger operand down onto a suffix-shaped operand.
std::vector<double> reduce_to_suffix(std::span<const double> g, std::size_t inner) {
  std::vector<double> out(inner, 0.0);
  for (std::size_t base = 0; base < g.size(); base += inner) {
    for (std::size_t j = 0; j < inner; ++j) out[j] += g[base + j];
  }
  return out;
}

template <typename Forward, typename Derivative>
Tensor unary(Tape& tape, const Tensor& x, const char* name, Forward f, Derivative df) {
  std::vector<double> out(x.size());
  const auto xs = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(xs[i]);
  Tensor y = make_output(name, x.shape(), std::move(out), x.requires_grad());
  if (y.requires_grad()) {
    tape.record({x}, y, [x, df](const Tensor& o) mutable {
      const auto g = o.grad();
      const auto xs = x.data();
      const auto ys = o.data();
      std::vector<double> dx(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) dx[i] = g[i] * df(xs[i], ys[i]);
      x.accumulate_grad(dx);
    });
  }
  return y;
}

Shape batch_of(const Shape& s) { return Shape(s.begin(), s.end() - 2); }

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.rank() < 2 || b.rank() < 2 || a.dim(-1) != b.dim(-2)) {
    throw DimensionError("matmul: shape mismatch " + to_string(a.shape()) + " x " + to_string(b.shape()));
  }
  const std::size_t m = a.dim(-2);
  const std::size_t k = a.dim(-1);
  const std::size_t n = b.dim(-1);
  const Shape batch_a = batch_of(a.shape());
  const Shape batch_b = batch_of(b.shape());
  if (a.rank() > 2 && b.rank() > 2 && batch_a != batch_b) {
    throw DimensionError("matmul: batch shapes differ " + to_string(a.shape()) + " x " + to_string(b.shape()));
  }
  Shape out_shape = a.rank() >= b.rank() ? batch_a : batch_b;
  out_shape.push_back(m);
  out_shape.push_back(n);
  const std::size_t batches = numel(out_shape) / (m * n);
  const std::size_t a_step = a.rank() == 2 ? 0 : m * k;
  const std::size_t b_step = b.rank() == 2 ? 0 : k * n;

  std::vector<double> out(batches * m * n);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  if (b.rank() == 2) {
    // Shared right operand: one large GEMM over the flattened batch.
    mmap(out.data(), batches * m, n).noalias() = cmap(pa, batches * m, k) * cmap(pb, k, n);
  } else {
    for (std::size_t p = 0; p < batches; ++p) {
      mmap(out.data() + p * m * n, m, n).noalias() = cmap(pa + p * a_step, m, k) * cmap(pb + p * b_step, k, n);
    }
  }
  MacCounter::add(static_cast<std::uint64_t>(batches * m * k * n));

  Tensor c = make_output("matmul", std::move(out_shape), std::move(out), a.requires_grad() || b.requires_grad());
  if (c.requires_grad()) {
    tape.record({a, b}, c, [a, b, m, k, n, batches, a_step, b_step](const Tensor& o) mutable {
      const double* g = o.grad().data();
      if (a.requires_grad()) {
        std::vector<double> da(a.size(), 0.0);
        if (b.rank() == 2) {
          mmap(da.data(), batches * m, k).noalias() = cmap(g, batches * m, n) * cmap(b.data().data(), k, n).transpose();
        } else {
          for (std::size_t p = 0; p < batches; ++p) {
            mmap(da.data() + p * a_step, m, k).noalias() +=
                cmap(g + p * m * n, m, n) * cmap(b.data().data() + p * b_step, k, n).transpose();
          }
        }
        a.accumulate_grad(da);
      }
      if (b.requires_grad()) {
        std::vector<double> db(b.size(), 0.0);
        if (a.rank() == 2 || b.rank() == 2) {
          if (b.rank() == 2) {
            mmap(db.data(), k, n).noalias() = cmap(a.data().data(), batches * m, k).transpose() * cmap(g, batches * m, n);
          } else {
            for (std::size_t p = 0; p < batches; ++p) {
              mmap(db.data() + p * b_step, k, n).noalias() = cmap(a.data().data(), m, k).transpose() * cmap(g + p * m * n, m, n);
            }
          }
        } else {
          for (std::size_t p = 0; p < batches; ++p) {
            mmap(db.data() + p * b_step, k, n).noalias() =
                cmap(a.data().data() + p * a_step, m, k).transpose() * cmap(g + p * m * n, m, n);
          }
        }
        b.accumulate_grad(db);
      }
    });
  }
  return c;
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require_suffix("add", a, b);
  const std::size_t inner = b.size();
  std::vector<double> out(a.data().begin(), a.data().end());
  const auto bs = b.data();
  for (std::size_t base = 0; base < out.size(); base += inner) {
    for (std::size_t j = 0; j < inner; ++j) out[base + j] += bs[j];
  }
  Tensor c = make_output("add", a.shape(), std::move(out), a.requires_grad() || b.requires_grad());
  if (c.requires_grad()) {
    tape.record({a, b}, c, [a, b, inner](const Tensor& o) mutable {
      if (a.requires_grad()) a.accumulate_grad(o.grad());
      if (b.requires_grad()) b.accumulate_grad(reduce_to_suffix(o.grad(), inner));
    });
  }
  return c;
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  require_suffix("sub", a, b);
  const std::size_t inner = b.size();
  std::vector<double> out(a.data().begin(), a.data().end());
  const auto bs = b.data();
  for (std::size_t base = 0; base < out.size(); base += inner) {
    for (std::size_t j = 0; j < inner; ++j) out[base + j] -= bs[j];
  }
  Tensor c = make_output("sub", a.shape(), std::move(out), a.requires_grad() || b.requires_grad());
  if (c.requires_grad()) {
    tape.record({a, b}, c, [a, b, inner](const Tensor& o) mutable {
      if (a.requires_grad()) a.accumulate_grad(o.grad());
      if (b.requires_grad()) {
        auto db = reduce_to_suffix(o.grad(), inner);
        for (double& v : db) v = -v;
        b.accumulate_grad(db);
      }
    });
  }
  return c;
}

Tensor hadamard(Tape& tape, const Tensor& a, const Tensor& b) {
  require_suffix("hadamard", a, b);
  const std::size_t inner = b.size();
  std::vector<double> out(a.size());
  const auto as = a.data();
  const auto bs = b.data();
  for (std::size_t base = 0; base < out.size(); base += inner) {
    for (std::size_t j = 0; j < inner; ++j) out[base + j] = as[base + j] * bs[j];
  }
  Tensor c = make_output("hadamard", a.shape(), std::move(out), a.requires_grad() || b.requires_grad());
  if (c.requires_grad()) {
    tape.record({a, b}, c, [a, b, inner](const Tensor& o) mutable {
      const auto g = o.grad();
      const auto as = a.data();
      const auto bs = b.data();
      if (a.requires_grad()) {
        std::vector<double> da(g.size());
        for (std::size_t base = 0; base < g.size(); base += inner) {
          for (std::size_t j = 0; j < inner; ++j) da[base + j] = g[base + j] * bs[j];
        }
        a.accumulate_grad(da);
      }
      if (b.requires_grad()) {
        std::vector<double> db(inner, 0.0);
        for (std::size_t base = 0; base < g.size(); base += inner) {
          for (std::size_t j = 0; j < inner; ++j) db[j] += g[base + j] * as[base + j];
        }
        b.accumulate_grad(db);
      }
    });
  }
  return c;
}

Tensor minimum(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same("minimum", a, b);
  std::vector<double> out(a.size());
  const auto as = a.data();
  const auto bs = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(as[i], bs[i]);
  Tensor c = make_output("minimum", a.shape(), std::move(out), a.requires_grad() || b.requires_grad());
  if (c.requires_grad()) {
    // Ties route the gradient to `a`.
    tape.record({a, b}, c, [a, b](const Tensor& o) mutable {
      const auto g = o.grad();
      const auto as = a.data();
      const auto bs = b.data();
      std::vector<double> da(g.size(), 0.0);
      std::vector<double> db(g.size(), 0.0);
      for (std::size_t i = 0; i < g.size(); ++i) (as[i] <= bs[i] ? da : db)[i] = g[i];
      if (a.requires_grad()) a.accumulate_grad(da);
      if (b.requires_grad()) b.accumulate_grad(db);
    });
  }
  return c;
}

Tensor mul_scalar(Tape& tape, const Tensor& x, double s) {
  return unary(tape, x, "mul_scalar", [s](double v) { return v * s; }, [s](double, double) { return s; });
}

Tensor add_scalar(Tape& tape, const Tensor& x, double s) {
  return unary(tape, x, "add_scalar", [s](double v) { return v + s; }, [](double, double) { return 1.0; });
}

Tensor relu(Tape& tape, const Tensor& x) {
  return unary(
      tape, x, "relu", [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor gelu(Tape& tape, const Tensor& x) {
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  constexpr double kInvSqrt2Pi = 0.39894228040143267794;
  return unary(
      tape, x, "gelu", [](double v) { return 0.5 * v * (1.0 + std::erf(v * kInvSqrt2)); },
      [](double v, double) { return 0.5 * (1.0 + std::erf(v * kInvSqrt2)) + v * kInvSqrt2Pi * std::exp(-0.5 * v * v); });
}

Tensor tanh(Tape& tape, const Tensor& x) {
  return unary(
      tape, x, "tanh", [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor exp(Tape& tape, const Tensor& x) {
  return unary(
      tape, x, "exp", [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log(Tape& tape, const Tensor& x) {
  return unary(
      tape, x, "log", [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor square(Tape& tape, const Tensor& x) {
  return unary(
      tape, x, "square", [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Tensor sum(Tape& tape, const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  Tensor y = make_output("sum", {}, {total}, x.requires_grad());
  if (y.requires_grad()) {
    tape.record({x}, y, [x](const Tensor& o) mutable { x.accumulate_grad(std::vector<double>(x.size(), o.grad()[0])); });
  }
  return y;
}

Tensor mean(Tape& tape, const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  const double n = static_cast<double>(x.size());
  Tensor y = make_output("mean", {}, {total / n}, x.requires_grad());
  if (y.requires_grad()) {
    tape.record({x}, y, [x, n](const Tensor& o) mutable {
      x.accumulate_grad(std::vector<double>(x.size(), o.grad()[0] / n));
    });
  }
  return y;
}

Tensor sum_last(Tape& tape, const Tensor& x) {
  if (x.rank() == 0) throw DimensionError("sum_last: scalar input");
  const std::size_t n = x.dim(-1);
  const std::size_t rows = x.size() / n;
  std::vector<double> out(rows, 0.0);
  const auto xs = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < n; ++j) out[r] += xs[r * n + j];
  }
  Shape shape(x.shape().begin(), x.shape().end() - 1);
  Tensor y = make_output("sum_last", std::move(shape), std::move(out), x.requires_grad());
  if (y.requires_grad()) {
    tape.record({x}, y, [x, n](const Tensor& o) mutable {
      const auto g = o.grad();
      std::vector<double> dx(x.size());
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = g[i / n];
      x.accumulate_grad(dx);
    });
  }
  return y;
}

Tensor layer_norm(Tape& tape, const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  if (x.rank() == 0 || x.dim(-1) == 0) throw DimensionError("layer_norm: empty normalization axis");
  if (!(eps > 0.0)) throw DomainError("layer_norm: eps must be positive");
  const std::size_t d = x.dim(-1);
  if (gain.shape() != Shape{d} || bias.shape() != Shape{d}) {
    throw DimensionError("layer_norm: gain/bias " + to_string(gain.shape()) + "/" + to_string(bias.shape()) +
                         " do not match last axis of " + to_string(x.shape()));
  }
  const std::size_t rows = x.size() / d;
  const auto xs = x.data();
  const auto gs = gain.data();
  const auto bs = bias.data();
  std::vector<double> xhat(x.size());
  std::vector<double> inv_std(rows);
  std::vector<double> out(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xs.data() + r * d;
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[r] = is;
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (row[j] - mu) * is;
      xhat[r * d + j] = h;
      out[r * d + j] = gs[j] * h + bs[j];
    }
  }
  const bool rg = x.requires_grad() || gain.requires_grad() || bias.requires_grad();
  Tensor y = make_output("layer_norm", x.shape(), std::move(out), rg);
  if (rg) {
    tape.record({x, gain, bias}, y,
                [x, gain, bias, d, rows, xhat = std::move(xhat), inv_std = std::move(inv_std)](const Tensor& o) mutable {
                  const auto g = o.grad();
                  const auto gs = gain.data();
                  if (gain.requires_grad() || bias.requires_grad()) {
                    std::vector<double> dgain(d, 0.0);
                    std::vector<double> dbias(d, 0.0);
                    for (std::size_t i = 0; i < g.size(); ++i) {
                      dgain[i % d] += g[i] * xhat[i];
                      dbias[i % d] += g[i];
                    }
                    if (gain.requires_grad()) gain.accumulate_grad(dgain);
                    if (bias.requires_grad()) bias.accumulate_grad(dbias);
                  }
                  if (x.requires_grad()) {
                    std::vector<double> dx(x.size());
                    const double inv_d = 1.0 / static_cast<double>(d);
                    for (std::size_t r = 0; r < rows; ++r) {
                      double mean_g = 0.0;
                      double mean_gx = 0.0;
                      for (std::size_t j = 0; j < d; ++j) {
                        const double gh = g[r * d + j] * gs[j];
                        mean_g += gh;
                        mean_gx += gh * xhat[r * d + j];
                      }
                      mean_g *= inv_d;
                      mean_gx *= inv_d;
                      for (std::size_t j = 0; j < d; ++j) {
                        const double gh = g[r * d + j] * gs[j];
                        dx[r * d + j] = inv_std[r] * (gh - mean_g - xhat[r * d + j] * mean_gx);
                      }
                    }
                    x.accumulate_grad(dx);
                  }
                });
  }
  return y;
}

Tensor softmax(Tape& tape, const Tensor& x, int axis) {
  const std::size_t n = x.dim(axis);
  const auto r = static_cast<int>(x.rank());
  const auto a = static_cast<std::size_t>(axis < 0 ? axis + r : axis);
  std::size_t inner = 1;
  for (std::size_t i = a + 1; i < x.rank(); ++i) inner *= x.shape()[i];
  const std::size_t outer = x.size() / (n * inner);
  const auto xs = x.data();
  std::vector<double> out(x.size());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * n * inner + in;
      double mx = xs[base];
      for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, xs[base + j * inner]);
      double z = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double e = std::exp(xs[base + j * inner] - mx);
        out[base + j * inner] = e;
        z += e;
      }
      for (std::size_t j = 0; j < n; ++j) out[base + j * inner] /= z;
    }
  }
  Tensor y = make_output("softmax", x.shape(), std::move(out), x.requires_grad());
  if (y.requires_grad()) {
    tape.record({x}, y, [x, n, inner, outer](const Tensor& o) mutable {
      const auto g = o.grad();
      const auto ys = o.data();
      std::vector<double> dx(x.size());
      for (std::size_t p = 0; p < outer; ++p) {
        for (std::size_t in = 0; in < inner; ++in) {
          const std::size_t base = p * n * inner + in;
          double dot = 0.0;
          for (std::size_t j = 0; j < n; ++j) dot += g[base + j * inner] * ys[base + j * inner];
          for (std::size_t j = 0; j < n; ++j) {
            const std::size_t i = base + j * inner;
            dx[i] = ys[i] * (g[i] - dot);
          }
        }
      }
      x.accumulate_grad(dx);
    });
  }
  return y;
}

Tensor concat_last(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.rank() == 0 || a.rank() != b.rank() ||
      !std::equal(a.shape().begin(), a.shape().end() - 1, b.shape().begin())) {
    throw DimensionError("concat_last: incompatible shapes " + to_string(a.shape()) + " and " + to_string(b.shape()));
  }
  const std::size_t na = a.dim(-1);
  const std::size_t nb = b.dim(-1);
  const std::size_t rows = a.size() / na;
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  const auto as = a.data();
  const auto bs = b.data();
  for (std::size_t r = 0; r < rows; ++r) {
    out.insert(out.end(), as.begin() + r * na, as.begin() + (r + 1) * na);
    out.insert(out.end(), bs.begin() + r * nb, bs.begin() + (r + 1) * nb);
  }
  Shape shape = a.shape();
  shape.back() = na + nb;
  Tensor y = make_output("concat_last", std::move(shape), std::move(out), a.requires_grad() || b.requires_grad());
  if (y.requires_grad()) {
    tape.record({a, b}, y, [a, b, na, nb, rows](const Tensor& o) mutable {
      const auto g = o.grad();
      std::vector<double> da(a.size());
      std::vector<double> db(b.size());
      for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(g.begin() + r * (na + nb), na, da.begin() + r * na);
        std::copy_n(g.begin() + r * (na + nb) + na, nb, db.begin() + r * nb);
      }
      if (a.requires_grad()) a.accumulate_grad(da);
      if (b.requires_grad()) b.accumulate_grad(db);
    });
  }
  return y;
}

Tensor reshape(Tape& tape, const Tensor& x, Shape shape) {
  if (numel(shape) != x.size()) {
    throw DimensionError("reshape: cannot view " + to_string(x.shape()) + " as " + to_string(shape));
  }
  Tensor y = Tensor::from(std::move(shape), std::vector<double>(x.data().begin(), x.data().end()), x.requires_grad());
  if (y.requires_grad()) {
    tape.record({x}, y, [x](const Tensor& o) mutable { x.accumulate_grad(o.grad()); });
  }
  return y;
}

Tensor permute(Tape& tape, const Tensor& x, const std::vector<std::size_t>& order) {
  const std::size_t r = x.rank();
  std::vector<bool> seen(r, false);
  if (order.size() != r) throw DimensionError("permute: order rank does not match " + to_string(x.shape()));
  for (std::size_t o : order) {
    if (o >= r || seen[o]) throw DimensionError("permute: invalid axis order for " + to_string(x.shape()));
    seen[o] = true;
  }
  const Shape& in_shape = x.shape();
  std::vector<std::size_t> in_strides(r, 1);
  for (std::size_t i = r; i-- > 1;) in_strides[i - 1] = in_strides[i] * in_shape[i];
  Shape out_shape(r);
  for (std::size_t i = 0; i < r; ++i) out_shape[i] = in_shape[order[i]];

  // Walk the output in order while tracking the matching input offset; the
  // same walk scatters gradients back in the backward pass.
  std::vector<std::size_t> step(r);
  for (std::size_t i = 0; i < r; ++i) step[i] = in_strides[order[i]];
  auto walk = [out_shape, step, r](std::size_t count, auto&& visit) {
    std::vector<std::size_t> idx(r, 0);
    std::size_t src = 0;
    const std::size_t last = r - 1;
    const std::size_t inner = out_shape[last];
    const std::size_t inner_step = step[last];
    for (std::size_t flat = 0; flat < count; flat += inner) {
      for (std::size_t j = 0; j < inner; ++j) visit(flat + j, src + j * inner_step);
      for (std::size_t i = last; i-- > 0;) {
        src += step[i];
        if (++idx[i] < out_shape[i]) break;
        src -= step[i] * out_shape[i];
        idx[i] = 0;
      }
    }
  };
  const auto xs = x.data();
  std::vector<double> out(x.size());
  if (r == 0) {
    out = {xs[0]};
  } else {
    walk(out.size(), [&](std::size_t dst, std::size_t src) { out[dst] = xs[src]; });
  }
  Tensor y = Tensor::from(out_shape, std::move(out), x.requires_grad());
  if (y.requires_grad()) {
    tape.record({x}, y, [x, walk, r](const Tensor& o) mutable {
      const auto g = o.grad();
      std::vector<double> dx(x.size());
      if (r == 0) {
        dx[0] = g[0];
      } else {
        walk(g.size(), [&](std::size_t dst, std::size_t src) { dx[src] = g[dst]; });
      }
      x.accumulate_grad(dx);
    });
  }
  return y;
}

Tensor repeat_tokens(Tape& tape, const Tensor& x, std::size_t copies) {
  if (x.rank() != 2) throw DimensionError("repeat_tokens: expected [B, d], got " + to_string(x.shape()));
  if (copies == 0) throw DimensionError("repeat_tokens: zero copies");
  const std::size_t batch = x.dim(0);
  const std::size_t d = x.dim(1);
  const auto xs = x.data();
  std::vector<double> out(batch * copies * d);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < copies; ++c) {
      std::copy_n(xs.begin() + b * d, d, out.begin() + (b * copies + c) * d);
    }
  }
  Tensor y = Tensor::from({batch, copies, d}, std::move(out), x.requires_grad());
  if (y.requires_grad()) {
    tape.record({x}, y, [x, batch, copies, d](const Tensor& o) mutable {
      const auto g = o.grad();
      std::vector<double> dx(x.size(), 0.0);
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t c = 0; c < copies; ++c) {
          for (std::size_t j = 0; j < d; ++j) dx[b * d + j] += g[(b * copies + c) * d + j];
        }
      }
      x.accumulate_grad(dx);
    });
  }
  return y;
}

}  // namespace reacritic::ad
