#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace reacritic::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

/// Dense row-major tensor of doubles.
///
/// A Tensor is a shared handle: copying it aliases the same storage, the way
/// autograd frameworks treat their tensors. Use clone() for an independent
/// deep copy (target networks, checkpoints).
///
/// The gradient buffer is absent until a backward pass (or zero_grad()) first
/// touches it.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }

  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  /// Size of axis `axis`; negative values count from the back.
  std::size_t dim(int axis) const;
  std::size_t size() const;

  std::span<const double> data() const;
  /// Mutable access to values. Intended for leaves (parameters, inputs).
  std::span<double> mutable_data();
  double item() const;
  double at(std::size_t flat_index) const { return data()[flat_index]; }

  bool requires_grad() const;
  void set_requires_grad(bool flag);

  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  /// Allocates the gradient if absent and fills it with zeros.
  void zero_grad();
  void clear_grad();
  /// Adds `g` into the gradient, allocating it on first use.
  /// Const because the handle is shared: accumulation mutates the tensor the
  /// handle refers to, not the handle itself.
  void accumulate_grad(std::span<const double> g) const;

  /// Deep copy; the copy keeps requires_grad but has no gradient.
  Tensor clone() const;
  /// Copy of the values that does not require a gradient.
  Tensor detach() const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  struct Impl {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;
    bool requires_grad = false;
  };

  explicit Tensor(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
  const Impl& impl() const;
  Impl& impl();

  std::shared_ptr<Impl> impl_;
};

}  // namespace reacritic::ad
