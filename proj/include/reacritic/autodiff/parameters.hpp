#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "reacritic/autodiff/tensor.hpp"

namespace reacritic::ad {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

/// Ordered, named collection of trainable tensors belonging to one network.
///
/// The tensors are shared handles, so a network keeps typed handles to the
/// same storage for its forward pass while optimizers, Polyak averaging and
/// checkpoints work through this uniform view.
class ParameterSet {
 public:
  /// Registers `tensor` (marked as requiring a gradient) and returns its handle.
  Tensor add(std::string name, Tensor tensor);

  const std::vector<NamedTensor>& entries() const { return entries_; }
  std::vector<Tensor> tensors() const;
  const Tensor& get(const std::string& name) const;

  /// Total scalar count.
  std::size_t scalar_count() const;

  void set_requires_grad(bool flag);
  void clear_grad();

  /// Copies every value from `source`; names and shapes must match exactly.
  void copy_values_from(const ParameterSet& source);
  /// Throws ContractError unless `other` has the same names and shapes in order.
  void require_same_layout(const ParameterSet& other) const;

 private:
  std::vector<NamedTensor> entries_;
};

/// Checkpoint layout (text, line oriented):
///
///     reacritic-params 1
///     <entry count>
///     <name> <rank> <dim_0> ... <dim_rank-1>
///     <values, row-major, %.17g, space separated>
///     ... one header line and one value line per entry
///
/// 17 significant digits make the round trip exact for doubles.
void save_parameters(std::ostream& out, const ParameterSet& params);
/// Loads values into `params`, which must already have the stored layout.
void load_parameters(std::istream& in, ParameterSet& params);

}  // namespace reacritic::ad
