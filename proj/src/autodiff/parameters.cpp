#include "reacritic/autodiff/parameters.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "reacritic/errors.hpp"

namespace reacritic::ad {
namespace {

constexpr const char* kMagic = "reacritic-params";
constexpr int kVersion = 1;

}  // namespace

Tensor ParameterSet::add(std::string name, Tensor tensor) {
  for (const auto& e : entries_) {
    if (e.name == name) throw ContractError("duplicate parameter name '" + name + "'");
  }
  tensor.set_requires_grad(true);
  entries_.push_back({std::move(name), tensor});
  return tensor;
}

std::vector<Tensor> ParameterSet::tensors() const {
  std::vector<Tensor> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.tensor);
  return out;
}

const Tensor& ParameterSet::get(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.tensor;
  }
  throw ContractError("no parameter named '" + name + "'");
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.size();
  return n;
}

void ParameterSet::set_requires_grad(bool flag) {
  for (auto& e : entries_) e.tensor.set_requires_grad(flag);
}

void ParameterSet::clear_grad() {
  for (auto& e : entries_) e.tensor.clear_grad();
}

void ParameterSet::require_same_layout(const ParameterSet& other) const {
  if (entries_.size() != other.entries_.size()) {
    throw ContractError("parameter sets differ in size: " + std::to_string(entries_.size()) + " vs " +
                        std::to_string(other.entries_.size()));
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = other.entries_[i];
    if (a.name != b.name || a.tensor.shape() != b.tensor.shape()) {
      throw ContractError("parameter layout mismatch at '" + a.name + "' " + to_string(a.tensor.shape()) + " vs '" +
                          b.name + "' " + to_string(b.tensor.shape()));
    }
  }
}

void ParameterSet::copy_values_from(const ParameterSet& source) {
  require_same_layout(source);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto src = source.entries_[i].tensor.data();
    auto dst = entries_[i].tensor.mutable_data();
    std::copy(src.begin(), src.end(), dst.begin());
  }
}

void save_parameters(std::ostream& out, const ParameterSet& params) {
  out << kMagic << ' ' << kVersion << '\n' << params.entries().size() << '\n';
  char buf[32];
  for (const auto& e : params.entries()) {
    out << e.name << ' ' << e.tensor.rank();
    for (std::size_t d : e.tensor.shape()) out << ' ' << d;
    out << '\n';
    bool first = true;
    for (double v : e.tensor.data()) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      if (!first) out << ' ';
      out << buf;
      first = false;
    }
    out << '\n';
  }
}

void load_parameters(std::istream& in, ParameterSet& params) {
  std::string magic;
  int version = 0;
  std::size_t count = 0;
  if (!(in >> magic >> version) || magic != kMagic) throw ConfigError("checkpoint: missing header");
  if (version != kVersion) throw ConfigError("checkpoint: unsupported version " + std::to_string(version));
  if (!(in >> count) || count != params.entries().size()) {
    throw ContractError("checkpoint: entry count does not match the network");
  }
  for (const auto& e : params.entries()) {
    std::string name;
    std::size_t rank = 0;
    if (!(in >> name >> rank)) throw ConfigError("checkpoint: truncated entry header");
    Shape shape(rank);
    for (auto& d : shape) in >> d;
    if (name != e.name || shape != e.tensor.shape()) {
      throw ContractError("checkpoint: expected '" + e.name + "' " + to_string(e.tensor.shape()) + ", found '" + name +
                          "' " + to_string(shape));
    }
    Tensor t = e.tensor;
    for (double& v : t.mutable_data()) {
      std::string token;
      if (!(in >> token)) throw ConfigError("checkpoint: truncated values for '" + name + "'");
      v = std::strtod(token.c_str(), nullptr);
    }
  }
}

}  // namespace reacritic::ad
