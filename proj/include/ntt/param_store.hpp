#pragma once

#include "ntt/rng.hpp"
#include "ntt/tensor.hpp"

#include <map>
#include <string>
#include <vector>

namespace ntt {

// Named trainable tensors with stable insertion order. Models either register
// fresh parameters into an empty store or bind to ones restored from disk, in
// which case shapes are validated against what the model expects.
class ParamStore {
 public:
  // Returns the existing tensor under `name` (validating shape) or creates it
  // via `init` if absent. All created tensors have requires_grad set.
  Tensor get_or_create(const std::string& name, const std::vector<int>& shape,
                       const std::function<void(std::vector<real>&, Rng&)>& init, Rng& rng);

  // Inserts a pre-built tensor (used by checkpoint loading). Errors on duplicates.
  void put(const std::string& name, Tensor t);

  bool contains(const std::string& name) const;
  Tensor at(const std::string& name) const;

  const std::vector<std::string>& names() const { return order_; }
  std::size_t size() const { return order_.size(); }
  std::size_t total_elements() const;

 private:
  std::map<std::string, Tensor> by_name_;
  std::vector<std::string> order_;
};

// Common initializers.
std::function<void(std::vector<real>&, Rng&)> init_uniform(real lo, real hi);
std::function<void(std::vector<real>&, Rng&)> init_zeros();
// Zero except a constant block (used for forget-gate bias).
std::function<void(std::vector<real>&, Rng&)> init_zeros_with_band(int start, int len, real v);

}  // namespace ntt
