#include "ntt/param_store.hpp"

#include <stdexcept>

namespace ntt {

Tensor ParamStore::get_or_create(const std::string& name, const std::vector<int>& shape,
                                 const std::function<void(std::vector<real>&, Rng&)>& init,
                                 Rng& rng) {
  auto it = by_name_.find(name);
  if (it != by_name_.end()) {
    if (it->second.shape() != shape)
      throw std::runtime_error("parameter " + name + " has shape " +
                               shape_str(it->second.shape()) + ", model expects " +
                               shape_str(shape));
    return it->second;
  }
  Tensor t = Tensor::zeros(shape, true);
  init(t.values(), rng);
  by_name_.emplace(name, t);
  order_.push_back(name);
  return t;
}

void ParamStore::put(const std::string& name, Tensor t) {
  if (by_name_.count(name)) throw std::runtime_error("duplicate parameter " + name);
  by_name_.emplace(name, std::move(t));
  order_.push_back(name);
}

bool ParamStore::contains(const std::string& name) const { return by_name_.count(name) > 0; }

Tensor ParamStore::at(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw std::runtime_error("unknown parameter " + name);
  return it->second;
}

std::size_t ParamStore::total_elements() const {
  std::size_t n = 0;
  for (const auto& [name, t] : by_name_) n += t.values().size();
  return n;
}

std::function<void(std::vector<real>&, Rng&)> init_uniform(real lo, real hi) {
  return [lo, hi](std::vector<real>& v, Rng& rng) {
    for (auto& x : v) x = static_cast<real>(rng.uniform(static_cast<double>(lo), static_cast<double>(hi)));
  };
}

std::function<void(std::vector<real>&, Rng&)> init_zeros() {
  return [](std::vector<real>& v, Rng&) {
    for (auto& x : v) x = 0;
  };
}

std::function<void(std::vector<real>&, Rng&)> init_zeros_with_band(int start, int len, real val) {
  return [start, len, val](std::vector<real>& v, Rng&) {
    for (auto& x : v) x = 0;
    for (int i = start; i < start + len; ++i) v[static_cast<std::size_t>(i)] = val;
  };
}

}  // namespace ntt
