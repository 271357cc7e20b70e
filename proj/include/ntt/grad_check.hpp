#pragma once

#include "ntt/param_store.hpp"
#include "ntt/tensor.hpp"

#include <functional>
#include <string>
#include <vector>

namespace ntt {

struct GradCheckEntry {
  std::string param;
  int index = 0;
  real analytic = 0;
  real numeric = 0;
  real rel_err = 0;
};

struct GradCheckReport {
  bool ok = false;
  real max_rel_err = 0;
  GradCheckEntry worst;
  int checked = 0;
};

// Compares reverse-mode gradients of a scalar loss against central finite
// differences for every element of every parameter in the store. The loss
// function must be deterministic in the parameter values (run it in eval
// mode or with a fixed rng). Relative error uses a small absolute floor so
// near-zero gradient pairs do not blow up the ratio.
GradCheckReport finite_diff_check(const std::function<Tensor()>& loss_fn, ParamStore& params,
                                  real epsilon = real(1e-5), real tolerance = real(1e-4));

}  // namespace ntt
