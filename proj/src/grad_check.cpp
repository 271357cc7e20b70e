#include "ntt/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace ntt {

GradCheckReport finite_diff_check(const std::function<Tensor()>& loss_fn, ParamStore& params,
                                  real epsilon, real tolerance) {
  GradCheckReport report;

  Tensor loss = loss_fn();
  GradSink sink = backward(loss);

  for (const auto& name : params.names()) {
    Tensor p = params.at(name);
    auto it = sink.find(p.node());
    const std::vector<real>* analytic = it == sink.end() ? nullptr : &it->second;
    auto& vals = p.values();
    for (std::size_t i = 0; i < vals.size(); ++i) {
      real saved = vals[i];
      vals[i] = saved + epsilon;
      real up = loss_fn().item();
      vals[i] = saved - epsilon;
      real down = loss_fn().item();
      vals[i] = saved;

      real num = (up - down) / (2 * epsilon);
      real ana = analytic ? (*analytic)[i] : real(0);
      real denom = std::max({std::abs(ana), std::abs(num), real(1e-4)});
      real rel = std::abs(ana - num) / denom;

      ++report.checked;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst = {name, static_cast<int>(i), ana, num, rel};
      }
    }
  }
  report.ok = report.max_rel_err < tolerance;
  return report;
}

}  // namespace ntt
