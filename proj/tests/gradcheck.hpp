#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "hkgc/autodiff.hpp"

namespace gradcheck {

struct Result {
  double max_rel_error = 0.0;
  std::string worst;
  std::size_t checked = 0;
};

/// Central differences against the tape's gradients. `loss` builds a fresh graph on the given
/// tape from the current values in `params`. `stride` > 1 checks every stride-th entry.
inline Result check(hkgc::ParamStore& params, const std::function<hkgc::Var(hkgc::Tape&)>& loss,
                    double eps = 1e-5, std::size_t stride = 1) {
  hkgc::Gradients analytic;
  {
    hkgc::Tape tape;
    analytic = tape.backward(loss(tape), params);
  }
  auto value = [&] {
    hkgc::Tape tape;
    return loss(tape).value()(0, 0);
  };
  Result r;
  std::size_t counter = 0;
  for (const auto& [name, _] : params.tensors()) {
    auto& t = params.get(name);
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      if (counter++ % stride != 0) continue;
      const double keep = t.data()[i];
      t.data()[i] = keep + eps;
      const double up = value();
      t.data()[i] = keep - eps;
      const double down = value();
      t.data()[i] = keep;
      const double numeric = (up - down) / (2 * eps);
      const double a = analytic.at(name).data()[i];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
      ++r.checked;
      if (rel > r.max_rel_error) {
        r.max_rel_error = rel;
        r.worst = name + "[" + std::to_string(i) + "] analytic=" + std::to_string(a) + " numeric=" + std::to_string(numeric);
      }
    }
  }
  return r;
}

}  // namespace gradcheck
