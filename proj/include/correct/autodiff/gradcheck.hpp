#pragma once

#include <functional>
#include <string>
#include <vector>

#include "correct/autodiff/tape.hpp"

namespace correct::ad {

struct GradCheckResult {
    /// max over coordinates of |analytic - central| / max(1, |central|)
    Real max_rel_error = 0.0;
    std::size_t coordinates = 0;
    bool finite = true;
    /// Location of the worst coordinate, e.g. "input 0 [3]" or "step0.wq [12]".
    std::string worst;

    bool passed(Real tolerance) const { return finite && max_rel_error < tolerance; }
};

/// Scalar function of leaf tensors recorded on a fresh tape.
using TapeFunction = std::function<Var(Tape&, const std::vector<Var>&)>;

/// Compares reverse-mode gradients of f at `point` with central differences.
GradCheckResult grad_check(const TapeFunction& f, const std::vector<Tensor>& point, Real eps = 1e-5);

/// Same check over every coordinate of every parameter in `store`. `loss_fn` must bind
/// parameters through Tape::param so backward() accumulates into the store.
GradCheckResult grad_check_parameters(ParameterStore& store,
                                      const std::function<Var(Tape&)>& loss_fn,
                                      Real eps = 1e-5);

}  // namespace correct::ad
