#include "correct/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace correct::ad {

namespace {

void record(GradCheckResult& result, Real analytic, Real central, const std::string& where) {
    ++result.coordinates;
    if (!std::isfinite(analytic) || !std::isfinite(central)) {
        result.finite = false;
        result.worst = where + " (non-finite)";
        return;
    }
    const Real err = std::abs(analytic - central) / std::max<Real>(1.0, std::abs(central));
    if (err > result.max_rel_error) {
        result.max_rel_error = err;
        if (result.finite) result.worst = where;
    }
}

}  // namespace

GradCheckResult grad_check(const TapeFunction& f, const std::vector<Tensor>& point, Real eps) {
    auto evaluate = [&](const std::vector<Tensor>& at) {
        Tape tape;
        std::vector<Var> leaves;
        for (const auto& t : at) leaves.push_back(tape.leaf(t));
        return f(tape, leaves).value().item();
    };

    std::vector<Tensor> analytic;
    {
        Tape tape;
        std::vector<Var> leaves;
        for (const auto& t : point) leaves.push_back(tape.leaf(t));
        Var out = f(tape, leaves);
        tape.backward(out);
        for (const auto& v : leaves) analytic.push_back(v.grad());
    }

    GradCheckResult result;
    std::vector<Tensor> probe = point;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        for (std::size_t k = 0; k < probe[i].size(); ++k) {
            const Real orig = probe[i][k];
            probe[i][k] = orig + eps;
            const Real up = evaluate(probe);
            probe[i][k] = orig - eps;
            const Real down = evaluate(probe);
            probe[i][k] = orig;
            const Real central = (up - down) / (2.0 * eps);
            const Real a = analytic[i].empty() ? 0.0 : analytic[i][k];
            record(result, a, central, "input " + std::to_string(i) + " [" + std::to_string(k) + "]");
        }
    }
    return result;
}

GradCheckResult grad_check_parameters(ParameterStore& store,
                                      const std::function<Var(Tape&)>& loss_fn, Real eps) {
    store.zero_grad();
    {
        Tape tape;
        Var loss = loss_fn(tape);
        tape.backward(loss);
    }
    auto evaluate = [&] {
        Tape tape;
        return loss_fn(tape).value().item();
    };

    GradCheckResult result;
    for (auto& [name, p] : store) {
        for (std::size_t k = 0; k < p.value.size(); ++k) {
            const Real orig = p.value[k];
            p.value[k] = orig + eps;
            const Real up = evaluate();
            p.value[k] = orig - eps;
            const Real down = evaluate();
            p.value[k] = orig;
            const Real central = (up - down) / (2.0 * eps);
            record(result, p.grad[k], central, name + " [" + std::to_string(k) + "]");
        }
    }
    return result;
}

}  // namespace correct::ad
