#include "jpave/grad_check.hpp"

#include <cmath>
#include <vector>

namespace jpave::numkit {

GradCheckReport grad_check(ParamRegistry& params, const LossFn& loss, double eps) {
    require(eps > 0.0 && eps <= 1e-3, "grad_check: eps must be in (0, 1e-3]");

    params.zero_grad();
    const double base = loss(params);
    require(std::isfinite(base), "grad_check: loss not finite at the base point");

    // Snapshot analytic gradients before the finite-difference sweeps
    // overwrite them.
    std::vector<Tensor> analytic;
    analytic.reserve(params.size());
    for (const auto& name : params.names()) analytic.push_back(params.at(name).grad);

    auto probe = [&](const std::string& name, std::size_t k, double delta) {
        Parameter& p = params.at(name);
        const double saved = p.value[k];
        p.value[k] = saved + delta;
        params.zero_grad();
        const double v = loss(params);
        p.value[k] = saved;
        if (!std::isfinite(v)) {
            throw ContractError("grad_check: non-finite loss perturbing " + name +
                                "[" + std::to_string(k) + "] by " +
                                std::to_string(delta));
        }
        return v;
    };

    GradCheckReport report;
    std::size_t pi = 0;
    for (const auto& name : params.names()) {
        const std::size_t count = params.at(name).value.size();
        for (std::size_t k = 0; k < count; ++k) {
            const double up = probe(name, k, eps);
            const double down = probe(name, k, -eps);
            const double central = (up - down) / (2.0 * eps);
            const double a = analytic[pi][k];
            const double rel = std::abs(a - central) / std::max(1.0, std::abs(central));
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = name;
                report.worst_index = k;
                report.analytic = a;
                report.numeric = central;
            }
        }
        ++pi;
    }
    return report;
}

}  // namespace jpave::numkit
