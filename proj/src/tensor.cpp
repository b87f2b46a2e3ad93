#include "jpave/tensor.hpp"

#include <cmath>

namespace jpave::numkit {

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& rows) {
    require(!rows.empty(), "from_rows: no rows");
    const std::size_t cols = rows.front().size();
    Tensor t({rows.size(), cols});
    for (std::size_t r = 0; r < rows.size(); ++r) {
        require(rows[r].size() == cols, "from_rows: ragged rows");
        for (std::size_t c = 0; c < cols; ++c) t.at(r, c) = rows[r][c];
    }
    return t;
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void Tensor::fill_uniform(Rng& rng, double range) {
    for (double& v : data_) v = rng.uniform(-range, range);
}

Parameter& ParamRegistry::add(const std::string& name, Tensor init) {
    require(!contains(name), "duplicate parameter name: " + name);
    index_[name] = order_.size();
    order_.push_back(name);
    auto [it, inserted] = params_.emplace(name, Parameter(name, std::move(init)));
    (void)inserted;
    return it->second;
}

Parameter& ParamRegistry::at(const std::string& name) {
    auto it = params_.find(name);
    require(it != params_.end(), "unknown parameter: " + name);
    return it->second;
}

const Parameter& ParamRegistry::at(const std::string& name) const {
    auto it = params_.find(name);
    require(it != params_.end(), "unknown parameter: " + name);
    return it->second;
}

void ParamRegistry::zero_grad() {
    for (const auto& name : order_) {
        auto& g = params_.at(name).grad.data();
        std::fill(g.begin(), g.end(), 0.0);
    }
}

std::size_t ParamRegistry::scalar_count() const {
    std::size_t n = 0;
    for (const auto& name : order_) n += params_.at(name).value.size();
    return n;
}

}  // namespace jpave::numkit
