#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "jpave/errors.hpp"
#include "jpave/rng.hpp"

namespace jpave::numkit {

// Dense row-major tensor of doubles. Rank 0 (scalar), 1 (vector) and
// 2 (matrix) cover everything the model needs.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0)
        : shape_(std::move(shape)), data_(count(shape_), fill) {}

    static Tensor scalar(double v) {
        Tensor t({1});
        t.data_[0] = v;
        return t;
    }

    static Tensor from_vector(std::vector<double> values) {
        Tensor t;
        t.shape_ = {values.size()};
        t.data_ = std::move(values);
        return t;
    }

    static Tensor from_rows(const std::vector<std::vector<double>>& rows);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(std::size_t row, std::size_t col) {
        return data_[row * shape_[1] + col];
    }
    double at(std::size_t row, std::size_t col) const {
        return data_[row * shape_[1] + col];
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;

    // Fills with uniform values in [-range, range].
    void fill_uniform(Rng& rng, double range);

    bool operator==(const Tensor& other) const {
        return shape_ == other.shape_ && data_ == other.data_;
    }

private:
    static std::size_t count(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return shape.empty() ? 0 : n;
    }

    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

// One trainable tensor with its gradient accumulator.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
    bool frozen = false;

    Parameter() = default;
    Parameter(std::string n, Tensor v)
        : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}
};

// Named collection of all trainable tensors of one model. Iteration order is
// insertion order so that optimizer sweeps and serialization stay
// deterministic.
class ParamRegistry {
public:
    Parameter& add(const std::string& name, Tensor init);

    Parameter& at(const std::string& name);
    const Parameter& at(const std::string& name) const;
    bool contains(const std::string& name) const { return index_.count(name) > 0; }

    const std::vector<std::string>& names() const { return order_; }
    std::size_t size() const { return order_.size(); }

    void zero_grad();

    // Total number of scalar components across all parameters.
    std::size_t scalar_count() const;

private:
    std::vector<std::string> order_;
    std::map<std::string, Parameter> params_;
    std::map<std::string, std::size_t> index_;
};

}  // namespace jpave::numkit
