#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace octorad {

// Dense row-major tensor of doubles. NN code uses the 4-D {N,C,H,W} layout;
// other modules use whatever rank they need.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
        std::int64_t n = 1;
        for (int d : shape_) {
            if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
            n *= d;
        }
        data_.assign(static_cast<std::size_t>(n), 0.0);
    }

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<int> shape, double v) {
        Tensor t(std::move(shape));
        t.fill(v);
        return t;
    }

    const std::vector<int>& shape() const { return shape_; }
    int dim(int i) const { return shape_.at(static_cast<std::size_t>(i)); }
    int ndim() const { return static_cast<int>(shape_.size()); }
    std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
    double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

    // {N,C,H,W} accessor
    double& at(int n, int c, int h, int w) {
        return data_[idx4(n, c, h, w)];
    }
    double at(int n, int c, int h, int w) const {
        return data_[idx4(n, c, h, w)];
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    std::string shape_str() const {
        std::string s = "[";
        for (std::size_t i = 0; i < shape_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape_[i]);
        }
        return s + "]";
    }

private:
    std::size_t idx4(int n, int c, int h, int w) const {
        return static_cast<std::size_t>(((static_cast<std::int64_t>(n) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w);
    }

    std::vector<int> shape_;
    std::vector<double> data_;
};

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* where) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(where) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

}  // namespace octorad
