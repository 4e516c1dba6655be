#pragma once

#include <vector>

#include "octorad/genomics/matrix.hpp"

namespace octorad::genomics {

enum class SvmKernel { Rbf, Linear };

struct SvmConfig {
    SvmKernel kernel = SvmKernel::Rbf;
    double C = 10.0;
    double epsilon = 0.1;  // SVR tube width (on standardized targets)
    double gamma = 0.0;    // 0 -> 1/(n_features * var(X))
    double tol = 1e-3;
    long max_iter = 1000000;
};

// Epsilon support-vector regression trained with an SMO-style solver on the
// full kernel matrix. Targets are standardized internally; predictions come
// back in the original units.
class Svr {
public:
    void fit(const Matrix& x, const std::vector<double>& y, const SvmConfig& cfg = {});
    double predict(const std::vector<double>& x) const;
    std::vector<double> predict_all(const Matrix& x) const;

    // w = sum_i coef_i * sv_i; meaningful for the linear kernel (RFE ranking)
    std::vector<double> linear_weights() const;

    const SvmConfig& config() const { return cfg_; }

private:
    SvmConfig cfg_;
    Matrix support_;
    std::vector<double> coef_;  // alpha+ - alpha- per support vector
    double rho_ = 0.0;
    double y_mean_ = 0.0, y_std_ = 1.0;
    double gamma_ = 1.0;
};

// C-SVC; multi-class via one-vs-one voting (ties break to the smaller label).
class Svc {
public:
    void fit(const Matrix& x, const std::vector<int>& labels, const SvmConfig& cfg = {});
    int predict(const std::vector<double>& x) const;
    std::vector<int> predict_all(const Matrix& x) const;

    int n_classes() const { return static_cast<int>(classes_.size()); }

private:
    struct BinaryMachine {
        int pos_class = 0, neg_class = 0;
        Matrix support;
        std::vector<double> coef;  // alpha_i * y_i
        double rho = 0.0;
    };

    double decision(const BinaryMachine& m, const std::vector<double>& x) const;

    SvmConfig cfg_;
    double gamma_ = 1.0;
    std::vector<int> classes_;
    std::vector<BinaryMachine> machines_;
};

double gamma_scale(const Matrix& x);

}  // namespace octorad::genomics
