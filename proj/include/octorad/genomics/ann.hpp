#pragma once

#include <cstdint>
#include <vector>

#include "octorad/genomics/matrix.hpp"

namespace octorad::genomics {

// Single hidden layer (6 ReLU nodes by default), full-batch gradient descent
// with early stopping on a held-out validation split.
struct AnnConfig {
    int hidden = 6;
    double lr = 0.02;
    int max_epochs = 4000;
    int patience = 200;
    double val_fraction = 0.2;
    std::uint64_t seed = 1;
};

class AnnRegressor {
public:
    void fit(const Matrix& x, const std::vector<double>& y, const AnnConfig& cfg = {});
    double predict(const std::vector<double>& x) const;
    std::vector<double> predict_all(const Matrix& x) const;

private:
    AnnConfig cfg_;
    Matrix w1_;               // hidden x in
    std::vector<double> b1_;  // hidden
    std::vector<double> w2_;  // hidden
    double b2_ = 0.0;
    double y_mean_ = 0.0, y_std_ = 1.0;
};

class AnnClassifier {
public:
    void fit(const Matrix& x, const std::vector<int>& labels, int n_classes, const AnnConfig& cfg = {});
    int predict(const std::vector<double>& x) const;
    std::vector<int> predict_all(const Matrix& x) const;

private:
    std::vector<double> logits(const std::vector<double>& x) const;

    AnnConfig cfg_;
    int n_classes_ = 0;
    Matrix w1_;
    std::vector<double> b1_;
    Matrix w2_;               // classes x hidden
    std::vector<double> b2_;  // classes
};

}  // namespace octorad::genomics
