#include "octorad/genomics/ann.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "octorad/core/rng.hpp"

namespace octorad::genomics {

namespace {

// seeded split into train/validation index sets
void split_indices(int n, double val_fraction, std::uint64_t seed, std::vector<int>& train, std::vector<int>& val) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    rng.shuffle(idx);
    const int n_val = static_cast<int>(std::floor(val_fraction * n));
    val.assign(idx.begin(), idx.begin() + n_val);
    train.assign(idx.begin() + n_val, idx.end());
    if (train.empty()) {
        train = val;  // degenerate tiny datasets train on everything
        val.clear();
    }
}

}  // namespace

void AnnRegressor::fit(const Matrix& x, const std::vector<double>& y, const AnnConfig& cfg) {
    if (x.rows == 0) throw std::invalid_argument("AnnRegressor: empty training set");
    if (static_cast<int>(y.size()) != x.rows) throw std::invalid_argument("AnnRegressor: target size mismatch");
    cfg_ = cfg;
    const int d = x.cols, h = cfg.hidden;

    y_mean_ = 0.0;
    for (double v : y) y_mean_ += v;
    y_mean_ /= static_cast<double>(y.size());
    double var = 0.0;
    for (double v : y) var += (v - y_mean_) * (v - y_mean_);
    y_std_ = std::sqrt(var / static_cast<double>(y.size()));
    if (y_std_ == 0.0) y_std_ = 1.0;

    Rng rng(cfg.seed);
    w1_ = Matrix(h, d);
    for (double& v : w1_.v) v = rng.normal() * std::sqrt(2.0 / d);
    b1_.assign(static_cast<std::size_t>(h), 0.0);
    w2_.assign(static_cast<std::size_t>(h), 0.0);
    for (double& v : w2_) v = rng.normal() * std::sqrt(1.0 / h);
    b2_ = 0.0;

    std::vector<int> train, val;
    split_indices(x.rows, cfg.val_fraction, cfg.seed ^ 0x5eedull, train, val);

    auto forward_one = [&](int r, std::vector<double>& hidden) {
        double out = b2_;
        for (int j = 0; j < h; ++j) {
            double z = b1_[j];
            const double* wr = w1_.row(j);
            const double* xr = x.row(r);
            for (int c = 0; c < d; ++c) z += wr[c] * xr[c];
            hidden[j] = z > 0 ? z : 0.0;
            out += w2_[j] * hidden[j];
        }
        return out;
    };

    auto loss_on = [&](const std::vector<int>& rows) {
        if (rows.empty()) return 0.0;
        std::vector<double> hidden(static_cast<std::size_t>(h));
        double s = 0.0;
        for (int r : rows) {
            const double err = forward_one(r, hidden) - (y[r] - y_mean_) / y_std_;
            s += err * err;
        }
        return s / static_cast<double>(rows.size());
    };

    Matrix best_w1 = w1_;
    std::vector<double> best_b1 = b1_, best_w2 = w2_;
    double best_b2 = b2_;
    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;

    Matrix gw1(h, d);
    std::vector<double> gb1(static_cast<std::size_t>(h)), gw2(static_cast<std::size_t>(h));
    std::vector<double> hidden(static_cast<std::size_t>(h));

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        std::fill(gw1.v.begin(), gw1.v.end(), 0.0);
        std::fill(gb1.begin(), gb1.end(), 0.0);
        std::fill(gw2.begin(), gw2.end(), 0.0);
        double gb2 = 0.0;

        for (int r : train) {
            const double out = forward_one(r, hidden);
            const double err = 2.0 * (out - (y[r] - y_mean_) / y_std_) / static_cast<double>(train.size());
            gb2 += err;
            const double* xr = x.row(r);
            for (int j = 0; j < h; ++j) {
                gw2[j] += err * hidden[j];
                if (hidden[j] > 0) {
                    const double gj = err * w2_[j];
                    gb1[j] += gj;
                    double* gw = gw1.row(j);
                    for (int c = 0; c < d; ++c) gw[c] += gj * xr[c];
                }
            }
        }

        for (std::size_t i = 0; i < w1_.v.size(); ++i) w1_.v[i] -= cfg.lr * gw1.v[i];
        for (int j = 0; j < h; ++j) {
            b1_[j] -= cfg.lr * gb1[j];
            w2_[j] -= cfg.lr * gw2[j];
        }
        b2_ -= cfg.lr * gb2;

        if (!val.empty()) {
            const double vl = loss_on(val);
            if (vl < best_val - 1e-12) {
                best_val = vl;
                best_w1 = w1_;
                best_b1 = b1_;
                best_w2 = w2_;
                best_b2 = b2_;
                since_best = 0;
            } else if (++since_best > cfg.patience) {
                break;
            }
        }
    }

    if (!val.empty()) {
        w1_ = best_w1;
        b1_ = best_b1;
        w2_ = best_w2;
        b2_ = best_b2;
    }
}

double AnnRegressor::predict(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != w1_.cols) throw std::invalid_argument("AnnRegressor: feature count mismatch");
    double out = b2_;
    for (int j = 0; j < w1_.rows; ++j) {
        double z = b1_[j];
        const double* wr = w1_.row(j);
        for (int c = 0; c < w1_.cols; ++c) z += wr[c] * x[c];
        if (z > 0) out += w2_[j] * z;
    }
    return out * y_std_ + y_mean_;
}

std::vector<double> AnnRegressor::predict_all(const Matrix& x) const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(x.rows));
    for (int r = 0; r < x.rows; ++r) out.push_back(predict(x.row_vec(r)));
    return out;
}

void AnnClassifier::fit(const Matrix& x, const std::vector<int>& labels, int n_classes, const AnnConfig& cfg) {
    if (x.rows == 0) throw std::invalid_argument("AnnClassifier: empty training set");
    cfg_ = cfg;
    n_classes_ = n_classes;
    const int d = x.cols, h = cfg.hidden;

    Rng rng(cfg.seed);
    w1_ = Matrix(h, d);
    for (double& v : w1_.v) v = rng.normal() * std::sqrt(2.0 / d);
    b1_.assign(static_cast<std::size_t>(h), 0.0);
    w2_ = Matrix(n_classes, h);
    for (double& v : w2_.v) v = rng.normal() * std::sqrt(1.0 / h);
    b2_.assign(static_cast<std::size_t>(n_classes), 0.0);

    std::vector<int> train, val;
    split_indices(x.rows, cfg.val_fraction, cfg.seed ^ 0x5eedull, train, val);

    std::vector<double> hidden(static_cast<std::size_t>(h)), probs(static_cast<std::size_t>(n_classes));
    auto forward_one = [&](int r) {
        const double* xr = x.row(r);
        for (int j = 0; j < h; ++j) {
            double z = b1_[j];
            const double* wr = w1_.row(j);
            for (int c = 0; c < d; ++c) z += wr[c] * xr[c];
            hidden[j] = z > 0 ? z : 0.0;
        }
        double zmax = -1e300;
        for (int k = 0; k < n_classes_; ++k) {
            double z = b2_[k];
            const double* wr = w2_.row(k);
            for (int j = 0; j < h; ++j) z += wr[j] * hidden[j];
            probs[k] = z;
            zmax = std::max(zmax, z);
        }
        double denom = 0.0;
        for (int k = 0; k < n_classes_; ++k) {
            probs[k] = std::exp(probs[k] - zmax);
            denom += probs[k];
        }
        for (int k = 0; k < n_classes_; ++k) probs[k] /= denom;
    };

    auto loss_on = [&](const std::vector<int>& rows) {
        if (rows.empty()) return 0.0;
        double s = 0.0;
        for (int r : rows) {
            forward_one(r);
            s -= std::log(std::max(probs[labels[r]], 1e-12));
        }
        return s / static_cast<double>(rows.size());
    };

    Matrix best_w1 = w1_, best_w2 = w2_;
    std::vector<double> best_b1 = b1_, best_b2 = b2_;
    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;

    Matrix gw1(h, d), gw2(n_classes, h);
    std::vector<double> gb1(static_cast<std::size_t>(h)), gb2(static_cast<std::size_t>(n_classes));

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        std::fill(gw1.v.begin(), gw1.v.end(), 0.0);
        std::fill(gw2.v.begin(), gw2.v.end(), 0.0);
        std::fill(gb1.begin(), gb1.end(), 0.0);
        std::fill(gb2.begin(), gb2.end(), 0.0);

        for (int r : train) {
            forward_one(r);
            const double* xr = x.row(r);
            for (int k = 0; k < n_classes_; ++k) {
                const double gk = (probs[k] - (labels[r] == k ? 1.0 : 0.0)) / static_cast<double>(train.size());
                gb2[k] += gk;
                double* gw = gw2.row(k);
                for (int j = 0; j < h; ++j) gw[j] += gk * hidden[j];
            }
            for (int j = 0; j < h; ++j) {
                if (hidden[j] <= 0) continue;
                double gj = 0.0;
                for (int k = 0; k < n_classes_; ++k)
                    gj += (probs[k] - (labels[r] == k ? 1.0 : 0.0)) / static_cast<double>(train.size()) * w2_.at(k, j);
                gb1[j] += gj;
                double* gw = gw1.row(j);
                for (int c = 0; c < d; ++c) gw[c] += gj * xr[c];
            }
        }

        for (std::size_t i = 0; i < w1_.v.size(); ++i) w1_.v[i] -= cfg.lr * gw1.v[i];
        for (std::size_t i = 0; i < w2_.v.size(); ++i) w2_.v[i] -= cfg.lr * gw2.v[i];
        for (int j = 0; j < h; ++j) b1_[j] -= cfg.lr * gb1[j];
        for (int k = 0; k < n_classes_; ++k) b2_[k] -= cfg.lr * gb2[k];

        if (!val.empty()) {
            const double vl = loss_on(val);
            if (vl < best_val - 1e-12) {
                best_val = vl;
                best_w1 = w1_;
                best_w2 = w2_;
                best_b1 = b1_;
                best_b2 = b2_;
                since_best = 0;
            } else if (++since_best > cfg.patience) {
                break;
            }
        }
    }

    if (!val.empty()) {
        w1_ = best_w1;
        w2_ = best_w2;
        b1_ = best_b1;
        b2_ = best_b2;
    }
}

std::vector<double> AnnClassifier::logits(const std::vector<double>& x) const {
    std::vector<double> hidden(static_cast<std::size_t>(w1_.rows));
    for (int j = 0; j < w1_.rows; ++j) {
        double z = b1_[j];
        const double* wr = w1_.row(j);
        for (int c = 0; c < w1_.cols; ++c) z += wr[c] * x[c];
        hidden[j] = z > 0 ? z : 0.0;
    }
    std::vector<double> out(static_cast<std::size_t>(n_classes_));
    for (int k = 0; k < n_classes_; ++k) {
        double z = b2_[k];
        const double* wr = w2_.row(k);
        for (int j = 0; j < w1_.rows; ++j) z += wr[j] * hidden[j];
        out[k] = z;
    }
    return out;
}

int AnnClassifier::predict(const std::vector<double>& x) const {
    const auto z = logits(x);
    int best = 0;
    for (int k = 1; k < n_classes_; ++k)
        if (z[k] > z[best]) best = k;
    return best;
}

std::vector<int> AnnClassifier::predict_all(const Matrix& x) const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(x.rows));
    for (int r = 0; r < x.rows; ++r) out.push_back(predict(x.row_vec(r)));
    return out;
}

}  // namespace octorad::genomics
