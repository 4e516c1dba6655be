#include "octorad/genomics/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace octorad::genomics {

namespace {

double kernel_eval(SvmKernel kind, double gamma, const double* a, const double* b, int d) {
    if (kind == SvmKernel::Linear) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += a[i] * b[i];
        return s;
    }
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return std::exp(-gamma * s);
}

// Generic SMO solver for min 1/2 a'Qa + p'a  s.t.  y'a = 0, 0 <= a_t <= C,
// with maximal-violating-pair working set selection.
struct SmoProblem {
    const std::vector<double>& Q;  // l x l, row-major
    const std::vector<double>& p;
    const std::vector<signed char>& y;
    double C;
    double tol;
    long max_iter;
};

struct SmoSolution {
    std::vector<double> alpha;
    double rho = 0.0;
    long iterations = 0;
};

SmoSolution smo_solve(const SmoProblem& prob) {
    const int l = static_cast<int>(prob.y.size());
    std::vector<double> alpha(l, 0.0);
    std::vector<double> grad(prob.p);  // G = Qa + p, a = 0 initially

    const double tau = 1e-12;
    long it = 0;
    for (; it < prob.max_iter; ++it) {
        // select i in I_up maximizing -y G, j in I_low minimizing -y G
        int i = -1, j = -1;
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        for (int t = 0; t < l; ++t) {
            const bool upper = alpha[t] >= prob.C;
            const bool lower = alpha[t] <= 0.0;
            const double v = -prob.y[t] * grad[t];
            const bool in_up = (prob.y[t] > 0 && !upper) || (prob.y[t] < 0 && !lower);
            const bool in_low = (prob.y[t] > 0 && !lower) || (prob.y[t] < 0 && !upper);
            if (in_up && v > gmax) {
                gmax = v;
                i = t;
            }
            if (in_low && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        if (i < 0 || j < 0 || gmax - gmin < prob.tol) break;

        const double* Qi = prob.Q.data() + static_cast<std::size_t>(i) * l;
        const double* Qj = prob.Q.data() + static_cast<std::size_t>(j) * l;
        const double old_ai = alpha[i], old_aj = alpha[j];

        if (prob.y[i] != prob.y[j]) {
            double quad = Qi[i] + Qj[j] + 2.0 * Qi[j];
            if (quad <= 0) quad = tau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0) {
                if (alpha[j] < 0) {
                    alpha[j] = 0;
                    alpha[i] = diff;
                }
                if (alpha[i] > prob.C) {
                    alpha[i] = prob.C;
                    alpha[j] = prob.C - diff;
                }
            } else {
                if (alpha[i] < 0) {
                    alpha[i] = 0;
                    alpha[j] = -diff;
                }
                if (alpha[j] > prob.C) {
                    alpha[j] = prob.C;
                    alpha[i] = prob.C + diff;
                }
            }
        } else {
            double quad = Qi[i] + Qj[j] - 2.0 * Qi[j];
            if (quad <= 0) quad = tau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = sum;
            }
            if (alpha[j] < 0) {
                alpha[j] = 0;
                alpha[i] = sum;
            }
            if (alpha[i] > prob.C) {
                alpha[i] = prob.C;
                alpha[j] = sum - prob.C;
            }
            if (alpha[j] > prob.C) {
                alpha[j] = prob.C;
                alpha[i] = sum - prob.C;
            }
        }

        const double dai = alpha[i] - old_ai;
        const double daj = alpha[j] - old_aj;
        if (dai == 0.0 && daj == 0.0) break;  // numerically stuck
        for (int t = 0; t < l; ++t) grad[t] += Qi[t] * dai + Qj[t] * daj;
    }

    // rho from free variables (or the midpoint of the violating bounds)
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    int n_free = 0;
    for (int t = 0; t < static_cast<int>(prob.y.size()); ++t) {
        const double yg = prob.y[t] * grad[t];
        if (alpha[t] >= prob.C) {
            if (prob.y[t] < 0)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else if (alpha[t] <= 0.0) {
            if (prob.y[t] > 0)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    SmoSolution sol;
    sol.alpha = std::move(alpha);
    sol.rho = n_free > 0 ? sum_free / n_free : (ub + lb) / 2.0;
    sol.iterations = it;
    return sol;
}

}  // namespace

double gamma_scale(const Matrix& x) {
    if (x.rows == 0 || x.cols == 0) return 1.0;
    double mean = 0.0;
    for (double v : x.v) mean += v;
    mean /= static_cast<double>(x.v.size());
    double var = 0.0;
    for (double v : x.v) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.v.size());
    if (var <= 0) var = 1.0;
    return 1.0 / (static_cast<double>(x.cols) * var);
}

// ---------------------------------------------------------------------- Svr

void Svr::fit(const Matrix& x, const std::vector<double>& y, const SvmConfig& cfg) {
    if (x.rows == 0) throw std::invalid_argument("Svr: empty training set");
    if (static_cast<int>(y.size()) != x.rows) throw std::invalid_argument("Svr: target size mismatch");
    cfg_ = cfg;
    gamma_ = cfg.gamma > 0 ? cfg.gamma : gamma_scale(x);

    y_mean_ = 0.0;
    for (double v : y) y_mean_ += v;
    y_mean_ /= static_cast<double>(y.size());
    double var = 0.0;
    for (double v : y) var += (v - y_mean_) * (v - y_mean_);
    y_std_ = std::sqrt(var / static_cast<double>(y.size()));
    if (y_std_ == 0.0) y_std_ = 1.0;

    const int l = x.rows;
    std::vector<double> K(static_cast<std::size_t>(l) * l);
    for (int i = 0; i < l; ++i)
        for (int j = i; j < l; ++j) {
            const double k = kernel_eval(cfg_.kernel, gamma_, x.row(i), x.row(j), x.cols);
            K[static_cast<std::size_t>(i) * l + j] = k;
            K[static_cast<std::size_t>(j) * l + i] = k;
        }

    // 2l-variable formulation: first l are alpha+, last l are alpha-
    const int L = 2 * l;
    std::vector<double> Q(static_cast<std::size_t>(L) * L);
    std::vector<double> p(L);
    std::vector<signed char> ysign(L);
    for (int i = 0; i < l; ++i) {
        const double z = (y[i] - y_mean_) / y_std_;
        p[i] = cfg_.epsilon - z;
        p[i + l] = cfg_.epsilon + z;
        ysign[i] = +1;
        ysign[i + l] = -1;
        for (int j = 0; j < l; ++j) {
            const double k = K[static_cast<std::size_t>(i) * l + j];
            Q[static_cast<std::size_t>(i) * L + j] = k;
            Q[static_cast<std::size_t>(i) * L + j + l] = -k;
            Q[static_cast<std::size_t>(i + l) * L + j] = -k;
            Q[static_cast<std::size_t>(i + l) * L + j + l] = k;
        }
    }

    SmoSolution sol = smo_solve({Q, p, ysign, cfg_.C, cfg_.tol, cfg_.max_iter});

    support_ = Matrix(0, x.cols);
    coef_.clear();
    std::vector<int> sv_rows;
    for (int i = 0; i < l; ++i) {
        const double c = sol.alpha[i] - sol.alpha[i + l];
        if (c != 0.0) {
            sv_rows.push_back(i);
            coef_.push_back(c);
        }
    }
    support_ = x.select_rows(sv_rows);
    rho_ = sol.rho;
}

double Svr::predict(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != support_.cols) throw std::invalid_argument("Svr: feature count mismatch");
    double f = -rho_;
    for (int i = 0; i < support_.rows; ++i)
        f += coef_[i] * kernel_eval(cfg_.kernel, gamma_, support_.row(i), x.data(), support_.cols);
    return f * y_std_ + y_mean_;
}

std::vector<double> Svr::predict_all(const Matrix& x) const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(x.rows));
    for (int r = 0; r < x.rows; ++r) out.push_back(predict(x.row_vec(r)));
    return out;
}

std::vector<double> Svr::linear_weights() const {
    std::vector<double> w(static_cast<std::size_t>(support_.cols), 0.0);
    for (int i = 0; i < support_.rows; ++i)
        for (int c = 0; c < support_.cols; ++c) w[c] += coef_[i] * support_.at(i, c);
    return w;
}

// ---------------------------------------------------------------------- Svc

void Svc::fit(const Matrix& x, const std::vector<int>& labels, const SvmConfig& cfg) {
    if (x.rows == 0) throw std::invalid_argument("Svc: empty training set");
    if (static_cast<int>(labels.size()) != x.rows) throw std::invalid_argument("Svc: label size mismatch");
    cfg_ = cfg;
    gamma_ = cfg.gamma > 0 ? cfg.gamma : gamma_scale(x);

    classes_.clear();
    for (int c : labels)
        if (std::find(classes_.begin(), classes_.end(), c) == classes_.end()) classes_.push_back(c);
    std::sort(classes_.begin(), classes_.end());
    if (classes_.size() < 2) throw std::invalid_argument("Svc: training set has a single class");

    machines_.clear();
    for (std::size_t a = 0; a < classes_.size(); ++a)
        for (std::size_t b = a + 1; b < classes_.size(); ++b) {
            std::vector<int> rows;
            std::vector<signed char> ysign;
            for (int r = 0; r < x.rows; ++r) {
                if (labels[r] == classes_[a]) {
                    rows.push_back(r);
                    ysign.push_back(+1);
                } else if (labels[r] == classes_[b]) {
                    rows.push_back(r);
                    ysign.push_back(-1);
                }
            }
            Matrix sub = x.select_rows(rows);
            const int l = sub.rows;
            std::vector<double> Q(static_cast<std::size_t>(l) * l);
            for (int i = 0; i < l; ++i)
                for (int j = i; j < l; ++j) {
                    const double k = ysign[i] * ysign[j] *
                                     kernel_eval(cfg_.kernel, gamma_, sub.row(i), sub.row(j), sub.cols);
                    Q[static_cast<std::size_t>(i) * l + j] = k;
                    Q[static_cast<std::size_t>(j) * l + i] = k;
                }
            std::vector<double> p(l, -1.0);
            SmoSolution sol = smo_solve({Q, p, ysign, cfg_.C, cfg_.tol, cfg_.max_iter});

            BinaryMachine m;
            m.pos_class = classes_[a];
            m.neg_class = classes_[b];
            std::vector<int> sv_rows;
            for (int i = 0; i < l; ++i)
                if (sol.alpha[i] > 0.0) {
                    sv_rows.push_back(i);
                    m.coef.push_back(sol.alpha[i] * ysign[i]);
                }
            m.support = sub.select_rows(sv_rows);
            m.rho = sol.rho;
            machines_.push_back(std::move(m));
        }
}

double Svc::decision(const BinaryMachine& m, const std::vector<double>& x) const {
    double f = -m.rho;
    for (int i = 0; i < m.support.rows; ++i)
        f += m.coef[i] * kernel_eval(cfg_.kernel, gamma_, m.support.row(i), x.data(), m.support.cols);
    return f;
}

int Svc::predict(const std::vector<double>& x) const {
    if (machines_.empty()) throw std::logic_error("Svc: predict before fit");
    std::vector<int> votes(classes_.size(), 0);
    for (const auto& m : machines_) {
        const double f = decision(m, x);
        const int winner = f >= 0 ? m.pos_class : m.neg_class;
        for (std::size_t c = 0; c < classes_.size(); ++c)
            if (classes_[c] == winner) ++votes[c];
    }
    int best = 0;
    for (std::size_t c = 1; c < classes_.size(); ++c)
        if (votes[c] > votes[best]) best = static_cast<int>(c);
    return classes_[best];
}

std::vector<int> Svc::predict_all(const Matrix& x) const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(x.rows));
    for (int r = 0; r < x.rows; ++r) out.push_back(predict(x.row_vec(r)));
    return out;
}

}  // namespace octorad::genomics
