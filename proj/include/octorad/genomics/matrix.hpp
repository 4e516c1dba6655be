#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace octorad::genomics {

// Row-major cases x features matrix.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }

    const double* row(int r) const { return v.data() + static_cast<std::size_t>(r) * cols; }
    double* row(int r) { return v.data() + static_cast<std::size_t>(r) * cols; }

    std::vector<double> row_vec(int r) const { return {row(r), row(r) + cols}; }

    Matrix select_rows(const std::vector<int>& idx) const {
        Matrix out(static_cast<int>(idx.size()), cols);
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (int c = 0; c < cols; ++c) out.at(static_cast<int>(i), c) = at(idx[i], c);
        return out;
    }

    Matrix select_cols(const std::vector<int>& idx) const {
        Matrix out(rows, static_cast<int>(idx.size()));
        for (int r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < idx.size(); ++c) out.at(r, static_cast<int>(c)) = at(r, idx[c]);
        return out;
    }
};

// Per-column standardization fitted on a training subset only; applying it to
// a validation split keeps the training-fold statistics.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> std_dev;

    void fit(const Matrix& x, const std::vector<int>& row_idx) {
        if (row_idx.empty()) throw std::invalid_argument("Standardizer: empty fit subset");
        mean.assign(static_cast<std::size_t>(x.cols), 0.0);
        std_dev.assign(static_cast<std::size_t>(x.cols), 0.0);
        for (int r : row_idx)
            for (int c = 0; c < x.cols; ++c) mean[c] += x.at(r, c);
        for (double& m : mean) m /= static_cast<double>(row_idx.size());
        for (int r : row_idx)
            for (int c = 0; c < x.cols; ++c) {
                const double d = x.at(r, c) - mean[c];
                std_dev[c] += d * d;
            }
        for (double& s : std_dev) {
            s = std::sqrt(s / static_cast<double>(row_idx.size()));
            if (s == 0.0) s = 1.0;  // constant column stays constant
        }
    }

    void fit_all(const Matrix& x) {
        std::vector<int> idx(static_cast<std::size_t>(x.rows));
        for (int i = 0; i < x.rows; ++i) idx[i] = i;
        fit(x, idx);
    }

    Matrix apply(const Matrix& x) const {
        if (static_cast<std::size_t>(x.cols) != mean.size())
            throw std::invalid_argument("Standardizer: column count mismatch");
        Matrix out(x.rows, x.cols);
        for (int r = 0; r < x.rows; ++r)
            for (int c = 0; c < x.cols; ++c) out.at(r, c) = (x.at(r, c) - mean[c]) / std_dev[c];
        return out;
    }

    std::vector<double> apply_row(const std::vector<double>& row) const {
        std::vector<double> out(row.size());
        for (std::size_t c = 0; c < row.size(); ++c) out[c] = (row[c] - mean[c]) / std_dev[c];
        return out;
    }
};

}  // namespace octorad::genomics
