#include "octorad/genomics/rfe.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "octorad/genomics/svm.hpp"

namespace octorad::genomics {

RfeResult rfe_select(const Matrix& x, const std::vector<std::string>& column_names, const std::vector<double>& labels,
                     int target_count, std::uint64_t /*seed*/) {
    if (static_cast<int>(column_names.size()) != x.cols)
        throw std::invalid_argument("rfe_select: column name count mismatch");
    if (static_cast<int>(labels.size()) != x.rows) throw std::invalid_argument("rfe_select: label count mismatch");
    if (target_count < 1 || target_count > x.cols)
        throw std::invalid_argument("rfe_select: target count " + std::to_string(target_count) +
                                    " outside 1.." + std::to_string(x.cols));

    RfeResult res;
    res.target_count = target_count;

    std::vector<int> remaining(static_cast<std::size_t>(x.cols));
    for (int c = 0; c < x.cols; ++c) remaining[c] = c;

    SvmConfig cfg;
    cfg.kernel = SvmKernel::Linear;
    cfg.C = 1.0;

    while (static_cast<int>(remaining.size()) > target_count) {
        Matrix sub = x.select_cols(remaining);
        Standardizer std_all;
        std_all.fit_all(sub);
        Matrix z = std_all.apply(sub);

        Svr ranker;
        ranker.fit(z, labels, cfg);
        const std::vector<double> w = ranker.linear_weights();

        // drop the lowest-|w| tenth of the remaining columns, one at minimum,
        // never past the target
        int n_drop = static_cast<int>(remaining.size()) / 10;
        n_drop = std::max(n_drop, 1);
        n_drop = std::min(n_drop, static_cast<int>(remaining.size()) - target_count);

        std::vector<int> order(remaining.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            const double wa = std::abs(w[a]), wb = std::abs(w[b]);
            if (wa != wb) return wa < wb;
            return column_names[remaining[a]] < column_names[remaining[b]];
        });

        std::vector<int> to_drop(order.begin(), order.begin() + n_drop);
        std::sort(to_drop.begin(), to_drop.end(), std::greater<int>());
        for (int local : to_drop) {
            res.elimination_order.push_back(column_names[remaining[local]]);
            remaining.erase(remaining.begin() + local);
        }
    }

    for (int c : remaining) res.selected.push_back(column_names[c]);
    return res;
}

}  // namespace octorad::genomics
