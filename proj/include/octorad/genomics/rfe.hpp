#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "octorad/genomics/matrix.hpp"

namespace octorad::genomics {

struct RfeResult {
    std::vector<std::string> selected;           // target_count names, original order
    std::vector<std::string> elimination_order;  // first-dropped first
    int target_count = 0;
};

// Recursive feature elimination: repeatedly fit a linear-kernel SVR on the
// standardized surviving columns and drop the lowest-|weight| 10% (at least
// one) until the target count remains.
RfeResult rfe_select(const Matrix& x, const std::vector<std::string>& column_names, const std::vector<double>& labels,
                     int target_count, std::uint64_t seed = 0);

}  // namespace octorad::genomics
