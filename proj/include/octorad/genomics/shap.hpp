#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "octorad/genomics/matrix.hpp"

namespace octorad::genomics {

using ModelFn = std::function<double(const std::vector<double>&)>;

struct ShapConfig {
    int exact_limit = 15;      // exact coalition enumeration up to this many features
    int sample_budget = 2048;  // approximate model-evaluation budget beyond that
    std::uint64_t seed = 1;
};

struct ShapResult {
    std::vector<double> phi;  // one value per feature
    double base_value = 0.0;  // expected model output over the background
    bool exact = false;
};

// Interventional Shapley values: absent features are filled from background
// rows. Exact mode enumerates all 2^d coalitions; sampling mode walks seeded
// feature permutations. Efficiency (base + sum(phi) = f(instance)) holds in
// both modes.
ShapResult shap_attribution(const ModelFn& model, const std::vector<double>& instance, const Matrix& background,
                            const ShapConfig& cfg = {});

struct RankedFeature {
    std::string name;
    double mean_abs_shap = 0.0;
};

// Descending mean-|phi| ranking over a cohort of attributions.
std::vector<RankedFeature> rank_features_by_shap(const std::vector<std::vector<double>>& attributions,
                                                 const std::vector<std::string>& names, int top_k = 20);

}  // namespace octorad::genomics
