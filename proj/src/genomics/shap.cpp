#include "octorad/genomics/shap.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "octorad/core/rng.hpp"

namespace octorad::genomics {

namespace {

ShapResult shap_exact(const ModelFn& model, const std::vector<double>& instance, const Matrix& background) {
    const int d = static_cast<int>(instance.size());
    const std::size_t n_sets = std::size_t{1} << d;

    // v(S): model output with S taken from the instance, rest from background
    std::vector<double> v(n_sets, 0.0);
    std::vector<double> z(instance.size());
    for (std::size_t s = 0; s < n_sets; ++s) {
        double acc = 0.0;
        for (int b = 0; b < background.rows; ++b) {
            const double* bg = background.row(b);
            for (int f = 0; f < d; ++f) z[f] = (s >> f) & 1 ? instance[f] : bg[f];
            acc += model(z);
        }
        v[s] = acc / static_cast<double>(background.rows);
    }

    // weights s!(d-s-1)!/d!
    std::vector<double> fact(static_cast<std::size_t>(d) + 1, 1.0);
    for (int i = 1; i <= d; ++i) fact[i] = fact[i - 1] * i;
    std::vector<double> weight(static_cast<std::size_t>(d), 0.0);
    for (int s = 0; s < d; ++s) weight[s] = fact[s] * fact[d - s - 1] / fact[d];

    ShapResult res;
    res.exact = true;
    res.base_value = v[0];
    res.phi.assign(static_cast<std::size_t>(d), 0.0);
    for (std::size_t s = 0; s < n_sets; ++s) {
        const int size_s = __builtin_popcountll(s);
        for (int f = 0; f < d; ++f) {
            if ((s >> f) & 1) continue;
            res.phi[f] += weight[size_s] * (v[s | (std::size_t{1} << f)] - v[s]);
        }
    }
    return res;
}

ShapResult shap_sampled(const ModelFn& model, const std::vector<double>& instance, const Matrix& background,
                        const ShapConfig& cfg) {
    const int d = static_cast<int>(instance.size());
    const int n_perms = std::max(1, cfg.sample_budget / std::max(1, d));
    Rng rng(cfg.seed);

    ShapResult res;
    res.exact = false;
    res.phi.assign(static_cast<std::size_t>(d), 0.0);

    std::vector<int> perm(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) perm[i] = i;

    double base_acc = 0.0;
    std::vector<double> z(instance.size());
    for (int p = 0; p < n_perms; ++p) {
        rng.shuffle(perm);
        const int b = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(background.rows));
        const double* bg = background.row(b);
        for (int f = 0; f < d; ++f) z[f] = bg[f];
        double prev = model(z);
        base_acc += prev;
        for (int f : perm) {
            z[f] = instance[f];
            const double cur = model(z);
            res.phi[f] += (cur - prev) / n_perms;
            prev = cur;
        }
    }
    res.base_value = base_acc / n_perms;
    return res;
}

}  // namespace

ShapResult shap_attribution(const ModelFn& model, const std::vector<double>& instance, const Matrix& background,
                            const ShapConfig& cfg) {
    if (background.rows == 0) throw std::invalid_argument("shap_attribution: empty background");
    if (background.cols != static_cast<int>(instance.size()))
        throw std::invalid_argument("shap_attribution: background feature count mismatch");
    if (instance.empty()) throw std::invalid_argument("shap_attribution: empty instance");

    if (static_cast<int>(instance.size()) <= cfg.exact_limit) return shap_exact(model, instance, background);
    return shap_sampled(model, instance, background, cfg);
}

std::vector<RankedFeature> rank_features_by_shap(const std::vector<std::vector<double>>& attributions,
                                                 const std::vector<std::string>& names, int top_k) {
    if (attributions.empty()) throw std::invalid_argument("rank_features_by_shap: no attributions");
    const std::size_t d = names.size();
    for (const auto& a : attributions)
        if (a.size() != d) throw std::invalid_argument("rank_features_by_shap: attribution width mismatch");

    std::vector<RankedFeature> out(d);
    for (std::size_t f = 0; f < d; ++f) {
        double acc = 0.0;
        for (const auto& a : attributions) acc += std::abs(a[f]);
        out[f] = {names[f], acc / static_cast<double>(attributions.size())};
    }
    std::stable_sort(out.begin(), out.end(), [](const RankedFeature& a, const RankedFeature& b) {
        if (a.mean_abs_shap != b.mean_abs_shap) return a.mean_abs_shap > b.mean_abs_shap;
        return a.name < b.name;
    });
    if (top_k > 0 && static_cast<int>(out.size()) > top_k) out.resize(static_cast<std::size_t>(top_k));
    return out;
}

}  // namespace octorad::genomics
