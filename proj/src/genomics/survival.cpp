#include "octorad/genomics/survival.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "octorad/core/rng.hpp"

namespace octorad::genomics {

SurvivalClass classify_survival(int days, const SurvivalThresholds& thresholds) {
    if (days <= 0) throw std::invalid_argument("classify_survival: days must be positive");
    if (days < thresholds.short_below) return SurvivalClass::Short;
    if (days <= thresholds.medium_upto) return SurvivalClass::Medium;
    return SurvivalClass::Long;
}

std::string survival_class_name(SurvivalClass c) {
    switch (c) {
        case SurvivalClass::Short: return "short";
        case SurvivalClass::Medium: return "medium";
        default: return "long";
    }
}

FoldMetrics classification_metrics(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size()) throw std::invalid_argument("classification_metrics: size mismatch");
    FoldMetrics m;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    int correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (predicted[i] == truth[i]) ++correct;
    m.accuracy = truth.empty() ? nan : 100.0 * correct / static_cast<double>(truth.size());

    for (int c = 0; c < 3; ++c) {
        int tp = 0, fn = 0, tn = 0, fp = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (truth[i] == c)
                (predicted[i] == c ? tp : fn)++;
            else
                (predicted[i] == c ? fp : tn)++;
        }
        m.confusion_pos[c] = {tp, fn};
        m.confusion_neg[c] = {tn, fp};
        m.sensitivity[c] = (tp + fn) > 0 ? 100.0 * tp / static_cast<double>(tp + fn) : nan;
        m.specificity[c] = (tn + fp) > 0 ? 100.0 * tn / static_cast<double>(tn + fp) : nan;
    }
    return m;
}

SurvivalEvalResult evaluate_survival(const Matrix& features, const std::vector<int>& days,
                                     const SurvivalEvalConfig& cfg) {
    const int n = features.rows;
    if (static_cast<int>(days.size()) != n) throw std::invalid_argument("evaluate_survival: days size mismatch");
    if (cfg.folds < 2) throw std::invalid_argument("evaluate_survival: need at least 2 folds");
    if (n < cfg.folds) throw std::invalid_argument("evaluate_survival: fewer cases than folds");

    // seed-deterministic case-disjoint folds
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[i] = i;
    Rng rng(cfg.seed);
    rng.shuffle(order);
    std::vector<std::vector<int>> folds(static_cast<std::size_t>(cfg.folds));
    for (int i = 0; i < n; ++i) folds[i % cfg.folds].push_back(order[i]);

    std::vector<int> truth_class(days.size());
    for (std::size_t i = 0; i < days.size(); ++i)
        truth_class[i] = static_cast<int>(classify_survival(days[i], cfg.thresholds));

    SurvivalEvalResult res;
    res.fold_ids = folds;

    for (int f = 0; f < cfg.folds; ++f) {
        std::vector<int> train_rows;
        for (int g = 0; g < cfg.folds; ++g)
            if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
        const std::vector<int>& val_rows = folds[f];

        Standardizer stdz;
        stdz.fit(features, train_rows);
        Matrix x_train = stdz.apply(features.select_rows(train_rows));
        Matrix x_val = stdz.apply(features.select_rows(val_rows));

        std::vector<double> y_train;
        std::vector<int> c_train;
        for (int r : train_rows) {
            y_train.push_back(static_cast<double>(days[r]));
            c_train.push_back(truth_class[r]);
        }

        std::vector<double> pred_days;
        std::vector<int> pred_class;

        if (cfg.model == SurvivalModelKind::Svm) {
            Svr svr;
            svr.fit(x_train, y_train, cfg.svm);
            pred_days = svr.predict_all(x_val);
            if (cfg.path == ClassificationPath::Classifier) {
                Svc svc;
                svc.fit(x_train, c_train, cfg.svm);
                pred_class = svc.predict_all(x_val);
            }
        } else {
            AnnConfig ann_cfg = cfg.ann;
            ann_cfg.seed = cfg.seed + 1000 + static_cast<std::uint64_t>(f);
            AnnRegressor reg;
            reg.fit(x_train, y_train, ann_cfg);
            pred_days = reg.predict_all(x_val);
            if (cfg.path == ClassificationPath::Classifier) {
                AnnClassifier cls;
                cls.fit(x_train, c_train, 3, ann_cfg);
                pred_class = cls.predict_all(x_val);
            }
        }

        if (cfg.path == ClassificationPath::ThresholdedRegression) {
            for (double d : pred_days) {
                const int clamped = std::max(1, static_cast<int>(std::lround(d)));
                pred_class.push_back(static_cast<int>(classify_survival(clamped, cfg.thresholds)));
            }
        }

        std::vector<int> truth_val;
        for (int r : val_rows) truth_val.push_back(truth_class[r]);

        FoldMetrics m = classification_metrics(pred_class, truth_val);
        double mse = 0.0;
        for (std::size_t i = 0; i < val_rows.size(); ++i) {
            const double e = pred_days[i] - static_cast<double>(days[val_rows[i]]);
            mse += e * e;
        }
        m.mse = mse / static_cast<double>(val_rows.size());
        res.folds.push_back(m);
    }

    FoldMetrics avg;
    avg.mse = 0.0;
    avg.accuracy = 0.0;
    for (int c = 0; c < 3; ++c) {
        avg.sensitivity[c] = 0.0;
        avg.specificity[c] = 0.0;
    }
    for (const auto& m : res.folds) {
        avg.mse += m.mse / res.folds.size();
        avg.accuracy += m.accuracy / res.folds.size();
        for (int c = 0; c < 3; ++c) {
            avg.sensitivity[c] += m.sensitivity[c] / res.folds.size();
            avg.specificity[c] += m.specificity[c] / res.folds.size();
        }
    }
    res.average = avg;
    return res;
}

}  // namespace octorad::genomics
