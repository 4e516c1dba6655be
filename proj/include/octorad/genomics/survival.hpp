#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "octorad/genomics/ann.hpp"
#include "octorad/genomics/matrix.hpp"
#include "octorad/genomics/svm.hpp"

namespace octorad::genomics {

// Day thresholds for the short/medium/long banding (about 10 and 15 months).
struct SurvivalThresholds {
    int short_below = 305;  // short: days < short_below
    int medium_upto = 456;  // medium: short_below <= days <= medium_upto
};

enum class SurvivalClass { Short = 0, Medium = 1, Long = 2 };

SurvivalClass classify_survival(int days, const SurvivalThresholds& thresholds = {});
std::string survival_class_name(SurvivalClass c);

enum class SurvivalModelKind { Svm, Ann };
enum class ClassificationPath { Classifier, ThresholdedRegression };

struct SurvivalEvalConfig {
    SurvivalModelKind model = SurvivalModelKind::Svm;
    ClassificationPath path = ClassificationPath::Classifier;
    int folds = 4;
    std::uint64_t seed = 1;
    SurvivalThresholds thresholds;
    SvmConfig svm;
    AnnConfig ann;
};

struct FoldMetrics {
    double mse = 0.0;       // days^2
    double accuracy = 0.0;  // percent
    std::array<double, 3> sensitivity{};  // percent per class, NaN when the fold lacks the class
    std::array<double, 3> specificity{};
    std::array<std::array<int, 2>, 3> confusion_pos{};  // per class: {TP, FN}
    std::array<std::array<int, 2>, 3> confusion_neg{};  // per class: {TN, FP}
};

struct SurvivalEvalResult {
    std::vector<FoldMetrics> folds;
    FoldMetrics average;                     // arithmetic mean of fold rows
    std::vector<std::vector<int>> fold_ids;  // case row indices per fold
};

// Case-disjoint k-fold evaluation. Standardization is fitted on the training
// folds only. Regression targets are days; MSE is reported in days^2.
SurvivalEvalResult evaluate_survival(const Matrix& features, const std::vector<int>& days,
                                     const SurvivalEvalConfig& cfg);

// Metrics from prediction/truth class pairs (percent); NaN where undefined.
FoldMetrics classification_metrics(const std::vector<int>& predicted, const std::vector<int>& truth);

}  // namespace octorad::genomics
