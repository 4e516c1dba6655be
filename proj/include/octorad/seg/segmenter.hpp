#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "octorad/io/dataset.hpp"
#include "octorad/nn/fcn.hpp"
#include "octorad/seg/metrics.hpp"

namespace octorad::seg {

struct SegTrainConfig {
    double lr = 1e-4;  // paper assigns 0.0001 to the segmentation model
    double beta1 = 0.9;
    double beta2 = 0.999;
    double weight_decay = 1e-4;
    int steps = 600;
    int batch = 2;
    std::uint64_t seed = 1;
    double tumor_slice_fraction = 0.75;  // sampling bias towards tumor-bearing slices

    int depth = 3;
    int base = 8;
    double alpha = 0.25;
    int se_reduction = 2;
    std::vector<std::string> modalities{"T1c", "Flair", "T2"};  // channel order
};

// 4-class-output FCN over the configured modality stack.
struct Segmenter {
    std::vector<std::string> modalities;
    nn::FcnConfig fcn;
    nn::OctFcn net;
};

struct SegTrainResult {
    Segmenter segmenter;
    std::vector<double> loss_curve;  // per step
};

SegTrainResult train_segmenter(const Dataset& dataset, const std::vector<int>& case_indices,
                               const SegTrainConfig& cfg);
SegTrainResult train_segmenter(const Dataset& dataset, const SegTrainConfig& cfg);

// Mean ensemble softmax, then per-pixel argmax back to labels {0,1,2,4}.
Volume predict_mask(const std::vector<const Segmenter*>& ensemble, const CaseRecord& record);
Volume predict_mask(const Segmenter& segmenter, const CaseRecord& record);

void save_segmenter(const Segmenter& s, const std::string& path);
Segmenter load_segmenter(const std::string& path);

struct FoldEnsemble {
    std::vector<Segmenter> members;
};

struct FoldReport {
    int fold = 0;
    std::vector<std::string> validation_ids;
    double dice_et = 0.0, dice_wt = 0.0, dice_tc = 0.0;
};

struct CrossValResult {
    FoldEnsemble ensemble;
    std::vector<FoldReport> folds;
};

// Case-disjoint k-fold training; returns the ensemble of per-fold models.
CrossValResult cross_validate_segmentation(const Dataset& dataset, int k, const SegTrainConfig& cfg);

struct AblationRow {
    std::vector<std::string> modalities;
    double dice_et = 0.0, dice_wt = 0.0, dice_tc = 0.0;
};

// Trains one segmenter per modality subset under an identical budget and
// seed; evaluates on a fixed held-out case split.
std::vector<AblationRow> modality_ablation(const Dataset& dataset,
                                           const std::vector<std::vector<std::string>>& subsets,
                                           const SegTrainConfig& cfg, double holdout_fraction = 0.25);

}  // namespace octorad::seg
