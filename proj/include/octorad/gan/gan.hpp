#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "octorad/io/dataset.hpp"
#include "octorad/nn/checkpoint.hpp"
#include "octorad/nn/fcn.hpp"

namespace octorad::gan {

struct SynthesisTask {
    std::vector<std::string> sources;  // ordered, e.g. {T1c, Flair}
    std::string target;
    int noise_channels = 1;

    void validate() const;
};

struct GanObjective {
    double lambda = 100.0;  // weight on the L1 distance term
};

struct GanLossValue {
    double g_loss = 0.0;
    double d_loss = 0.0;
    double adversarial = 0.0;  // BCE(d_fake, 1)
    double l1 = 0.0;           // mean |fake - target|
};

// g_loss = BCE(d_fake,1) + lambda * mean|fake-target|
// d_loss = (BCE(d_real,1) + BCE(d_fake,0)) / 2
GanLossValue gan_loss(const GanObjective& objective, const Tensor& d_real, const Tensor& d_fake, const Tensor& fake,
                      const Tensor& target);

// 10*log10(peak^2 / MSE); identical inputs give +infinity
double psnr(const Tensor& a, const Tensor& b, double peak);
double psnr(const Volume& a, const Volume& b, double peak);

struct GanTrainConfig {
    double lr_g = 5e-3;  // paper assigns 0.005 to the synthesis model
    double lr_d = 5e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double weight_decay = 1e-4;
    int steps = 2000;
    int batch = 2;
    std::uint64_t seed = 1;
    int eval_interval = 100;       // holdout PSNR cadence
    double holdout_fraction = 0.25;

    int g_depth = 3;
    int g_base = 8;
    double g_alpha = 0.25;
    int g_se_reduction = 2;
    int d_depth = 3;
    int d_base = 8;
};

struct CurvePoint {
    int step = 0;
    double g_loss = 0.0;
    double d_loss = 0.0;
    double l1 = 0.0;
    double psnr_holdout = 0.0;
    bool has_psnr = false;
};

// Generator plus everything needed to rebuild and apply it.
struct Synthesizer {
    SynthesisTask task;
    nn::FcnConfig fcn;
    nn::OctFcn net;

    // per-slice application on normalized sources; noise seeded from (id, z)
    Volume synthesize_volume(const CaseRecord& record) const;
};

struct GanTrainResult {
    Synthesizer generator;
    nn::PlainEncDec discriminator;
    std::vector<CurvePoint> curve;
    std::vector<std::string> holdout_ids;
};

GanTrainResult train_synthesizer(const SynthesisTask& task, const Dataset& dataset, const GanTrainConfig& cfg,
                                 const GanObjective& objective = {});

void save_synthesizer(const Synthesizer& s, const std::string& path);
Synthesizer load_synthesizer(const std::string& path);

// Fills every absent modality from the best-matching available-source task
// (most sources, then lexicographically smallest). Throws with the full list
// of unfillable modalities when no checkpoint covers one of them.
CaseRecord synthesize_missing(const CaseRecord& record, const std::vector<const Synthesizer*>& generators);

}  // namespace octorad::gan
