#include "octorad/seg/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "octorad/io/normalize.hpp"
#include "octorad/nn/checkpoint.hpp"
#include "octorad/nn/optim.hpp"

namespace octorad::seg {

namespace {

constexpr int kLabels[4] = {0, 1, 2, 4};

int label_to_class(int label) {
    switch (label) {
        case 0: return 0;
        case 1: return 1;
        case 2: return 2;
        case 4: return 3;
        default: throw std::runtime_error("segmenter: unexpected label " + std::to_string(label));
    }
}

struct PreparedSegCase {
    std::string id;
    std::vector<Volume> channels;  // normalized, modality order
    const Volume* mask = nullptr;
    std::vector<int> tumor_z;
    std::vector<int> head_z;
};

PreparedSegCase prepare_case(const CaseRecord& rec, const std::vector<std::string>& modalities, bool need_mask) {
    PreparedSegCase pc;
    pc.id = rec.id;
    for (const auto& name : modalities) {
        auto it = rec.modalities.find(name);
        if (it == rec.modalities.end())
            throw std::runtime_error("case " + rec.id + ": modality '" + name + "' missing for segmentation");
        pc.channels.push_back(normalize_intensity(it->second.volume).volume);
    }
    if (need_mask) {
        if (!rec.mask) throw std::runtime_error("case " + rec.id + ": no ground-truth mask");
        pc.mask = &*rec.mask;
        const Volume& m = *pc.mask;
        for (int z = 0; z < m.dims[2]; ++z) {
            bool tumor = false, head = false;
            for (int y = 0; y < m.dims[1] && !tumor; ++y)
                for (int x = 0; x < m.dims[0] && !tumor; ++x)
                    if (m.at(x, y, z) != 0) tumor = true;
            const Volume& c0 = pc.channels.front();
            for (int y = 0; y < m.dims[1] && !head; ++y)
                for (int x = 0; x < m.dims[0] && !head; ++x)
                    if (c0.at(x, y, z) != 0) head = true;
            if (tumor) pc.tumor_z.push_back(z);
            if (head) pc.head_z.push_back(z);
        }
        if (pc.head_z.empty())
            for (int z = 0; z < m.dims[2]; ++z) pc.head_z.push_back(z);
        if (pc.tumor_z.empty()) pc.tumor_z = pc.head_z;
    }
    return pc;
}

void copy_slice(const Volume& vol, int z, double* dst) {
    const int X = vol.dims[0], Y = vol.dims[1];
    for (int y = 0; y < Y; ++y)
        for (int x = 0; x < X; ++x) dst[y * X + x] = vol.at(x, y, z);
}

// weighted softmax cross-entropy over 4 classes; returns loss, writes dlogits
double weighted_ce(const Tensor& logits, const std::vector<int>& target_class, const std::array<double, 4>& weights,
                   Tensor& dlogits) {
    const int B = logits.dim(0), C = logits.dim(1), H = logits.dim(2), W = logits.dim(3);
    dlogits = Tensor(logits.shape());
    double loss = 0.0, weight_sum = 0.0;
    std::array<double, 4> p{};
    for (int n = 0; n < B; ++n)
        for (int h = 0; h < H; ++h)
            for (int w = 0; w < W; ++w) {
                double zmax = -1e300;
                for (int c = 0; c < C; ++c) zmax = std::max(zmax, logits.at(n, c, h, w));
                double denom = 0.0;
                for (int c = 0; c < C; ++c) {
                    p[c] = std::exp(logits.at(n, c, h, w) - zmax);
                    denom += p[c];
                }
                for (int c = 0; c < C; ++c) p[c] /= denom;
                const int t = target_class[(static_cast<std::size_t>(n) * H + h) * W + w];
                const double wt = weights[t];
                loss -= wt * std::log(std::max(p[t], 1e-12));
                weight_sum += wt;
                for (int c = 0; c < C; ++c)
                    dlogits.at(n, c, h, w) = wt * (p[c] - (c == t ? 1.0 : 0.0));
            }
    if (weight_sum <= 0) weight_sum = 1.0;
    for (std::int64_t i = 0; i < dlogits.numel(); ++i) dlogits[i] /= weight_sum;
    return loss / weight_sum;
}

}  // namespace

SegTrainResult train_segmenter(const Dataset& dataset, const std::vector<int>& case_indices,
                               const SegTrainConfig& cfg) {
    if (case_indices.empty()) throw std::invalid_argument("train_segmenter: empty dataset");
    if (cfg.modalities.empty()) throw std::invalid_argument("train_segmenter: no modalities configured");

    std::vector<PreparedSegCase> prepared;
    for (int idx : case_indices) prepared.push_back(prepare_case(dataset.cases.at(idx), cfg.modalities, true));

    // inverse-frequency class weights from the training labels
    std::array<double, 4> counts{0, 0, 0, 0};
    for (const auto& pc : prepared)
        for (double v : pc.mask->voxels) counts[label_to_class(static_cast<int>(v))] += 1.0;
    double total = counts[0] + counts[1] + counts[2] + counts[3];
    std::array<double, 4> weights{};
    double wsum = 0.0;
    int present = 0;
    for (int c = 0; c < 4; ++c) {
        weights[c] = counts[c] > 0 ? total / (4.0 * counts[c]) : 0.0;
        if (counts[c] > 0) {
            wsum += weights[c];
            ++present;
        }
    }
    for (int c = 0; c < 4; ++c)
        if (weights[c] > 0) weights[c] *= static_cast<double>(present) / wsum;

    const Volume& ref = prepared.front().channels.front();
    const int X = ref.dims[0], Y = ref.dims[1];
    const int n_ch = static_cast<int>(cfg.modalities.size());

    SegTrainResult result;
    result.segmenter.modalities = cfg.modalities;
    result.segmenter.fcn = nn::FcnConfig{n_ch, 4, cfg.depth, cfg.base, cfg.alpha, cfg.se_reduction};
    result.segmenter.net = nn::OctFcn(result.segmenter.fcn);

    Rng rng(cfg.seed);
    Rng init_rng = rng.fork(0x5e61);
    result.segmenter.net.init(init_rng);

    nn::ParamList params;
    result.segmenter.net.collect(params);
    nn::Adam opt(params, {cfg.lr, cfg.beta1, cfg.beta2, 1e-8, cfg.weight_decay});

    Rng sample_rng = rng.fork(0xba7c);
    const int B = cfg.batch;
    std::vector<int> target_class(static_cast<std::size_t>(B) * Y * X);

    for (int step = 0; step < cfg.steps; ++step) {
        Tensor x({B, n_ch, Y, X});
        for (int b = 0; b < B; ++b) {
            const PreparedSegCase& pc =
                prepared[sample_rng.uniform_int(0, static_cast<int>(prepared.size()) - 1)];
            const bool tumor_pick = sample_rng.uniform() < cfg.tumor_slice_fraction;
            const auto& zs = tumor_pick ? pc.tumor_z : pc.head_z;
            const int z = zs[sample_rng.uniform_int(0, static_cast<int>(zs.size()) - 1)];
            for (int c = 0; c < n_ch; ++c)
                copy_slice(pc.channels[c], z, x.data() + (static_cast<std::size_t>(b) * n_ch + c) * Y * X);
            for (int y = 0; y < Y; ++y)
                for (int xx = 0; xx < X; ++xx)
                    target_class[(static_cast<std::size_t>(b) * Y + y) * X + xx] =
                        label_to_class(static_cast<int>(pc.mask->at(xx, y, z)));
        }

        opt.zero_grad();
        Tensor logits = result.segmenter.net.forward(x, /*train=*/true);
        Tensor dlogits;
        const double loss = weighted_ce(logits, target_class, weights, dlogits);
        result.segmenter.net.backward(dlogits);
        opt.step();
        result.loss_curve.push_back(loss);
    }
    return result;
}

SegTrainResult train_segmenter(const Dataset& dataset, const SegTrainConfig& cfg) {
    std::vector<int> all(dataset.cases.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return train_segmenter(dataset, all, cfg);
}

Volume predict_mask(const std::vector<const Segmenter*>& ensemble, const CaseRecord& record) {
    if (ensemble.empty()) throw std::invalid_argument("predict_mask: empty ensemble");
    for (const auto* s : ensemble) {
        if (s->modalities != ensemble.front()->modalities)
            throw std::invalid_argument("predict_mask: ensemble members disagree on modalities");
        if (static_cast<int>(s->modalities.size()) != s->fcn.in_channels)
            throw std::invalid_argument("predict_mask: checkpoint descriptor modality count mismatch");
    }

    PreparedSegCase pc = prepare_case(record, ensemble.front()->modalities, false);
    const Volume& ref = pc.channels.front();
    const int X = ref.dims[0], Y = ref.dims[1], Z = ref.dims[2];
    const int n_ch = static_cast<int>(pc.channels.size());

    Volume out(X, Y, Z, VoxelType::I16);
    out.spacing = ref.spacing;
    out.origin = ref.origin;

    std::vector<nn::OctFcn> nets;
    nets.reserve(ensemble.size());
    for (const auto* s : ensemble) nets.push_back(s->net);

    std::vector<double> probs(static_cast<std::size_t>(4) * Y * X);
    for (int z = 0; z < Z; ++z) {
        Tensor x({1, n_ch, Y, X});
        for (int c = 0; c < n_ch; ++c) copy_slice(pc.channels[c], z, x.data() + static_cast<std::size_t>(c) * Y * X);

        std::fill(probs.begin(), probs.end(), 0.0);
        for (auto& net : nets) {
            Tensor logits = net.forward(x, /*train=*/false);
            for (int y = 0; y < Y; ++y)
                for (int xx = 0; xx < X; ++xx) {
                    double zmax = -1e300;
                    for (int c = 0; c < 4; ++c) zmax = std::max(zmax, logits.at(0, c, y, xx));
                    double denom = 0.0;
                    double e[4];
                    for (int c = 0; c < 4; ++c) {
                        e[c] = std::exp(logits.at(0, c, y, xx) - zmax);
                        denom += e[c];
                    }
                    for (int c = 0; c < 4; ++c)
                        probs[(static_cast<std::size_t>(c) * Y + y) * X + xx] += e[c] / denom;
                }
        }
        for (int y = 0; y < Y; ++y)
            for (int xx = 0; xx < X; ++xx) {
                int best = 0;
                for (int c = 1; c < 4; ++c)
                    if (probs[(static_cast<std::size_t>(c) * Y + y) * X + xx] >
                        probs[(static_cast<std::size_t>(best) * Y + y) * X + xx])
                        best = c;
                out.at(xx, y, z) = kLabels[best];
            }
    }
    return out;
}

Volume predict_mask(const Segmenter& segmenter, const CaseRecord& record) {
    return predict_mask(std::vector<const Segmenter*>{&segmenter}, record);
}

void save_segmenter(const Segmenter& s, const std::string& path) {
    nlohmann::json desc;
    desc["kind"] = "segmenter";
    desc["fcn"] = {{"in_channels", s.fcn.in_channels}, {"out_channels", s.fcn.out_channels},
                   {"depth", s.fcn.depth},             {"base_channels", s.fcn.base_channels},
                   {"alpha", s.fcn.alpha},             {"se_reduction", s.fcn.se_reduction}};
    desc["modalities"] = s.modalities;
    nn::OctFcn& net = const_cast<nn::OctFcn&>(s.net);
    nn::save_checkpoint(path, desc, net.state());
}

Segmenter load_segmenter(const std::string& path) {
    nn::Checkpoint ckpt = nn::load_checkpoint(path);
    if (ckpt.descriptor.value("kind", "") != "segmenter")
        throw std::runtime_error("load_segmenter: checkpoint kind is not 'segmenter'");
    Segmenter s;
    const auto& f = ckpt.descriptor.at("fcn");
    s.fcn = nn::FcnConfig{f.at("in_channels").get<int>(), f.at("out_channels").get<int>(), f.at("depth").get<int>(),
                          f.at("base_channels").get<int>(), f.at("alpha").get<double>(),
                          f.at("se_reduction").get<int>()};
    s.modalities = ckpt.descriptor.at("modalities").get<std::vector<std::string>>();
    s.net = nn::OctFcn(s.fcn);
    nn::load_into_state(ckpt, s.net.state());
    return s;
}

CrossValResult cross_validate_segmentation(const Dataset& dataset, int k, const SegTrainConfig& cfg) {
    const int n = static_cast<int>(dataset.cases.size());
    if (k < 2) throw std::invalid_argument("cross_validate_segmentation: k must be >= 2");
    if (n < k) throw std::invalid_argument("cross_validate_segmentation: fewer cases than folds");

    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[i] = i;
    Rng rng(cfg.seed);
    rng.shuffle(order);
    std::vector<std::vector<int>> folds(static_cast<std::size_t>(k));
    for (int i = 0; i < n; ++i) folds[i % k].push_back(order[i]);

    CrossValResult res;
    for (int f = 0; f < k; ++f) {
        std::vector<int> train_idx;
        for (int g = 0; g < k; ++g)
            if (g != f) train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());

        auto trained = train_segmenter(dataset, train_idx, cfg);

        FoldReport report;
        report.fold = f;
        double det = 0, dwt = 0, dtc = 0;
        for (int idx : folds[f]) {
            const CaseRecord& rec = dataset.cases[idx];
            report.validation_ids.push_back(rec.id);
            Volume pred = predict_mask(trained.segmenter, rec);
            auto scores = evaluate_regions(pred, *rec.mask);
            det += scores["ET"].dice;
            dwt += scores["WT"].dice;
            dtc += scores["TC"].dice;
        }
        const double m = static_cast<double>(folds[f].size());
        report.dice_et = det / m;
        report.dice_wt = dwt / m;
        report.dice_tc = dtc / m;
        res.folds.push_back(report);
        res.ensemble.members.push_back(std::move(trained.segmenter));
    }
    return res;
}

std::vector<AblationRow> modality_ablation(const Dataset& dataset,
                                           const std::vector<std::vector<std::string>>& subsets,
                                           const SegTrainConfig& cfg, double holdout_fraction) {
    if (subsets.empty()) throw std::invalid_argument("modality_ablation: no subsets");
    for (const auto& s : subsets)
        if (s.empty()) throw std::invalid_argument("modality_ablation: empty modality subset");

    const int n = static_cast<int>(dataset.cases.size());
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[i] = i;
    Rng rng(cfg.seed);
    rng.shuffle(order);
    int n_holdout = std::max(1, static_cast<int>(std::lround(holdout_fraction * n)));
    n_holdout = std::min(n_holdout, n - 1);
    std::vector<int> val_idx(order.begin(), order.begin() + n_holdout);
    std::vector<int> train_idx(order.begin() + n_holdout, order.end());

    std::vector<AblationRow> rows;
    for (const auto& subset : subsets) {
        SegTrainConfig sub_cfg = cfg;  // identical budget and seed per row
        sub_cfg.modalities = subset;
        auto trained = train_segmenter(dataset, train_idx, sub_cfg);

        AblationRow row;
        row.modalities = subset;
        for (int idx : val_idx) {
            const CaseRecord& rec = dataset.cases[idx];
            Volume pred = predict_mask(trained.segmenter, rec);
            auto scores = evaluate_regions(pred, *rec.mask);
            row.dice_et += scores["ET"].dice / val_idx.size();
            row.dice_wt += scores["WT"].dice / val_idx.size();
            row.dice_tc += scores["TC"].dice / val_idx.size();
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace octorad::seg
