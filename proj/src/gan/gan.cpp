#include "octorad/gan/gan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "octorad/io/normalize.hpp"
#include "octorad/nn/optim.hpp"

namespace octorad::gan {

namespace {

constexpr double kProbEps = 1e-7;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

double clamp_prob(double p) { return std::min(std::max(p, kProbEps), 1.0 - kProbEps); }

// mean BCE of a probability map against a constant 0/1 target
double bce_mean(const Tensor& p, double target) {
    double s = 0.0;
    for (std::int64_t i = 0; i < p.numel(); ++i) {
        const double q = clamp_prob(p[i]);
        s += target > 0.5 ? -std::log(q) : -std::log(1.0 - q);
    }
    return s / static_cast<double>(p.numel());
}

Tensor bce_grad(const Tensor& p, double target, double scale) {
    Tensor g(p.shape());
    const double inv_n = scale / static_cast<double>(p.numel());
    for (std::int64_t i = 0; i < p.numel(); ++i) {
        const double q = clamp_prob(p[i]);
        g[i] = target > 0.5 ? -inv_n / q : inv_n / (1.0 - q);
    }
    return g;
}

double l1_mean(const Tensor& a, const Tensor& b) {
    double s = 0.0;
    for (std::int64_t i = 0; i < a.numel(); ++i) s += std::abs(a[i] - b[i]);
    return s / static_cast<double>(a.numel());
}

Tensor l1_grad(const Tensor& a, const Tensor& b, double scale) {
    Tensor g(a.shape());
    const double inv_n = scale / static_cast<double>(a.numel());
    for (std::int64_t i = 0; i < a.numel(); ++i) {
        const double d = a[i] - b[i];
        g[i] = d > 0 ? inv_n : d < 0 ? -inv_n : 0.0;
    }
    return g;
}

struct PreparedCase {
    std::string id;
    std::map<std::string, Volume> normalized;
    std::vector<int> usable_z;  // slices with nonzero support in every source
};

void copy_slice(const Volume& vol, int z, double* dst) {
    const int X = vol.dims[0], Y = vol.dims[1];
    for (int y = 0; y < Y; ++y)
        for (int x = 0; x < X; ++x) dst[y * X + x] = vol.at(x, y, z);
}

PreparedCase prepare_case(const CaseRecord& rec, const SynthesisTask& task, bool need_target) {
    PreparedCase pc;
    pc.id = rec.id;
    std::vector<std::string> wanted = task.sources;
    if (need_target) wanted.push_back(task.target);
    for (const auto& name : wanted) {
        auto it = rec.modalities.find(name);
        if (it == rec.modalities.end())
            throw std::runtime_error("case " + rec.id + ": modality '" + name + "' required by the synthesis task");
        pc.normalized[name] = normalize_intensity(it->second.volume).volume;
    }
    const Volume& ref = pc.normalized.at(task.sources.front());
    for (int z = 0; z < ref.dims[2]; ++z) {
        bool any = false;
        for (int y = 0; y < ref.dims[1] && !any; ++y)
            for (int x = 0; x < ref.dims[0] && !any; ++x)
                if (ref.at(x, y, z) != 0.0) any = true;
        if (any) pc.usable_z.push_back(z);
    }
    if (pc.usable_z.empty())
        for (int z = 0; z < ref.dims[2]; ++z) pc.usable_z.push_back(z);
    return pc;
}

}  // namespace

void SynthesisTask::validate() const {
    if (sources.empty()) throw std::invalid_argument("SynthesisTask: needs at least one source modality");
    if (target.empty()) throw std::invalid_argument("SynthesisTask: empty target modality");
    if (noise_channels < 0) throw std::invalid_argument("SynthesisTask: negative noise channels");
    for (const auto& s : sources)
        if (s == target) throw std::invalid_argument("SynthesisTask: target '" + target + "' also listed as source");
}

GanLossValue gan_loss(const GanObjective& objective, const Tensor& d_real, const Tensor& d_fake, const Tensor& fake,
                      const Tensor& target) {
    if (objective.lambda < 0) throw std::invalid_argument("gan_loss: lambda must be nonnegative");
    check_same_shape(fake, target, "gan_loss");
    GanLossValue v;
    v.adversarial = bce_mean(d_fake, 1.0);
    v.l1 = l1_mean(fake, target);
    v.g_loss = v.adversarial + objective.lambda * v.l1;
    v.d_loss = 0.5 * (bce_mean(d_real, 1.0) + bce_mean(d_fake, 0.0));
    return v;
}

double psnr(const Tensor& a, const Tensor& b, double peak) {
    check_same_shape(a, b, "psnr");
    if (peak <= 0) throw std::invalid_argument("psnr: peak must be positive");
    double mse = 0.0;
    for (std::int64_t i = 0; i < a.numel(); ++i) mse += (a[i] - b[i]) * (a[i] - b[i]);
    mse /= static_cast<double>(a.numel());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

double psnr(const Volume& a, const Volume& b, double peak) {
    if (a.dims != b.dims) throw std::invalid_argument("psnr: volume grid mismatch");
    if (peak <= 0) throw std::invalid_argument("psnr: peak must be positive");
    double mse = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) mse += (a.voxels[i] - b.voxels[i]) * (a.voxels[i] - b.voxels[i]);
    mse /= static_cast<double>(a.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

Volume Synthesizer::synthesize_volume(const CaseRecord& record) const {
    PreparedCase pc = prepare_case(record, task, /*need_target=*/false);
    const Volume& ref = pc.normalized.at(task.sources.front());
    const int X = ref.dims[0], Y = ref.dims[1], Z = ref.dims[2];
    const int n_src = static_cast<int>(task.sources.size());

    Volume out(X, Y, Z, VoxelType::F32);
    out.spacing = ref.spacing;
    out.origin = ref.origin;

    // evaluation-mode synthesis stays deterministic: noise is seeded per slice
    nn::OctFcn net_copy = net;  // forward caches stay local
    for (int z = 0; z < Z; ++z) {
        Tensor x({1, n_src + task.noise_channels, Y, X});
        for (int s = 0; s < n_src; ++s)
            copy_slice(pc.normalized.at(task.sources[s]), z, x.data() + static_cast<std::size_t>(s) * Y * X);
        Rng noise(fnv1a(record.id) ^ (0xabcd1234ull + static_cast<std::uint64_t>(z)));
        for (int c = 0; c < task.noise_channels; ++c) {
            double* np = x.data() + (static_cast<std::size_t>(n_src) + c) * Y * X;
            for (int i = 0; i < Y * X; ++i) np[i] = noise.normal();
        }
        Tensor y = net_copy.forward(x, /*train=*/false);
        for (int yy = 0; yy < Y; ++yy)
            for (int xx = 0; xx < X; ++xx) out.at(xx, yy, z) = y.at(0, 0, yy, xx);
    }
    return out;
}

GanTrainResult train_synthesizer(const SynthesisTask& task, const Dataset& dataset, const GanTrainConfig& cfg,
                                 const GanObjective& objective) {
    task.validate();
    if (dataset.cases.empty()) throw std::invalid_argument("train_synthesizer: empty dataset");
    if (cfg.batch < 1) throw std::invalid_argument("train_synthesizer: batch must be >= 1");

    std::vector<PreparedCase> prepared;
    prepared.reserve(dataset.cases.size());
    for (const auto& rec : dataset.cases) prepared.push_back(prepare_case(rec, task, /*need_target=*/true));

    Rng rng(cfg.seed);

    // case-level holdout split
    std::vector<int> order(prepared.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    rng.shuffle(order);
    int n_holdout = static_cast<int>(std::lround(cfg.holdout_fraction * static_cast<double>(prepared.size())));
    if (prepared.size() == 1) n_holdout = 0;
    n_holdout = std::min<int>(n_holdout, static_cast<int>(prepared.size()) - 1);
    std::vector<int> holdout(order.begin(), order.begin() + n_holdout);
    std::vector<int> train(order.begin() + n_holdout, order.end());

    const Volume& ref = prepared.front().normalized.at(task.sources.front());
    const int X = ref.dims[0], Y = ref.dims[1];
    const int n_src = static_cast<int>(task.sources.size());

    GanTrainResult result;
    result.generator.task = task;
    result.generator.fcn = nn::FcnConfig{n_src + task.noise_channels, 1, cfg.g_depth, cfg.g_base, cfg.g_alpha,
                                         cfg.g_se_reduction};
    result.generator.net = nn::OctFcn(result.generator.fcn);
    nn::PlainEncDecConfig dcfg;
    dcfg.in_channels = n_src + 1;
    dcfg.out_channels = 1;
    dcfg.depth = cfg.d_depth;
    dcfg.base_channels = cfg.d_base;
    result.discriminator = nn::PlainEncDec(dcfg);

    Rng init_rng = rng.fork(0x171f);
    result.generator.net.init(init_rng);
    result.discriminator.init(init_rng);
    for (int h : holdout) result.holdout_ids.push_back(prepared[h].id);

    nn::OctFcn& G = result.generator.net;
    nn::PlainEncDec& D = result.discriminator;

    nn::ParamList g_params, d_params;
    G.collect(g_params);
    D.collect(d_params);
    nn::Adam g_opt(g_params, {cfg.lr_g, cfg.beta1, cfg.beta2, 1e-8, cfg.weight_decay});
    nn::Adam d_opt(d_params, {cfg.lr_d, cfg.beta1, cfg.beta2, 1e-8, cfg.weight_decay});

    auto holdout_psnr = [&]() {
        if (holdout.empty()) return 0.0;
        double acc = 0.0;
        for (int h : holdout) {
            const CaseRecord* rec = dataset.find_case(prepared[h].id);
            Volume fake = result.generator.synthesize_volume(*rec);
            const Volume& want = prepared[h].normalized.at(task.target);
            acc += psnr(fake, want, 1.0);
        }
        return acc / static_cast<double>(holdout.size());
    };

    Rng sample_rng = rng.fork(0x5a3b);
    const int B = cfg.batch;

    for (int step = 0; step < cfg.steps; ++step) {
        Tensor src({B, n_src, Y, X});
        Tensor noise({B, task.noise_channels, Y, X});
        Tensor target({B, 1, Y, X});
        for (int b = 0; b < B; ++b) {
            const PreparedCase& pc = prepared[train[sample_rng.uniform_int(0, static_cast<int>(train.size()) - 1)]];
            const int z = pc.usable_z[sample_rng.uniform_int(0, static_cast<int>(pc.usable_z.size()) - 1)];
            for (int s = 0; s < n_src; ++s)
                copy_slice(pc.normalized.at(task.sources[s]), z,
                           src.data() + (static_cast<std::size_t>(b) * n_src + s) * Y * X);
            copy_slice(pc.normalized.at(task.target), z, target.data() + static_cast<std::size_t>(b) * Y * X);
            for (int c = 0; c < task.noise_channels; ++c) {
                double* np = noise.data() + (static_cast<std::size_t>(b) * task.noise_channels + c) * Y * X;
                for (int i = 0; i < Y * X; ++i) np[i] = sample_rng.normal();
            }
        }

        // --- generator step -------------------------------------------------
        g_opt.zero_grad();
        Tensor g_in = nn::concat_channels(src, noise);
        Tensor fake = G.forward(g_in, /*train=*/true);
        Tensor d_in_fake = nn::concat_channels(src, fake);
        Tensor d_fake = D.forward(d_in_fake, /*train=*/true);

        const double adv = bce_mean(d_fake, 1.0);
        const double l1 = l1_mean(fake, target);

        Tensor g_d = bce_grad(d_fake, 1.0, 1.0);
        Tensor g_d_in = D.backward(g_d);  // D grads polluted; zeroed before its own step
        Tensor g_src_unused, g_fake;
        nn::split_channels(g_d_in, n_src, g_src_unused, g_fake);
        Tensor l1g = l1_grad(fake, target, objective.lambda);
        for (std::int64_t i = 0; i < g_fake.numel(); ++i) g_fake[i] += l1g[i];
        G.backward(g_fake);
        g_opt.step();

        // --- discriminator step ---------------------------------------------
        d_opt.zero_grad();
        Tensor d_in_real = nn::concat_channels(src, target);
        Tensor d_real = D.forward(d_in_real, /*train=*/true);
        const double d_loss_real = bce_mean(d_real, 1.0);
        D.backward(bce_grad(d_real, 1.0, 0.5));

        Tensor d_fake2 = D.forward(d_in_fake, /*train=*/true);  // fake is detached by construction
        const double d_loss_fake = bce_mean(d_fake2, 0.0);
        D.backward(bce_grad(d_fake2, 0.0, 0.5));
        d_opt.step();

        CurvePoint pt;
        pt.step = step + 1;
        pt.g_loss = adv + objective.lambda * l1;
        pt.d_loss = 0.5 * (d_loss_real + d_loss_fake);
        pt.l1 = l1;
        if (!holdout.empty() && ((step + 1) % cfg.eval_interval == 0 || step + 1 == cfg.steps)) {
            pt.psnr_holdout = holdout_psnr();
            pt.has_psnr = true;
        }
        result.curve.push_back(pt);
    }
    return result;
}

void save_synthesizer(const Synthesizer& s, const std::string& path) {
    nlohmann::json desc;
    desc["kind"] = "synthesizer";
    desc["fcn"] = {{"in_channels", s.fcn.in_channels}, {"out_channels", s.fcn.out_channels},
                   {"depth", s.fcn.depth},             {"base_channels", s.fcn.base_channels},
                   {"alpha", s.fcn.alpha},             {"se_reduction", s.fcn.se_reduction}};
    desc["task"] = {{"sources", s.task.sources}, {"target", s.task.target}, {"noise_channels", s.task.noise_channels}};
    nn::OctFcn& net = const_cast<nn::OctFcn&>(s.net);
    nn::save_checkpoint(path, desc, net.state());
}

Synthesizer load_synthesizer(const std::string& path) {
    nn::Checkpoint ckpt = nn::load_checkpoint(path);
    if (ckpt.descriptor.value("kind", "") != "synthesizer")
        throw std::runtime_error("load_synthesizer: checkpoint kind is not 'synthesizer'");
    Synthesizer s;
    const auto& f = ckpt.descriptor.at("fcn");
    s.fcn = nn::FcnConfig{f.at("in_channels").get<int>(), f.at("out_channels").get<int>(), f.at("depth").get<int>(),
                          f.at("base_channels").get<int>(), f.at("alpha").get<double>(),
                          f.at("se_reduction").get<int>()};
    const auto& t = ckpt.descriptor.at("task");
    s.task.sources = t.at("sources").get<std::vector<std::string>>();
    s.task.target = t.at("target").get<std::string>();
    s.task.noise_channels = t.at("noise_channels").get<int>();
    s.net = nn::OctFcn(s.fcn);
    nn::load_into_state(ckpt, s.net.state());
    return s;
}

CaseRecord synthesize_missing(const CaseRecord& record, const std::vector<const Synthesizer*>& generators) {
    if (record.modalities.empty()) throw std::invalid_argument("synthesize_missing: case has no modalities");

    std::set<std::string> real;
    for (const auto& [name, img] : record.modalities)
        if (img.provenance == "real") real.insert(name);

    // which modalities does the full set contain? every generator target plus
    // everything already present
    std::set<std::string> universe(real.begin(), real.end());
    for (const auto& [name, img] : record.modalities) universe.insert(name);
    for (const auto* g : generators) universe.insert(g->task.target);

    CaseRecord out = record;
    std::vector<std::string> unfillable;
    for (const auto& want : universe) {
        if (out.modalities.count(want)) continue;
        const Synthesizer* best = nullptr;
        for (const auto* g : generators) {
            if (g->task.target != want) continue;
            bool ok = true;
            for (const auto& s : g->task.sources)
                if (!real.count(s)) ok = false;
            if (!ok) continue;
            if (!best || g->task.sources.size() > best->task.sources.size() ||
                (g->task.sources.size() == best->task.sources.size() && g->task.sources < best->task.sources))
                best = g;
        }
        if (!best) {
            unfillable.push_back(want);
            continue;
        }
        ModalityImage img;
        img.volume = best->synthesize_volume(record);
        img.provenance = "synthesized";
        out.modalities[want] = std::move(img);
    }
    if (!unfillable.empty()) {
        std::string msg = "synthesize_missing: no source combination covers:";
        for (const auto& m : unfillable) msg += " " + m;
        throw std::runtime_error(msg);
    }
    return out;
}

}  // namespace octorad::gan
