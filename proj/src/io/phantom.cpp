#include "octorad/io/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "octorad/core/rng.hpp"

namespace octorad {

namespace {

struct Ellipsoid {
    std::array<double, 3> center;
    std::array<double, 3> radii;

    double q2(double x, double y, double z) const {
        const double dx = (x - center[0]) / radii[0];
        const double dy = (y - center[1]) / radii[1];
        const double dz = (z - center[2]) / radii[2];
        return dx * dx + dy * dy + dz * dz;
    }
};

// Smooth angular bump field in [-1,1], used to roughen the NCR surface.
struct BumpField {
    static constexpr int kWaves = 4;
    std::array<std::array<double, 3>, kWaves> dirs;
    std::array<double, kWaves> freq;
    std::array<double, kWaves> phase;

    static BumpField make(Rng& rng) {
        BumpField b;
        for (int k = 0; k < kWaves; ++k) {
            double n = 0.0;
            for (int a = 0; a < 3; ++a) {
                b.dirs[k][a] = rng.normal();
                n += b.dirs[k][a] * b.dirs[k][a];
            }
            n = std::sqrt(std::max(n, 1e-12));
            for (int a = 0; a < 3; ++a) b.dirs[k][a] /= n;
            b.freq[k] = rng.uniform(3.0, 6.0);
            b.phase[k] = rng.uniform(0.0, 6.28318530717958647692);
        }
        return b;
    }

    double eval(double ux, double uy, double uz) const {
        double s = 0.0;
        for (int k = 0; k < kWaves; ++k)
            s += std::cos(freq[k] * (ux * dirs[k][0] + uy * dirs[k][1] + uz * dirs[k][2]) + phase[k]);
        return s / kWaves;
    }
};

// Low-frequency multiplicative modulation shared by all modalities of a case.
struct SmoothField {
    static constexpr int kWaves = 3;
    std::array<std::array<double, 3>, kWaves> k;
    std::array<double, kWaves> phase;

    static SmoothField make(Rng& rng, int grid) {
        SmoothField f;
        for (int i = 0; i < kWaves; ++i) {
            for (int a = 0; a < 3; ++a) f.k[i][a] = rng.uniform(1.0, 2.5) * 6.28318530717958647692 / grid;
            f.phase[i] = rng.uniform(0.0, 6.28318530717958647692);
        }
        return f;
    }

    double eval(double x, double y, double z) const {
        double s = 0.0;
        for (int i = 0; i < kWaves; ++i) s += std::sin(k[i][0] * x + k[i][1] * y + k[i][2] * z + phase[i]);
        return s / kWaves;
    }
};

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

Dataset generate_phantom_dataset(const PhantomSpec& spec, int n_cases) {
    if (n_cases <= 0) throw std::invalid_argument("generate_phantom_dataset: n_cases must be positive");
    if (spec.grid < 16) throw std::invalid_argument("generate_phantom_dataset: grid too small");
    if (spec.wt_radius_min_frac <= 0 || spec.wt_radius_max_frac <= spec.wt_radius_min_frac)
        throw std::invalid_argument("generate_phantom_dataset: bad WT radius range");
    for (const auto& [name, tr] : spec.transfer) {
        (void)name;
        (void)tr;
    }
    if (spec.transfer.empty()) throw std::invalid_argument("generate_phantom_dataset: no modalities in transfer");

    const int n = spec.grid;
    const double cx = (n - 1) / 2.0;
    Dataset ds;

    ds.gene_names.reserve(static_cast<std::size_t>(spec.n_genes));
    for (int g = 0; g < spec.n_genes; ++g) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "g%04d", g + 1);
        ds.gene_names.push_back(buf);
    }
    for (int col : spec.planted_gene_cols)
        if (col < 0 || col >= spec.n_genes)
            throw std::invalid_argument("generate_phantom_dataset: planted gene column out of range");

    // per-gene background statistics, fixed for the whole cohort
    Rng cohort_rng = Rng(spec.seed).fork(0xc0110);
    std::vector<double> gene_mu(static_cast<std::size_t>(spec.n_genes));
    std::vector<double> gene_sigma(static_cast<std::size_t>(spec.n_genes));
    for (int g = 0; g < spec.n_genes; ++g) {
        gene_mu[g] = cohort_rng.uniform(-1.0, 1.0);
        gene_sigma[g] = cohort_rng.uniform(0.5, 1.5);
    }

    for (int ci = 0; ci < n_cases; ++ci) {
        Rng rng = Rng(spec.seed).fork(static_cast<std::uint64_t>(ci) + 1);
        CaseRecord rec;
        {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "case_%03d", ci);
            rec.id = buf;
        }

        const double head_r = spec.head_radius_frac * n;
        Ellipsoid head{{cx, cx, cx}, {head_r, head_r * rng.uniform(0.9, 1.0), head_r * rng.uniform(0.85, 1.0)}};

        const double wt_frac = rng.uniform(spec.wt_radius_min_frac, spec.wt_radius_max_frac);
        Ellipsoid wt;
        for (int a = 0; a < 3; ++a) wt.radii[a] = wt_frac * n * rng.uniform(0.8, 1.2);
        const double wt_rmax = *std::max_element(wt.radii.begin(), wt.radii.end());
        for (int a = 0; a < 3; ++a) {
            const double slack = std::max(1.0, head.radii[a] - wt_rmax - 2.0);
            wt.center[a] = cx + rng.uniform(-0.5, 0.5) * slack;
        }

        const double tc_frac = rng.uniform(spec.tc_frac_min, spec.tc_frac_max);
        Ellipsoid tc;
        tc.center = wt.center;
        for (int a = 0; a < 3; ++a) {
            tc.center[a] += rng.uniform(-0.08, 0.08) * wt.radii[a];
            tc.radii[a] = tc_frac * wt.radii[a];
        }

        const double rough = rng.uniform(0.0, spec.roughness_max);
        const double ncr_frac = rng.uniform(spec.ncr_frac_min, spec.ncr_frac_max);
        Ellipsoid ncr;
        ncr.center = tc.center;
        for (int a = 0; a < 3; ++a) ncr.radii[a] = ncr_frac * tc.radii[a];
        const BumpField bumps = BumpField::make(rng);
        // cap the perturbed radius so NCR stays strictly inside TC
        const double ncr_cap = 0.95 / ncr_frac;

        const SmoothField modulation = SmoothField::make(rng, n);

        Volume mask(n, n, n, VoxelType::I16);
        mask.spacing = spec.spacing;

        // tissue id per voxel: -1 air, 0 brain, 1 edema, 2 enhancing, 3 necrotic
        std::vector<signed char> tissue(mask.size(), -1);
        for (int z = 0; z < n; ++z)
            for (int y = 0; y < n; ++y)
                for (int x = 0; x < n; ++x) {
                    const std::size_t i = mask.index(x, y, z);
                    if (head.q2(x, y, z) > 1.0) continue;
                    signed char t = 0;
                    if (wt.q2(x, y, z) <= 1.0) {
                        t = 1;
                        if (tc.q2(x, y, z) <= 1.0) {
                            t = 2;
                            const double dxq = (x - ncr.center[0]) / ncr.radii[0];
                            const double dyq = (y - ncr.center[1]) / ncr.radii[1];
                            const double dzq = (z - ncr.center[2]) / ncr.radii[2];
                            const double q = std::sqrt(dxq * dxq + dyq * dyq + dzq * dzq);
                            if (q > 1e-9) {
                                const double b = bumps.eval(dxq / q, dyq / q, dzq / q);
                                const double limit = std::min(1.0 + rough * b, ncr_cap);
                                if (q <= limit) t = 3;
                            } else {
                                t = 3;
                            }
                        }
                    }
                    tissue[i] = t;
                    mask.voxels[i] = t == 1 ? 2.0 : t == 2 ? 4.0 : t == 3 ? 1.0 : 0.0;
                }

        // nesting check: ET and NCR inside TC inside WT holds by construction;
        // assert it anyway on the generated labels
        {
            std::size_t n_wt = 0, n_tc = 0;
            for (double v : mask.voxels) {
                const int l = static_cast<int>(v);
                if (l == 1 || l == 2 || l == 4) ++n_wt;
                if (l == 1 || l == 4) ++n_tc;
            }
            if (n_tc == 0 || n_wt <= n_tc)
                throw std::runtime_error("generate_phantom_dataset: degenerate tumor regions for " + rec.id);
        }

        Rng noise_rng = rng.fork(0x9015e);
        for (const auto& [name, tr] : spec.transfer) {
            Volume vol(n, n, n, VoxelType::F32);
            vol.spacing = spec.spacing;
            Rng modality_noise = noise_rng.fork(fnv1a(name));
            for (int z = 0; z < n; ++z)
                for (int y = 0; y < n; ++y)
                    for (int x = 0; x < n; ++x) {
                        const std::size_t i = vol.index(x, y, z);
                        const signed char t = tissue[i];
                        if (t < 0) continue;
                        const double base = tr[static_cast<int>(t)];
                        const double m = 1.0 + spec.modulation_amp * modulation.eval(x, y, z);
                        double v = base * m + spec.noise_sigma * modality_noise.normal();
                        vol.voxels[i] = std::max(v, 1e-4);  // keep head support nonzero
                    }
            rec.modalities[name] = ModalityImage{std::move(vol), "real"};
        }
        rec.mask = std::move(mask);

        // planted gene row and survival
        Rng gene_rng = rng.fork(0x9e9e5);
        std::array<double, 3> g{gene_rng.normal(), gene_rng.normal(), gene_rng.normal()};
        rec.gene_row.resize(static_cast<std::size_t>(spec.n_genes));
        for (int j = 0; j < spec.n_genes; ++j)
            rec.gene_row[j] = gene_mu[j] + gene_sigma[j] * gene_rng.normal();
        for (int k = 0; k < 3; ++k)
            rec.gene_row[spec.planted_gene_cols[k]] = g[k] + 0.05 * gene_rng.normal();

        const double wt_norm =
            (wt_frac - spec.wt_radius_min_frac) / (spec.wt_radius_max_frac - spec.wt_radius_min_frac);
        const double rough_norm = spec.roughness_max > 0 ? rough / spec.roughness_max : 0.0;

        double days = spec.survival_base + spec.survival_wt_coeff * wt_norm + spec.survival_rough_coeff * rough_norm;
        for (int k = 0; k < 3; ++k) days += spec.survival_gene_coeff[k] * g[k];
        days += spec.survival_noise * gene_rng.normal();
        days = std::max(days, 30.0);

        SurvivalRecord surv;
        surv.id = rec.id;
        surv.days = static_cast<int>(std::lround(days));
        surv.age = 35.0 + 40.0 * gene_rng.uniform();
        rec.survival = surv;

        rec.oracle_factors["wt_radius_norm"] = wt_norm;
        rec.oracle_factors["ncr_roughness_norm"] = rough_norm;
        rec.oracle_factors["g1"] = g[0];
        rec.oracle_factors["g2"] = g[1];
        rec.oracle_factors["g3"] = g[2];

        rec.validate();
        ds.cases.push_back(std::move(rec));
    }
    return ds;
}

}  // namespace octorad
