#include "shelab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "shelab/numerics.hpp"
#include "shelab/parallel.hpp"

namespace shelab {

const char* to_string(StudyMetric m) {
    switch (m) {
        case StudyMetric::WeakError: return "weak_error";
        case StudyMetric::SupDensity: return "sup_density";
        case StudyMetric::TV: return "tv";
        case StudyMetric::StrongL2: return "strong_l2";
    }
    return "?";
}

StudyMetric metric_from_string(const std::string& s) {
    if (s == "weak_error") return StudyMetric::WeakError;
    if (s == "sup_density") return StudyMetric::SupDensity;
    if (s == "tv") return StudyMetric::TV;
    if (s == "strong_l2") return StudyMetric::StrongL2;
    throw std::domain_error("unknown study metric '" + s + "'");
}

double TestFunction::operator()(double u) const {
    switch (kind) {
        case Kind::Tanh: return std::tanh(u);
        case Kind::Cos: return std::cos(u);
        case Kind::GZeta: return mollifier(zeta, u - z);
    }
    return 0.0;
}

std::string TestFunction::tag() const {
    switch (kind) {
        case Kind::Tanh: return "tanh";
        case Kind::Cos: return "cos";
        case Kind::GZeta: {
            std::ostringstream os;
            os << "gzeta(z=" << z << ",zeta=" << zeta << ")";
            return os.str();
        }
    }
    return "?";
}

TestFunction TestFunction::parse(const std::string& spec) {
    TestFunction f;
    if (spec == "tanh") {
        f.kind = Kind::Tanh;
        return f;
    }
    if (spec == "cos") {
        f.kind = Kind::Cos;
        return f;
    }
    if (spec.rfind("gzeta:", 0) == 0) {
        f.kind = Kind::GZeta;
        // format gzeta:<z>,<zeta>
        const std::string rest = spec.substr(6);
        const auto comma = rest.find(',');
        if (comma == std::string::npos)
            throw std::domain_error("test function: expected gzeta:<z>,<zeta>");
        f.z = std::stod(rest.substr(0, comma));
        f.zeta = std::stod(rest.substr(comma + 1));
        if (!(f.zeta > 0.0))
            throw std::domain_error("test function: gzeta needs zeta > 0");
        return f;
    }
    throw std::domain_error("unknown test function '" + spec + "'");
}

// ---------------------------------------------------------------------------
// order fitting
// ---------------------------------------------------------------------------

OrderEstimate fit_order(std::vector<LevelResult> points) {
    OrderEstimate est;
    for (auto& p : points) p.excluded = !(p.error > 3.0 * p.std_error);
    est.levels = points;

    std::vector<double> lx, ly, w;
    bool any_se_zero = false;
    for (const auto& p : points) {
        if (p.excluded) continue;
        if (!(p.error > 0.0)) continue;
        lx.push_back(std::log(p.delta));
        ly.push_back(std::log(p.error));
        if (p.std_error > 0.0)
            w.push_back(std::pow(p.error / p.std_error, 2));
        else
            any_se_zero = true;
    }
    est.used_levels = int(lx.size());
    if (lx.size() < 3) {
        est.status = "inconclusive";
        return est;
    }
    if (any_se_zero || w.size() != lx.size()) w.assign(lx.size(), 1.0);

    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sw += w[i];
        sx += w[i] * lx[i];
        sy += w[i] * ly[i];
        sxx += w[i] * lx[i] * lx[i];
        sxy += w[i] * lx[i] * ly[i];
    }
    const double det = sw * sxx - sx * sx;
    if (det == 0.0) {
        est.status = "inconclusive";
        return est;
    }
    est.slope = (sw * sxy - sx * sy) / det;
    est.intercept = (sxx * sy - sx * sxy) / det;
    double rss = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - est.slope * lx[i] - est.intercept;
        rss += w[i] * r * r;
    }
    est.residual = std::sqrt(rss / sw);
    return est;
}

// ---------------------------------------------------------------------------
// coupled estimators
// ---------------------------------------------------------------------------

namespace {

/// Per-path coupled terminal pair evaluated at the probe; slots are filled
/// in path order regardless of the thread schedule.
void run_coupled_paths(const ModelSpec& model, const SchemeConfig& config,
                       double probe_x, std::uint64_t seed, long n_paths,
                       int threads, bool coupled, std::vector<double>& coarse,
                       std::vector<double>& fine) {
    coarse.resize(n_paths);
    fine.resize(n_paths);
    parallel_chunks(std::size_t(n_paths), 64, threads,
                    [&](std::size_t, std::size_t begin, std::size_t end) {
                        for (std::size_t p = begin; p < end; ++p) {
                            if (coupled) {
                                const CoupledTerminal ct = simulate_coupled_terminal(
                                    model, config, seed, p);
                                coarse[p] = evaluate_at(ct.coarse, probe_x);
                                fine[p] = evaluate_at(ct.fine, probe_x);
                            } else {
                                // independent-noise mode: disjoint path-index
                                // streams for the two solutions
                                const ModeVector u_coarse = simulate_terminal_modes(
                                    model, config, seed, 2 * p);
                                SchemeConfig fine_cfg = config;
                                fine_cfg.N = config.N << config.ref_refinement;
                                const ModeVector u_fine = simulate_terminal_modes(
                                    model, fine_cfg, seed, 2 * p + 1);
                                coarse[p] = evaluate_at(u_coarse, probe_x);
                                fine[p] = evaluate_at(u_fine, probe_x);
                            }
                        }
                    });
}

struct MeanSe {
    double mean;
    double se;
};

MeanSe mean_and_se(std::span<const double> xs) {
    const SampleMoments m = sample_moments(xs);
    return {m.mean, std::sqrt(m.variance / double(m.n))};
}

} // namespace

OrderEstimate weak_error_study(const LadderStudy& study) {
    if (study.ladder.size() < 4)
        throw std::domain_error("weak_error_study: ladder needs >= 4 levels");
    if (study.metric != StudyMetric::WeakError && study.metric != StudyMetric::StrongL2)
        throw std::domain_error("weak_error_study: metric must be weak_error or strong_l2");
    std::vector<LevelResult> levels;
    std::vector<double> coarse, fine, diff;
    for (std::size_t li = 0; li < study.ladder.size(); ++li) {
        SchemeConfig config = study.scheme;
        config.N = study.ladder[li];
        const std::uint64_t seed = study.level_seed(li);
        run_coupled_paths(study.model, config, study.probe_x, seed,
                          study.paths_per_level, study.threads, study.coupled,
                          coarse, fine);
        diff.resize(coarse.size());
        LevelResult lr;
        lr.delta = config.delta();
        lr.paths = study.paths_per_level;
        lr.seed = seed;
        if (study.metric == StudyMetric::StrongL2) {
            // RMS of the coupled pathwise gap; delta-method standard error
            for (std::size_t p = 0; p < coarse.size(); ++p) {
                const double d = coarse[p] - fine[p];
                diff[p] = d * d;
            }
            const MeanSe ms = mean_and_se(diff);
            lr.error = std::sqrt(std::max(0.0, ms.mean));
            lr.std_error = lr.error > 0.0 ? ms.se / (2.0 * lr.error) : 0.0;
        } else {
            for (std::size_t p = 0; p < coarse.size(); ++p)
                diff[p] = study.f(coarse[p]) - study.f(fine[p]);
            const MeanSe ms = mean_and_se(diff);
            lr.error = std::abs(ms.mean);
            lr.std_error = ms.se;
        }
        levels.push_back(lr);
    }
    return fit_order(std::move(levels));
}

namespace {

struct DensityDistances {
    double sup_raw, sup_fine, tv_raw, tv_refined;
    double se_sup, se_tv;
};

/// Distances between the mollified sample densities on a common grid
/// evaluated at two resolutions (stride-2 subsampling gives the raw grid).
DensityDistances coupled_kde_distances(std::span<const double> xs,
                                       std::span<const double> ys, double zeta,
                                       int grid_points, int threads) {
    const SampleMoments mx = sample_moments(xs);
    const SampleMoments my = sample_moments(ys);
    const double sd = std::sqrt(std::max(mx.variance, my.variance) + zeta);
    const double lo = std::min(mx.mean, my.mean) - 8.0 * sd;
    const double hi = std::max(mx.mean, my.mean) + 8.0 * sd;
    const int fine_points = 2 * grid_points - 1;
    const auto grid = uniform_grid(0.5 * (lo + hi), 0.5 * (hi - lo), fine_points);

    SampleSet sx, sy;
    sx.values.assign(xs.begin(), xs.end());
    sy.values.assign(ys.begin(), ys.end());
    const DensityEstimate ka = kde(sx, zeta, grid, threads);
    const DensityEstimate kb = kde(sy, zeta, grid, threads);

    auto subsample = [&](const DensityEstimate& e) {
        DensityEstimate half;
        half.bandwidth = e.bandwidth;
        for (std::size_t i = 0; i < e.z_grid.size(); i += 2) {
            half.z_grid.push_back(e.z_grid[i]);
            half.values.push_back(e.values[i]);
        }
        return half;
    };
    const DensityEstimate ha = subsample(ka);
    const DensityEstimate hb = subsample(kb);

    DensityDistances d{};
    d.sup_raw = sup_distance(ha, hb);
    d.sup_fine = sup_distance(ka, kb);
    d.tv_raw = tv_distance(ha, hb);
    const double tv_fine = tv_distance(ka, kb);
    d.tv_refined = tv_fine + (tv_fine - d.tv_raw) / 3.0;

    // delta-method standard errors: project per-sample contributions onto
    // the argmax point (sup) and onto sgn(difference) (tv)
    std::size_t argmax = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < ka.values.size(); ++i) {
        const double v = std::abs(ka.values[i] - kb.values[i]);
        if (v > best) {
            best = v;
            argmax = i;
        }
    }
    const double n = double(xs.size());
    {
        const double z = ka.z_grid[argmax];
        Kahan s1, s2;
        for (std::size_t p = 0; p < xs.size(); ++p) {
            const double t = mollifier(zeta, z - xs[p]) - mollifier(zeta, z - ys[p]);
            s1.add(t);
            s2.add(t * t);
        }
        const double mean = s1.value() / n;
        const double var = std::max(0.0, s2.value() / n - mean * mean);
        d.se_sup = std::sqrt(var / n);
    }
    {
        // signed projection s_p = int sgn(D(z)) [g(z-X_p) - g(z-Y_p)] dz
        std::vector<double> sgn(ka.values.size());
        for (std::size_t i = 0; i < ka.values.size(); ++i)
            sgn[i] = ka.values[i] >= kb.values[i] ? 1.0 : -1.0;
        std::vector<double> contrib(xs.size());
        const double h = ka.z_grid[1] - ka.z_grid[0];
        parallel_chunks(xs.size(), 256, threads,
                        [&](std::size_t, std::size_t begin, std::size_t end) {
                            for (std::size_t p = begin; p < end; ++p) {
                                Kahan acc;
                                for (std::size_t i = 0; i < sgn.size(); ++i) {
                                    const double w =
                                        (i == 0 || i + 1 == sgn.size()) ? 0.5 : 1.0;
                                    acc.add(w * sgn[i] *
                                            (mollifier(zeta, ka.z_grid[i] - xs[p]) -
                                             mollifier(zeta, ka.z_grid[i] - ys[p])));
                                }
                                contrib[p] = h * acc.value();
                            }
                        });
        const SampleMoments mc = sample_moments(contrib);
        d.se_tv = std::sqrt(mc.variance / n);
    }
    return d;
}

} // namespace

OrderEstimate density_error_study(const LadderStudy& study) {
    if (study.metric != StudyMetric::SupDensity && study.metric != StudyMetric::TV)
        throw std::domain_error("density_error_study: metric must be sup_density or tv");
    if (study.ladder.size() < 4)
        throw std::domain_error("density_error_study: ladder needs >= 4 levels");
    const double zeta = study.zeta_override > 0.0
                            ? study.zeta_override
                            : bandwidth_schedule(std::size_t(study.paths_per_level));
    std::vector<LevelResult> levels;
    std::vector<double> coarse, fine;
    for (std::size_t li = 0; li < study.ladder.size(); ++li) {
        SchemeConfig config = study.scheme;
        config.N = study.ladder[li];
        const std::uint64_t seed = study.level_seed(li);
        run_coupled_paths(study.model, config, study.probe_x, seed,
                          study.paths_per_level, study.threads, study.coupled,
                          coarse, fine);
        const DensityDistances d = coupled_kde_distances(
            coarse, fine, zeta, study.grid_points, study.threads);
        LevelResult lr;
        lr.delta = config.delta();
        lr.paths = study.paths_per_level;
        lr.seed = seed;
        lr.tv = d.tv_refined;
        if (study.metric == StudyMetric::SupDensity) {
            lr.error = d.sup_fine;
            lr.raw_error = d.sup_raw;
            lr.std_error = d.se_sup;
        } else {
            lr.error = d.tv_refined;
            lr.raw_error = d.tv_raw;
            lr.std_error = d.se_tv;
        }
        levels.push_back(lr);
    }
    return fit_order(std::move(levels));
}

OrderEstimate affine_density_study(const LadderStudy& study) {
    if (!study.model.drift.is_affine())
        throw std::domain_error("affine_density_study: drift must be affine");
    if (study.ladder.size() < 4)
        throw std::domain_error("affine_density_study: ladder needs >= 4 levels");
    const GaussianLaw exact =
        affine_exact_law(study.model, study.scheme.T, study.probe_x);

    std::vector<LevelResult> levels;
    for (std::size_t li = 0; li < study.ladder.size(); ++li) {
        SchemeConfig config = study.scheme;
        config.N = study.ladder[li];
        const GaussianLaw pert = affine_perturbed_law(study.model, config, study.probe_x);

        const double sd = std::sqrt(std::max(exact.variance, pert.variance));
        const double lo = std::min(exact.mean, pert.mean) - 8.0 * sd;
        const double hi = std::max(exact.mean, pert.mean) + 8.0 * sd;
        const int fine_points = 2 * study.grid_points - 1;
        const auto grid =
            uniform_grid(0.5 * (lo + hi), 0.5 * (hi - lo), fine_points);
        const DensityEstimate da = gaussian_density(exact, grid);
        const DensityEstimate db = gaussian_density(pert, grid);

        DensityEstimate ha, hb;
        for (std::size_t i = 0; i < grid.size(); i += 2) {
            ha.z_grid.push_back(da.z_grid[i]);
            ha.values.push_back(da.values[i]);
            hb.z_grid.push_back(db.z_grid[i]);
            hb.values.push_back(db.values[i]);
        }

        LevelResult lr;
        lr.delta = config.delta();
        lr.paths = 0;
        lr.seed = 0;
        const double tv_fine = tv_distance(da, db);
        lr.tv = tv_fine + (tv_fine - tv_distance(ha, hb)) / 3.0;
        if (study.metric == StudyMetric::TV) {
            lr.error = lr.tv;
            lr.raw_error = tv_distance(ha, hb);
        } else {
            lr.error = sup_distance(da, db);
            lr.raw_error = sup_distance(ha, hb);
        }
        lr.std_error = 0.0;
        levels.push_back(lr);
    }
    return fit_order(std::move(levels));
}

OrderEstimate small_drift_study(const SmallDriftStudy& study) {
    if (study.base_model.drift.is_affine())
        throw std::domain_error("small_drift_study: base drift must be a named map");
    if (study.eps_ladder.size() < 3)
        throw std::domain_error("small_drift_study: need >= 3 epsilon levels");
    std::vector<LevelResult> levels;
    std::vector<double> coarse, fine, diff;
    for (std::size_t j = 0; j < study.eps_ladder.size(); ++j) {
        const double eps = study.eps_ladder[j];
        ModelSpec model = study.base_model;
        model.drift.scale = eps;
        const std::uint64_t seed = study.master_seed + std::uint64_t(j);
        run_coupled_paths(model, study.scheme, study.probe_x, seed,
                          study.paths_per_level, study.threads, true, coarse, fine);
        diff.resize(coarse.size());
        for (std::size_t p = 0; p < coarse.size(); ++p)
            diff[p] = study.f(coarse[p]) - study.f(fine[p]);
        const MeanSe ms = mean_and_se(diff);
        LevelResult lr;
        lr.delta = eps; // the ladder variable is epsilon here
        lr.paths = study.paths_per_level;
        lr.error = std::abs(ms.mean);
        lr.std_error = ms.se;
        lr.seed = seed;
        levels.push_back(lr);
    }
    return fit_order(std::move(levels));
}

AsymptoticsResult asymptotics_study(const ModelSpec& model, double x,
                                    const std::vector<double>& z_values,
                                    const std::vector<double>& delta_ladder,
                                    const KernelParams& params) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("asymptotics_study: x must lie in [0,1]");
    if (model.bc == BoundaryCondition::Dirichlet && (x == 0.0 || x == 1.0))
        throw std::domain_error(
            "asymptotics_study: Dirichlet law degenerates at the boundary");
    if (model.sigma == 0.0)
        throw std::domain_error("asymptotics_study: sigma must be nonzero");

    const double interior = x > 0.0 && x < 1.0 ? 1.0 : 0.0;
    const double factor = model.bc == BoundaryCondition::Neumann
                              ? 1.0 + interior
                              : 2.0;
    const double sig2 = model.sigma * model.sigma;
    const double u0x = model.u0.fn(x);

    // one-step moments: mean from the decayed datum plus the frozen drift,
    // variance from the squared-kernel time integral
    const int K_asym = 1023, M_asym = 2048;
    const ModeVector u0_modes = initial_modes(model, K_asym, M_asym);
    const ModeVector b_modes =
        project_drift([&](double u) { return model.drift(u); }, u0_modes, M_asym);

    AsymptoticsResult result;
    result.mu_limit = u0x;
    const int k_base = model.bc == BoundaryCondition::Neumann ? 0 : 1;
    for (double delta : delta_ladder) {
        if (!(delta > 0.0))
            throw std::domain_error("asymptotics_study: delta must be positive");
        const double nu = sig2 * green_sq_time_integral(model.bc, delta, x, params);
        Kahan mu_acc;
        for (std::size_t i = 0; i < u0_modes.coeffs.size(); ++i) {
            const double lambda = eigenvalue(k_base + int(i));
            const double e = eigenfunction(model.bc, k_base + int(i), x);
            mu_acc.add(std::exp(-lambda * delta) * u0_modes.coeffs[i] * e);
            mu_acc.add(delta * phi1(lambda * delta) * b_modes.coeffs[i] * e);
        }
        const double mu = mu_acc.value();

        double worst = 0.0;
        for (double z : z_values) {
            const double value =
                std::sqrt(delta) *
                (-0.5 * std::log(2.0 * kPi * nu) - (z - mu) * (z - mu) / (2.0 * nu));
            const double limit =
                -std::sqrt(2.0 * kPi) / (4.0 * sig2) * factor * (z - u0x) * (z - u0x);
            result.rows.push_back({delta, z, value, limit});
            if (limit != 0.0)
                worst = std::max(worst, std::abs(value - limit) / std::abs(limit));
        }
        result.deltas.push_back(delta);
        result.max_rel_dev.push_back(worst);
    }
    return result;
}

KernelChecksReport kernel_checks(std::uint64_t seed, int grid_size,
                                 const KernelParams& params) {
    KernelChecksReport report;
    report.grid_size = grid_size;
    report.seed = seed;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(std::log(1e-4), std::log(4.0));
    std::uniform_real_distribution<double> ux(0.0, 1.0);
    std::uniform_real_distribution<double> um(0.05, 0.95);
    for (int i = 0; i < grid_size; ++i) {
        const double t = std::exp(ut(rng));
        const KernelPoint p{t, ux(rng), ux(rng)};
        for (auto bc : {BoundaryCondition::Neumann, BoundaryCondition::Dirichlet}) {
            const double a = green_eval(bc, p, params, KernelRepr::ImageSum);
            const double b = green_eval(bc, p, params, KernelRepr::Spectral);
            report.max_repr_diff = std::max(report.max_repr_diff, std::abs(a - b));
        }
        const double xm = um(rng);
        report.max_neumann_mass_err =
            std::max(report.max_neumann_mass_err,
                     std::abs(green_mass(BoundaryCondition::Neumann, t, xm, params) - 1.0));
        const double dm = green_mass(BoundaryCondition::Dirichlet, t, xm, params);
        report.dirichlet_mass_min = std::min(report.dirichlet_mass_min, dm);
        report.dirichlet_mass_max = std::max(report.dirichlet_mass_max, dm);
        // semigroup residual on a compatible random split
        const double s = 0.5 * t;
        for (auto bc : {BoundaryCondition::Neumann, BoundaryCondition::Dirichlet}) {
            const double conv = green_convolve(bc, s, t - s, p.x, p.y, params);
            const double direct = green_eval(bc, p, params);
            report.max_semigroup_resid =
                std::max(report.max_semigroup_resid, std::abs(conv - direct));
        }
    }
    return report;
}

} // namespace shelab
