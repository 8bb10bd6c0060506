#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shelab/density.hpp"
#include "shelab/scheme.hpp"

namespace shelab {

enum class StudyMetric { WeakError, SupDensity, TV, StrongL2 };

const char* to_string(StudyMetric m);
StudyMetric metric_from_string(const std::string& s);

/// Scalar test function f applied to the terminal value.
struct TestFunction {
    enum class Kind { Tanh, Cos, GZeta };
    Kind kind = Kind::Tanh;
    double z = 0.0;    // GZeta center
    double zeta = 1.0; // GZeta variance

    double operator()(double u) const;
    std::string tag() const;
    static TestFunction parse(const std::string& spec);
};

struct LadderStudy {
    ModelSpec model;
    SchemeConfig scheme; // N is taken from the ladder per level
    double probe_x = 0.5;
    std::vector<long> ladder; // N values, at least 4 levels
    long paths_per_level = 10000;
    TestFunction f;
    StudyMetric metric = StudyMetric::WeakError;
    std::uint64_t master_seed = 1;
    int threads = 1;
    int grid_points = 1025;     // density grid resolution (raw grid)
    double zeta_override = 0.0; // 0 -> bandwidth_schedule(paths)
    bool coupled = true;        // shared Brownian sheet (variance reduction)

    std::uint64_t level_seed(std::size_t level) const {
        return master_seed + std::uint64_t(level);
    }
};

struct LevelResult {
    double delta = 0.0; // delta, or epsilon for the small-drift study
    long paths = 0;
    double error = 0.0;
    double std_error = 0.0;
    double raw_error = 0.0; // pre-Richardson grid value (density studies)
    double tv = 0.0;        // raw TV alongside the primary metric
    bool excluded = false;
    std::uint64_t seed = 0;
};

struct OrderEstimate {
    std::string status = "ok"; // "ok" or "inconclusive"
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
    std::vector<LevelResult> levels;
    int used_levels = 0;
};

/// Weighted least squares of log(error) on log(delta). Levels whose error is
/// not above 3x its standard error are excluded from the fit and flagged;
/// fewer than 3 usable points makes the estimate inconclusive.
OrderEstimate fit_order(std::vector<LevelResult> points);

/// |E[f(u^delta(T,x)) - f(u_ref(T,x))]| per ladder level with coupled noise,
/// then a log-log order fit.
OrderEstimate weak_error_study(const LadderStudy& study);

/// KDE-based sup-norm / TV distance between the coupled terminal samples per
/// level. The returned levels carry both metrics.
OrderEstimate density_error_study(const LadderStudy& study);

/// Fully deterministic affine study: distances between the exact Gaussian
/// laws of u(T,x) and u^delta(T,x) per level (no Monte Carlo).
OrderEstimate affine_density_study(const LadderStudy& study);

struct SmallDriftStudy {
    ModelSpec base_model; // named drift; the study scales it by epsilon
    SchemeConfig scheme;  // fixed N (fixed delta)
    double probe_x = 0.5;
    std::vector<double> eps_ladder;
    long paths_per_level = 10000;
    TestFunction f;
    std::uint64_t master_seed = 1;
    int threads = 1;
};

/// Weak error at fixed delta across the epsilon ladder; slope of log error
/// versus log epsilon.
OrderEstimate small_drift_study(const SmallDriftStudy& study);

struct AsymptoticsRow {
    double delta;
    double z;
    double value; // delta^{1/2} log q^delta_{delta,x}(z)
    double limit; // limiting parabola at z
};

struct AsymptoticsResult {
    std::vector<AsymptoticsRow> rows;
    std::vector<double> deltas;
    std::vector<double> max_rel_dev; // per delta, over z with nonzero limit
    double mu_limit = 0.0;           // u0(x)
};

/// One-step density asymptotics: the law of u^delta(delta,x) is Gaussian
/// with moments from the kernel integrals; tabulates the scaled log-density
/// against the limiting parabola. Deterministic.
AsymptoticsResult asymptotics_study(const ModelSpec& model, double x,
                                    const std::vector<double>& z_values,
                                    const std::vector<double>& delta_ladder,
                                    const KernelParams& params = {});

struct KernelChecksReport {
    double max_repr_diff = 0.0;      // image vs spectral over the random grid
    double max_neumann_mass_err = 0.0;
    double max_semigroup_resid = 0.0;
    double dirichlet_mass_min = 1.0; // over the grid; must stay in (0,1)
    double dirichlet_mass_max = 0.0;
    int grid_size = 0;
    std::uint64_t seed = 0;
};

/// Randomized kernel identity battery over t in [1e-4, 4], both BCs.
KernelChecksReport kernel_checks(std::uint64_t seed, int grid_size,
                                 const KernelParams& params = {});

} // namespace shelab
