#pragma once

#include <functional>
#include <optional>
#include <string>

#include "shelab/noise.hpp"
#include "shelab/spectral.hpp"

namespace shelab {

/// Pointwise drift b(u). Either affine b1*u + c, or a named bounded map with
/// a declared Lipschitz constant (scaled: b(u) = scale * base(u)).
struct Drift {
    enum class Kind { Affine, Named };
    enum class Name { Sin, Tanh, Cos };

    Kind kind = Kind::Affine;
    double b1 = 0.0;
    double c = 0.0;
    Name name = Name::Sin;
    double scale = 1.0;

    static Drift affine(double b1, double c) {
        Drift d;
        d.kind = Kind::Affine;
        d.b1 = b1;
        d.c = c;
        return d;
    }
    static Drift named(Name n, double scale = 1.0) {
        Drift d;
        d.kind = Kind::Named;
        d.name = n;
        d.scale = scale;
        return d;
    }
    static Drift zero() { return affine(0.0, 0.0); }
    static Drift named_by_tag(const std::string& tag, double scale = 1.0);

    bool is_zero() const { return kind == Kind::Affine && b1 == 0.0 && c == 0.0; }
    bool is_affine() const { return kind == Kind::Affine; }
    /// |b|_1 = sup |b'|.
    double lipschitz() const;
    double operator()(double u) const;
    void apply(std::span<const double> in, std::span<double> out) const;
    std::string tag() const;
};

/// Initial datum as a pointwise map on [0,1].
struct InitialDatum {
    std::string name = "zero";
    std::function<double(double)> fn = [](double) { return 0.0; };

    static InitialDatum named(const std::string& tag);
    static InitialDatum custom(std::string label, std::function<double(double)> f) {
        return InitialDatum{std::move(label), std::move(f)};
    }
};

struct ModelSpec {
    Drift drift;
    double sigma = 1.0;
    InitialDatum u0 = InitialDatum::named("zero");
    BoundaryCondition bc = BoundaryCondition::Neumann;
};

struct SchemeConfig {
    double T = 1.0;
    long N = 64;             // delta = T / N
    int K = 255;             // mode truncation
    int M = 1024;            // collocation grid
    int ref_refinement = 6;  // reference step = delta / 2^m
    bool strict = true;      // enforce the theorem's step bound

    double delta() const { return T / double(N); }
    /// Validates shapes and, in strict mode, delta < T/12 and
    /// delta < log(3/2)/(4 |b|_1).
    void validate(const ModelSpec& model) const;
};

struct GaussianLaw {
    double mean = 0.0;
    double variance = 0.0; // > 0

    void validate() const {
        if (!(variance > 0.0) || !std::isfinite(variance) || !std::isfinite(mean))
            throw std::domain_error("GaussianLaw: variance must be positive");
    }
};

/// One step of the perturbed dynamics in eigencoordinates:
///   a_k <- e^{-lambda_k d} a_k + d phi(lambda_k d) bhat_k + sigma xi_k,
/// with bhat = project_drift(b, state, M) frozen at the step start.
ModeVector step_perturbed(const ModeVector& state, const ModelSpec& model,
                          double delta, std::span<const double> xi, int M);

/// Initial coefficients: analyze of the pointwise initial datum on the grid.
ModeVector initial_modes(const ModelSpec& model, int K, int M);

/// Terminal coefficients of u^delta(T, .) after N steps driven by
/// sample_increments(master_seed, path_index, .).
ModeVector simulate_terminal_modes(const ModelSpec& model, const SchemeConfig& config,
                                   std::uint64_t master_seed, std::uint64_t path_index);

/// All steps of the one-step map from the initial datum, consuming an
/// explicit increment tensor (step size and count from the tensor's plan).
ModeVector evolve_with_tensor(const ModelSpec& model, int M, const NoiseTensor& tensor);

/// Terminal state on the collocation grid.
GridFunction simulate_path(const ModelSpec& model, const SchemeConfig& config,
                           std::uint64_t master_seed, std::uint64_t path_index);

/// Coarse/fine pair on one Brownian sheet: the fine tensor (step delta/2^m)
/// is generated first and the coarse run consumes its exact aggregation.
struct CoupledTerminal {
    ModeVector coarse; // u^delta(T, .)
    ModeVector fine;   // reference proxy for u(T, .)
};
CoupledTerminal simulate_coupled_terminal(const ModelSpec& model,
                                          const SchemeConfig& config,
                                          std::uint64_t master_seed,
                                          std::uint64_t path_index);

/// Fine-step reference proxy for u(T, .) on the grid.
GridFunction simulate_reference(const ModelSpec& model, const SchemeConfig& config,
                                std::uint64_t master_seed, std::uint64_t path_index);

/// Exact Gaussian law of u(T,x) for affine drift, assembled mode-wise from
/// the per-mode linear SDE solution with a closed-form tail (no grid, no
/// mode cutoff beyond machine precision).
GaussianLaw affine_exact_law(const ModelSpec& model, double T, double x);

/// Exact Gaussian law of u^delta(T,x) for affine drift via per-mode
/// deterministic mean/variance recursions at the configured truncation.
GaussianLaw affine_perturbed_law(const ModelSpec& model, const SchemeConfig& config,
                                 double x);

} // namespace shelab
