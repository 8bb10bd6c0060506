#include "shelab/scheme.hpp"

#include <cmath>
#include <sstream>

#include "shelab/numerics.hpp"

namespace shelab {

Drift Drift::named_by_tag(const std::string& tag, double scale) {
    if (tag == "sin") return named(Name::Sin, scale);
    if (tag == "tanh") return named(Name::Tanh, scale);
    if (tag == "cos") return named(Name::Cos, scale);
    throw std::domain_error("Drift: unknown named drift '" + tag + "'");
}

double Drift::lipschitz() const {
    if (kind == Kind::Affine) return std::abs(b1);
    return std::abs(scale); // sin, tanh, cos all have |base'| <= 1
}

double Drift::operator()(double u) const {
    if (kind == Kind::Affine) return b1 * u + c;
    switch (name) {
        case Name::Sin: return scale * std::sin(u);
        case Name::Tanh: return scale * std::tanh(u);
        case Name::Cos: return scale * std::cos(u);
    }
    return 0.0;
}

void Drift::apply(std::span<const double> in, std::span<double> out) const {
    const std::size_t n = in.size();
    if (kind == Kind::Affine) {
        for (std::size_t j = 0; j < n; ++j) out[j] = b1 * in[j] + c;
        return;
    }
    switch (name) {
        case Name::Sin:
            for (std::size_t j = 0; j < n; ++j) out[j] = scale * std::sin(in[j]);
            break;
        case Name::Tanh:
            for (std::size_t j = 0; j < n; ++j) out[j] = scale * std::tanh(in[j]);
            break;
        case Name::Cos:
            for (std::size_t j = 0; j < n; ++j) out[j] = scale * std::cos(in[j]);
            break;
    }
}

std::string Drift::tag() const {
    if (kind == Kind::Affine) {
        std::ostringstream os;
        os << "affine(b1=" << b1 << ",c=" << c << ")";
        return os.str();
    }
    std::ostringstream os;
    switch (name) {
        case Name::Sin: os << "sin"; break;
        case Name::Tanh: os << "tanh"; break;
        case Name::Cos: os << "cos"; break;
    }
    if (scale != 1.0) os << "*" << scale;
    return os.str();
}

InitialDatum InitialDatum::named(const std::string& tag) {
    if (tag == "zero") return {"zero", [](double) { return 0.0; }};
    if (tag == "one") return {"one", [](double) { return 1.0; }};
    if (tag == "cospix") return {"cospix", [](double x) { return std::cos(kPi * x); }};
    if (tag == "sinpix") return {"sinpix", [](double x) { return std::sin(kPi * x); }};
    throw std::domain_error("InitialDatum: unknown name '" + tag + "'");
}

void SchemeConfig::validate(const ModelSpec& model) const {
    if (!(T > 0.0) || N < 1 || K < 1 || ref_refinement < 1)
        throw std::domain_error("SchemeConfig: T>0 and N,K,m >= 1 required");
    if (M < 2 * K + 2)
        throw std::domain_error("SchemeConfig: aliasing margin requires M >= 2K+2");
    if (strict) {
        const double lip = model.drift.lipschitz();
        double bound = T / 12.0;
        if (lip > 0.0) bound = std::min(bound, std::log(1.5) / (4.0 * lip));
        if (!(delta() < bound)) {
            std::ostringstream os;
            os << "strict-hypothesis mode requires delta in (0, T/12 ^ "
                  "log(3/2)/(4|b|_1)) = (0, "
               << bound << "); got delta = " << delta()
               << " (disable strict mode to run outside the hypothesis)";
            throw std::domain_error(os.str());
        }
    }
}

namespace {

/// Resolved per-step coefficients and scratch space for repeated stepping.
class Stepper {
  public:
    Stepper(const ModelSpec& model, int K, int M, double delta)
        : model_(model),
          n_(mode_count(model.bc, K)),
          ft_(model.bc, K, M),
          grid_(M),
          bhat_(n_),
          decay_(n_),
          drift_w_(n_) {
        const int kb = model.bc == BoundaryCondition::Neumann ? 0 : 1;
        for (int i = 0; i < n_; ++i) {
            const double lambda = eigenvalue(kb + i);
            decay_[i] = std::exp(-lambda * delta);
            drift_w_[i] = delta * phi1(lambda * delta);
        }
    }

    int modes() const { return n_; }

    void step(std::span<double> a, const double* xi) {
        const double sigma = model_.sigma;
        if (model_.drift.is_zero()) {
            for (int i = 0; i < n_; ++i)
                a[i] = decay_[i] * a[i] + sigma * xi[i];
            return;
        }
        ft_.synthesize(a, grid_);
        model_.drift.apply(grid_, grid_);
        ft_.analyze(grid_, bhat_);
        for (int i = 0; i < n_; ++i)
            a[i] = decay_[i] * a[i] + drift_w_[i] * bhat_[i] + sigma * xi[i];
    }

  private:
    const ModelSpec& model_;
    int n_;
    FastTransform ft_;
    std::vector<double> grid_;
    std::vector<double> bhat_;
    std::vector<double> decay_;
    std::vector<double> drift_w_;
};

ModeVector run_steps(const ModelSpec& model, int M, double delta,
                     const NoiseTensor* tensor, long steps, ModeVector state) {
    Stepper stepper(model, state.K, M, delta);
    const std::vector<double> no_noise(tensor ? 0 : state.coeffs.size(), 0.0);
    for (long i = 0; i < steps; ++i) {
        const double* xi = tensor ? tensor->step_span(i) : no_noise.data();
        stepper.step(state.coeffs, xi);
    }
    return state;
}

} // namespace

ModeVector initial_modes(const ModelSpec& model, int K, int M) {
    FastTransform ft(model.bc, K, M);
    std::vector<double> g(M);
    for (int j = 0; j < M; ++j) g[j] = model.u0.fn((j + 0.5) / double(M));
    ModeVector m = ModeVector::zeros(model.bc, K);
    ft.analyze(g, m.coeffs);
    return m;
}

ModeVector step_perturbed(const ModeVector& state, const ModelSpec& model,
                          double delta, std::span<const double> xi, int M) {
    state.validate();
    if (!(delta > 0.0)) throw std::domain_error("step_perturbed: delta must be > 0");
    if (xi.size() != state.coeffs.size())
        throw std::domain_error("step_perturbed: increment dimension mismatch");
    ModeVector out = state;
    Stepper stepper(model, state.K, M, delta);
    stepper.step(out.coeffs, xi.data());
    return out;
}

ModeVector evolve_with_tensor(const ModelSpec& model, int M, const NoiseTensor& tensor) {
    tensor.plan.validate();
    if (tensor.plan.bc != model.bc)
        throw std::domain_error("evolve_with_tensor: boundary condition mismatch");
    return run_steps(model, M, tensor.plan.delta, &tensor, tensor.plan.steps,
                     initial_modes(model, tensor.plan.K, M));
}

ModeVector simulate_terminal_modes(const ModelSpec& model, const SchemeConfig& config,
                                   std::uint64_t master_seed,
                                   std::uint64_t path_index) {
    config.validate(model);
    const NoisePlan plan{config.delta(), config.N, config.K, model.bc};
    ModeVector init = initial_modes(model, config.K, config.M);
    if (model.sigma != 0.0) {
        const NoiseTensor tensor = sample_increments(master_seed, path_index, plan);
        return run_steps(model, config.M, plan.delta, &tensor, plan.steps,
                         std::move(init));
    }
    return run_steps(model, config.M, plan.delta, nullptr, plan.steps,
                     std::move(init));
}

GridFunction simulate_path(const ModelSpec& model, const SchemeConfig& config,
                           std::uint64_t master_seed, std::uint64_t path_index) {
    return synthesize(simulate_terminal_modes(model, config, master_seed, path_index),
                      config.M);
}

CoupledTerminal simulate_coupled_terminal(const ModelSpec& model,
                                          const SchemeConfig& config,
                                          std::uint64_t master_seed,
                                          std::uint64_t path_index) {
    config.validate(model);
    const long ratio = 1L << config.ref_refinement;
    const double delta_f = config.delta() / double(ratio);
    const NoisePlan fine_plan{delta_f, config.N * ratio, config.K, model.bc};

    const ModeVector init = initial_modes(model, config.K, config.M);
    CoupledTerminal result;
    if (model.sigma != 0.0) {
        const NoiseTensor fine = sample_increments(master_seed, path_index, fine_plan);
        const NoiseTensor coarse = aggregate_to_coarse(fine, ratio);
        result.fine = run_steps(model, config.M, delta_f, &fine, fine_plan.steps, init);
        result.coarse =
            run_steps(model, config.M, config.delta(), &coarse, config.N, init);
    } else {
        result.fine = run_steps(model, config.M, delta_f, nullptr, fine_plan.steps, init);
        result.coarse =
            run_steps(model, config.M, config.delta(), nullptr, config.N, init);
    }
    return result;
}

GridFunction simulate_reference(const ModelSpec& model, const SchemeConfig& config,
                                std::uint64_t master_seed, std::uint64_t path_index) {
    return synthesize(
        simulate_coupled_terminal(model, config, master_seed, path_index).fine,
        config.M);
}

namespace {

/// Coefficient of the constant function 1 against eigenfunction k.
double constant_mode_coefficient(BoundaryCondition bc, int k) {
    if (bc == BoundaryCondition::Neumann) return k == 0 ? 1.0 : 0.0;
    if (k % 2 == 0) return 0.0;
    return 2.0 * std::sqrt(2.0) / (double(k) * kPi);
}

// full-series values of sum_{k>=1} cos(2 pi k x)/k^2 and /k^4 on [0,1]
double cos_over_k2(double x) { return kPi * kPi * (x * x - x + 1.0 / 6.0); }
double cos_over_k4(double x) {
    const double b4 = ((x - 2.0) * x + 1.0) * x * x - 1.0 / 30.0;
    return -kPi * kPi * kPi * kPi * b4 / 3.0;
}

/// sum_{k > kc} e_k(x)^2 / (2 (lambda_k - b)): the saturated variance tail
/// shared by both affine laws, via 1/(k^2-z) = 1/k^2 + z/k^4 + z^2/(k^4(k^2-z))
/// and the closed forms of the first two pieces.
double saturated_mode_tail(BoundaryCondition bc, double x, double b, int kc) {
    const double z = b / (kPi * kPi);
    if (!(z < double(kc + 1) * double(kc + 1)))
        throw std::domain_error("saturated_mode_tail: cutoff below drift shift");
    const double sgn = bc == BoundaryCondition::Neumann ? 1.0 : -1.0;
    double p2 = 0.0, p2c = 0.0, p4 = 0.0, p4c = 0.0;
    for (int k = 1; k <= kc; ++k) {
        const double ck = std::cos(2.0 * kPi * k * x);
        const double k2 = double(k) * double(k);
        p2 += 1.0 / k2;
        p2c += ck / k2;
        p4 += 1.0 / (k2 * k2);
        p4c += ck / (k2 * k2);
    }
    const double t2 = (kPi * kPi / 6.0 - p2) + sgn * (cos_over_k2(x) - p2c);
    const double t4 =
        (kPi * kPi * kPi * kPi / 90.0 - p4) + sgn * (cos_over_k4(x) - p4c);
    Kahan rem;
    for (int k = kc + 1; k <= kc + 4000; ++k) {
        const double k2 = double(k) * double(k);
        const double term =
            (1.0 + sgn * std::cos(2.0 * kPi * k * x)) / (k2 * k2 * (k2 - z));
        rem.add(term);
        if (term < 1e-19 && k > kc + 8) break;
    }
    return (t2 + z * t4 + z * z * rem.value()) / (2.0 * kPi * kPi);
}

/// (q^n - 1)/(q - 1) with a stable n-term limit as q -> 1.
double geometric_sum(double q, long n) {
    if (std::abs(q - 1.0) < 1e-9)
        return double(n) * (1.0 + 0.5 * double(n - 1) * (q - 1.0));
    return (std::pow(q, double(n)) - 1.0) / (q - 1.0);
}

} // namespace

GaussianLaw affine_exact_law(const ModelSpec& model, double T, double x) {
    if (!model.drift.is_affine())
        throw std::domain_error("affine_exact_law: drift must be affine");
    if (!(T > 0.0)) throw std::domain_error("affine_exact_law: T must be > 0");
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("affine_exact_law: x must lie in [0,1]");

    const BoundaryCondition bc = model.bc;
    const double b1 = model.drift.b1;
    const double c = model.drift.c;
    const int k_base = bc == BoundaryCondition::Neumann ? 0 : 1;

    // ---- mean: initial-value part decays like e^{(b1 - lambda_k) T} ----
    Kahan mean;
    {
        const double lam_cut = b1 + 45.0 / T;
        const int k_max =
            std::max(k_base + 2, int(std::ceil(std::sqrt(std::max(lam_cut, 0.0)) / kPi)) + 2);
        for (int k = k_base; k <= k_max; ++k) {
            const double w = std::exp((b1 - eigenvalue(k)) * T);
            if (w < 1e-18 && k > k_base) break;
            const double u0k = adaptive_simpson(
                [&](double y) { return model.u0.fn(y) * eigenfunction(bc, k, y); },
                0.0, 1.0, 1e-14);
            mean.add(w * u0k * eigenfunction(bc, k, x));
        }
    }
    // constant-drift part: chat_k (e^{(b1-lambda_k)T} - 1)/(b1 - lambda_k)
    if (c != 0.0) {
        if (bc == BoundaryCondition::Neumann) {
            mean.add(c * T * phim(b1 * T));
        } else {
            for (int k = 1; k <= 2000001; k += 2) {
                const double chat = constant_mode_coefficient(bc, k);
                const double g = T * phim((b1 - eigenvalue(k)) * T);
                mean.add(c * chat * g * eigenfunction(bc, k, x));
                if (k > 1 && std::abs(c * chat * g) * std::sqrt(2.0) < 1e-17) break;
            }
        }
    }

    // ---- variance: sum_k T phim(2(b1-lambda_k)T) e_k(x)^2, modes beyond the
    //      decay horizon resummed by the closed-form saturated tail ----
    const double sig2 = model.sigma * model.sigma;
    const double lam_cut = b1 + 21.0 / T;
    int kc = int(std::ceil(std::sqrt(std::max(lam_cut, 0.0)) / kPi)) + 1;
    kc = std::max({kc, int(std::ceil(std::sqrt(std::abs(b1)) / kPi)) + 2, 4});

    Kahan var;
    for (int k = k_base; k <= kc; ++k) {
        const double e = eigenfunction(bc, k, x);
        var.add(T * phim(2.0 * (b1 - eigenvalue(k)) * T) * e * e);
    }
    var.add(saturated_mode_tail(bc, x, b1, kc));

    GaussianLaw law{mean.value(), sig2 * var.value()};
    law.validate();
    return law;
}

GaussianLaw affine_perturbed_law(const ModelSpec& model, const SchemeConfig& config,
                                 double x) {
    if (!model.drift.is_affine())
        throw std::domain_error("affine_perturbed_law: drift must be affine");
    config.validate(model);
    const BoundaryCondition bc = model.bc;
    const double b1 = model.drift.b1;
    const double c = model.drift.c;
    const double delta = config.delta();
    const long N = config.N;
    const double sig2 = model.sigma * model.sigma;
    const int k_base = bc == BoundaryCondition::Neumann ? 0 : 1;

    // Beyond kc every mode is saturated: e^{-lambda delta} < 2e-22, so the
    // per-step gain is b1/lambda and the stationary variance has the
    // closed-form tail below.
    int kc = std::max({int(std::ceil(std::sqrt(50.0 / delta) / kPi)) + 1, config.K,
                       int(std::ceil(std::sqrt(std::abs(b1)) / kPi)) + 2, 4});

    const ModeVector mu0 = initial_modes(model, config.K, config.M);
    auto initial_coeff = [&](int k) -> double {
        const int slot = k - k_base;
        return (slot >= 0 && slot < int(mu0.coeffs.size())) ? mu0.coeffs[slot] : 0.0;
    };

    Kahan mean, var;
    for (int k = k_base; k <= kc; ++k) {
        const double lambda = eigenvalue(k);
        const double decay = std::exp(-lambda * delta);
        const double dw = delta * phi1(lambda * delta);
        const double gain = decay + dw * b1;
        const double chat = c * constant_mode_coefficient(bc, k);
        const double vk = mode_increment_variance(lambda, delta);
        const double mu_n = std::pow(gain, double(N)) * initial_coeff(k) +
                            dw * chat * geometric_sum(gain, N);
        const double v_n = sig2 * vk * geometric_sum(gain * gain, N);
        const double e = eigenfunction(bc, k, x);
        mean.add(mu_n * e);
        var.add(v_n * e * e);
    }
    // saturated variance tail: v/(1-gain^2) -> (1/4)[1/(l-b1) + 1/(l+b1)]
    var.add(sig2 * 0.5 *
            (saturated_mode_tail(bc, x, b1, kc) + saturated_mode_tail(bc, x, -b1, kc)));
    // Dirichlet keeps feeding constant drift into high odd modes
    if (bc == BoundaryCondition::Dirichlet && c != 0.0) {
        const int k_start = kc % 2 == 0 ? kc + 1 : kc + 2;
        for (int k = k_start; k <= 2000001; k += 2) {
            const double lambda = eigenvalue(k);
            const double dw = delta * phi1(lambda * delta);
            const double gain = std::exp(-lambda * delta) + dw * b1;
            const double envelope = dw * c * constant_mode_coefficient(bc, k) *
                                    geometric_sum(gain, N);
            mean.add(envelope * eigenfunction(bc, k, x));
            if (std::abs(envelope) * std::sqrt(2.0) < 1e-16) break;
        }
    }
    GaussianLaw law{mean.value(), var.value()};
    law.validate();
    return law;
}

} // namespace shelab
