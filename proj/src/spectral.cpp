#include "shelab/spectral.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <sstream>

#include <fftw3.h>

namespace shelab {

ModeVector ModeVector::zeros(BoundaryCondition bc, int K) {
    ModeVector m;
    m.bc = bc;
    m.K = K;
    m.coeffs.assign(mode_count(bc, K), 0.0);
    return m;
}

void ModeVector::validate() const {
    if (K < 0 || int(coeffs.size()) != mode_count(bc, K))
        throw std::domain_error("ModeVector: coefficient count does not match K");
    for (double c : coeffs)
        if (!std::isfinite(c))
            throw std::domain_error("ModeVector: non-finite coefficient");
}

namespace {

void check_margin(int K, int M) {
    if (M < 2 * K + 2) {
        std::ostringstream os;
        os << "aliasing: grid M=" << M << " below margin 2K+2=" << 2 * K + 2;
        throw std::domain_error(os.str());
    }
}

} // namespace

GridFunction synthesize(const ModeVector& m, int M) {
    m.validate();
    check_margin(m.K, M);
    GridFunction g;
    g.bc = m.bc;
    g.values.assign(M, 0.0);
    for (int j = 0; j < M; ++j) {
        const double x = (j + 0.5) / double(M);
        Kahan acc;
        for (std::size_t i = 0; i < m.coeffs.size(); ++i)
            acc.add(m.coeffs[i] * eigenfunction(m.bc, m.physical_mode(i), x));
        g.values[j] = acc.value();
    }
    return g;
}

ModeVector analyze(const GridFunction& g, int K) {
    const int M = g.size();
    check_margin(K, M);
    ModeVector m = ModeVector::zeros(g.bc, K);
    for (std::size_t i = 0; i < m.coeffs.size(); ++i) {
        const int k = m.physical_mode(i);
        Kahan acc;
        for (int j = 0; j < M; ++j)
            acc.add(g.values[j] * eigenfunction(g.bc, k, g.node(j)));
        m.coeffs[i] = acc.value() / double(M);
    }
    return m;
}

ModeVector project_drift(const std::function<double(double)>& b,
                         const ModeVector& state, int M) {
    GridFunction g = synthesize(state, M);
    for (int j = 0; j < M; ++j) {
        const double v = b(g.values[j]);
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os << "project_drift: drift returned non-finite value at grid point x="
               << g.node(j);
            throw numerical_error(os.str());
        }
        g.values[j] = v;
    }
    return analyze(g, state.K);
}

double evaluate_at(const ModeVector& m, double x) {
    Kahan acc;
    for (std::size_t i = 0; i < m.coeffs.size(); ++i)
        acc.add(m.coeffs[i] * eigenfunction(m.bc, m.physical_mode(i), x));
    return acc.value();
}

// ---------------------------------------------------------------------------
// FFTW path. Midpoint-grid expansions map onto the half-shifted DCT/DST:
//   Neumann  synthesize: REDFT01 with X_0 = a_0, X_k = a_k / sqrt(2)
//   Neumann  analyze:    REDFT10 with a_0 = Y_0/(2M), a_k = Y_k/(sqrt(2) M)
//   Dirichlet synthesize: RODFT01 with X_{k-1} = a_k / sqrt(2)
//   Dirichlet analyze:    RODFT10 with a_k = Y_{k-1}/(sqrt(2) M)
// Plans use FFTW_ESTIMATE so the chosen algorithm (and hence the rounding)
// is stable across runs.
// ---------------------------------------------------------------------------

namespace {

std::mutex g_fftw_plan_mutex;

// Process-lifetime plan cache keyed by (grid size, r2r kind). Plans are
// created once on fftw_malloc-aligned scratch and executed on equally
// aligned per-instance buffers via the new-array interface, which keeps the
// chosen codelets (and the rounding) identical across threads and runs.
struct CachedPlan {
    fftw_plan plan = nullptr;
    double* scratch_in = nullptr;
    double* scratch_out = nullptr;
};
std::map<std::pair<int, int>, CachedPlan> g_plan_cache;

fftw_plan cached_plan(int M, fftw_r2r_kind kind) {
    std::lock_guard<std::mutex> lock(g_fftw_plan_mutex);
    auto& entry = g_plan_cache[{M, int(kind)}];
    if (!entry.plan) {
        entry.scratch_in = fftw_alloc_real(M);
        entry.scratch_out = fftw_alloc_real(M);
        entry.plan = fftw_plan_r2r_1d(M, entry.scratch_in, entry.scratch_out, kind,
                                      FFTW_ESTIMATE);
        if (!entry.plan)
            throw numerical_error("FastTransform: FFTW plan creation failed");
    }
    return entry.plan;
}

} // namespace

struct FastTransform::Impl {
    double* in = nullptr;
    double* out = nullptr;
    fftw_plan forward = nullptr;  // grid -> coefficient direction
    fftw_plan backward = nullptr; // coefficient -> grid direction
};

FastTransform::FastTransform(BoundaryCondition bc, int K, int M)
    : impl_(new Impl), bc_(bc), K_(K), M_(M), n_modes_(mode_count(bc, K)) {
    check_margin(K, M);
    impl_->in = fftw_alloc_real(M);
    impl_->out = fftw_alloc_real(M);
    impl_->backward = cached_plan(
        M, bc == BoundaryCondition::Neumann ? FFTW_REDFT01 : FFTW_RODFT01);
    impl_->forward = cached_plan(
        M, bc == BoundaryCondition::Neumann ? FFTW_REDFT10 : FFTW_RODFT10);
}

FastTransform::~FastTransform() {
    fftw_free(impl_->in);
    fftw_free(impl_->out);
}

void FastTransform::synthesize(std::span<const double> coeffs,
                               std::span<double> values) {
    if (int(coeffs.size()) != n_modes_ || int(values.size()) != M_)
        throw std::domain_error("FastTransform::synthesize: size mismatch");
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    std::memset(impl_->in, 0, sizeof(double) * M_);
    if (bc_ == BoundaryCondition::Neumann) {
        impl_->in[0] = coeffs[0];
        for (int k = 1; k <= K_; ++k) impl_->in[k] = coeffs[k] * inv_sqrt2;
    } else {
        for (int k = 1; k <= K_; ++k) impl_->in[k - 1] = coeffs[k - 1] * inv_sqrt2;
    }
    fftw_execute_r2r(impl_->backward, impl_->in, impl_->out);
    std::memcpy(values.data(), impl_->out, sizeof(double) * M_);
}

void FastTransform::analyze(std::span<const double> values,
                            std::span<double> coeffs) {
    if (int(coeffs.size()) != n_modes_ || int(values.size()) != M_)
        throw std::domain_error("FastTransform::analyze: size mismatch");
    std::memcpy(impl_->in, values.data(), sizeof(double) * M_);
    fftw_execute_r2r(impl_->forward, impl_->in, impl_->out);
    const double scale = 1.0 / (std::sqrt(2.0) * double(M_));
    if (bc_ == BoundaryCondition::Neumann) {
        coeffs[0] = impl_->out[0] / (2.0 * double(M_));
        for (int k = 1; k <= K_; ++k) coeffs[k] = impl_->out[k] * scale;
    } else {
        for (int k = 1; k <= K_; ++k) coeffs[k - 1] = impl_->out[k - 1] * scale;
    }
}

} // namespace shelab
