#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "tauber/report.hpp"
#include "tauber/signal.hpp"

namespace tauber {

/// Width schedule from the iterated-logarithm sequence instead of j log(2+j)^{1+eps}.
struct IteratedLogMode {
    int n = 1;
    double eps = 0.5;
};

/// ψ = normalized convolution of n_boxes boxes of half-widths a_1 > a_2 > ... with sum <= 1.
struct BumpSpec {
    double eps = 0.5;
    int n_boxes = 64;
    std::vector<double> widths;          // empty: default schedule scaled to sum 1
    std::size_t grid_n = (std::size_t{1} << 14) + 1;  // odd, samples on [-1, 1]
    std::optional<IteratedLogMode> iterated_log;

    /// Throws SpecError on eps outside (0, 1), non-decreasing widths or sum > 1.
    void validate() const;
    /// The widths actually used: explicit ones, or c / (j log(2+j)^{1+eps}) with sum 1.
    std::vector<double> resolved_widths() const;
    /// log A_j with A_j = (j log(2+j)^{1+eps})^j (or the iterated-log base), log A_0 = 0.
    double log_A(int j) const;
};

/// Samples ψ on [-1, 1] with ψ(0) = 1 exactly and ψ = 0 outside [-Σa, Σa].
SampledSignal build_psi(const BumpSpec& spec);

struct DerivativeCheckOptions {
    int j_max = 8;
    double fd_step = 1.0 / 64.0;  // physical step of the difference stencil
    int power_k_max = 3;
    int power_j_max = 4;
};

/// Finite-difference sup|ψ^(j)| for j = 0..j_max with a fixed physical stencil step.
/// Throws ResolutionError if the grid step exceeds half the stencil step.
std::vector<double> derivative_sups(const SampledSignal& psi, int j_max, double fd_step = 1.0 / 64.0);

/// Observations: "C1" (smallest C with sup|ψ^(j)| <= C^{j+1} A_j for all tested j),
/// "box_bound" (worst ratio of the estimate to prod_{i<=j} 1/a_i times h_{>j}(0)/h(0), with h the
/// unnormalized chain and h_{>j} the chain of the remaining boxes) and "power_bound"
/// (worst ratio for ψ^k against C1^k (k C1)^j A_j).
VerificationReport check_derivative_bounds(const SampledSignal& psi, const BumpSpec& spec,
                                           const DerivativeCheckOptions& opt = {});

/// φ(t) = (1/2π) ∫ e^{ist} ψ(s) ds by the trapezoid rule on ψ's grid, sampled at t0 + i dt.
SampledSignal phi_from_psi(const SampledSignal& psi, double t0, double dt, std::size_t n);

/// φ_R(t) = R φ(R t) on the rescaled grid (t0/R, dt/R). Exact; mass is unchanged.
SampledSignal scale(const SampledSignal& phi, double R);

/// φ_R resampled onto (t0, dt, n) by cubic interpolation. With preserve_mass the samples
/// are renormalized so the trapezoid mass equals that of φ.
SampledSignal scale(const SampledSignal& phi, double R, double t0, double dt, std::size_t n,
                    bool preserve_mass = true);

}  // namespace tauber
