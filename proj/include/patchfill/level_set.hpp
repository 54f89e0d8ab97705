#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "patchfill/image.hpp"

namespace patchfill {

/// Two-phase level set. Phase 1 is phi >= 0, phase 2 is phi < 0.
struct LevelSetField {
  int width = 0;
  int height = 0;
  std::vector<double> phi;
  double c1 = 0.0;
  double c2 = 0.0;
  double epsilon = 1.5;  // width of the regularised Dirac / Heaviside

  double operator()(int x, int y) const {
    return phi[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
  }
  bool in_phase1(std::size_t i) const { return phi[i] >= 0.0; }
};

/// sin(pi x / 5) sin(pi y / 5), the usual two-phase starting point.
LevelSetField checkerboard_level_set(int width, int height);

/// Positive inside the circle, signed distance to it.
LevelSetField circle_level_set(int width, int height, double cx, double cy, double radius);

struct SegParams {
  std::vector<double> lambda;      // per-pixel data weight; empty = 1 everywhere
  double nu = 0.01 * 255.0 * 255.0;  // contour-length weight
  double mu_smooth = 1.0;          // smoothness weight of the damped Poisson solves
  double dt = 0.0;                 // <= 0 picks a step that moves phi by at most 0.5
  int max_iters = 500;
  double tol = 0.0;                // fraction of pixels changing phase per step
  int patience = 5;                // accepted steps at or below tol before stopping
  int reinit_interval = 25;
  double epsilon = 1.5;
  double poisson_tol = 1e-10;      // residual infinity norm
  int poisson_max_iters = 0;       // <= 0: 10 x pixel count
};

void validate(const SegParams& params, int width, int height);

/// lambda-weighted mean of each phase. A phase with zero total weight keeps
/// the value already stored in `field`.
std::pair<double, double> region_means(const Raster& raster, const LevelSetField& field, const SegParams& params);

/// Piecewise-constant two-phase energy with the field's c1, c2:
/// sum lambda (c_k - u0)^2 over each phase + nu * sum |grad H_eps(phi)|.
double ms_energy(const Raster& raster, const LevelSetField& field, const SegParams& params);

struct EvolutionTrace {
  std::vector<double> energy;       // after every accepted step; [0] is the initial energy
  std::vector<double> dt;           // step used for each accepted update
  std::vector<std::size_t> flips;   // pixels that changed phase in each accepted update
  int iterations = 0;
  int rejected = 0;
  int reinitializations = 0;
  bool converged = false;
};

struct SegmentationResult {
  LevelSetField field;
  EvolutionTrace trace;
};

/// Explicit gradient flow of the two-phase energy:
///   phi += dt * delta_eps(phi) * [nu * kappa - lambda (u0 - c1)^2 + lambda (u0 - c2)^2]
/// alternating with region_means. A step that would raise the energy is
/// retried at half the step size; five accepted steps in a row grow the step
/// by 1.2 up to its initial value. The field is reinitialised to a signed
/// distance every `reinit_interval` steps when that does not raise the energy.
/// On return the phases are ordered so that c1 <= c2.
/// Throws std::runtime_error("evolution diverged ...") on non-finite values.
SegmentationResult evolve_level_set(const Raster& raster, LevelSetField field, const SegParams& params);

/// Replaces phi by the signed distance to its zero set (fast sweeping),
/// keeping the sign of every cell.
void reinitialize(LevelSetField& field);

/// (phase 1 mask, phase 2 mask); they partition the image.
std::pair<RegionMask, RegionMask> structure_mask_from_segmentation(const LevelSetField& field);

/// 0 for phase 1, 1 for phase 2, per pixel.
std::vector<int> phase_labels(const LevelSetField& field);

/// Solves lambda (u - u0) = mu_smooth * Lap_R(u) on `region` by conjugate
/// gradients, where Lap_R only couples 4-neighbours inside the region (zero
/// flux across its boundary). Values outside the region are copied from u0.
/// Throws std::runtime_error with the final residual if the iteration cap is hit.
std::vector<double> solve_damped_poisson(const Raster& raster, const RegionMask& region, const SegParams& params);

/// max over region of |lambda (u - u0) - mu_smooth * Lap_R(u)|.
double damped_poisson_residual(const Raster& raster, const RegionMask& region, const SegParams& params,
                               const std::vector<double>& u);

/// Net flux of grad u through the region boundary implied by the solution:
/// by the divergence theorem it equals sum_R Lap(u) = sum_R lambda (u - u0) /
/// mu_smooth, and vanishes when no flux crosses the boundary. Zero when
/// mu_smooth == 0.
double boundary_flux(const Raster& raster, const RegionMask& region, const SegParams& params,
                     const std::vector<double>& u);

/// Smooth approximations of both phases.
std::pair<std::vector<double>, std::vector<double>> piecewise_smooth(const Raster& raster, const LevelSetField& field,
                                                                     const SegParams& params);

}  // namespace patchfill
