#include "patchfill/level_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace patchfill {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> gray_values(const Raster& raster) {
  const Raster gray = to_gray(raster);
  return {gray.data().begin(), gray.data().end()};
}

double lambda_at(const SegParams& params, std::size_t i) { return params.lambda.empty() ? 1.0 : params.lambda[i]; }

double dirac(double phi, double eps) { return eps / (std::numbers::pi * (eps * eps + phi * phi)); }

double heaviside(double phi, double eps) { return 0.5 * (1.0 + 2.0 / std::numbers::pi * std::atan(phi / eps)); }

// Sums per row first, then across rows, so the total does not depend on the
// number of threads.
template <typename RowFn>
double deterministic_sum(int rows, RowFn&& row_sum) {
  std::vector<double> partial(static_cast<std::size_t>(rows));
#pragma omp parallel for schedule(static)
  for (int y = 0; y < rows; ++y) partial[static_cast<std::size_t>(y)] = row_sum(y);
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

std::pair<double, double> means_of(const std::vector<double>& u0, const std::vector<double>& phi,
                                   const SegParams& params, double prev1, double prev2) {
  double s1 = 0.0, w1 = 0.0, s2 = 0.0, w2 = 0.0;
  for (std::size_t i = 0; i < u0.size(); ++i) {
    const double l = lambda_at(params, i);
    if (phi[i] >= 0.0) {
      s1 += l * u0[i];
      w1 += l;
    } else {
      s2 += l * u0[i];
      w2 += l;
    }
  }
  return {w1 > 0.0 ? s1 / w1 : prev1, w2 > 0.0 ? s2 / w2 : prev2};
}

double energy_of(const std::vector<double>& u0, const std::vector<double>& phi, int w, int h, double c1, double c2,
                 double eps, const SegParams& params) {
  return deterministic_sum(h, [&](int y) {
    double row = 0.0;
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
      const double c = phi[i] >= 0.0 ? c1 : c2;
      row += lambda_at(params, i) * (c - u0[i]) * (c - u0[i]);
      if (params.nu != 0.0) {
        const double hc = heaviside(phi[i], eps);
        const double hx = x + 1 < w ? heaviside(phi[i + 1], eps) - hc : 0.0;
        const double hy = y + 1 < h ? heaviside(phi[i + static_cast<std::size_t>(w)], eps) - hc : 0.0;
        row += params.nu * std::sqrt(hx * hx + hy * hy);
      }
    }
    return row;
  });
}

// div(grad phi / |grad phi|) with central differences and replicated borders.
std::vector<double> curvature(const std::vector<double>& phi, int w, int h) {
  auto at = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return phi[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)];
  };
  const std::size_t n = phi.size();
  std::vector<double> nx(n), ny(n), kappa(n);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double gx = 0.5 * (at(x + 1, y) - at(x - 1, y));
      const double gy = 0.5 * (at(x, y + 1) - at(x, y - 1));
      const double norm = std::sqrt(gx * gx + gy * gy + 1e-12);
      const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
      nx[i] = gx / norm;
      ny[i] = gy / norm;
    }
  auto idx = [&](int x, int y) {
    return static_cast<std::size_t>(std::clamp(y, 0, h - 1)) * static_cast<std::size_t>(w) +
           static_cast<std::size_t>(std::clamp(x, 0, w - 1));
  };
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      kappa[idx(x, y)] = 0.5 * (nx[idx(x + 1, y)] - nx[idx(x - 1, y)]) + 0.5 * (ny[idx(x, y + 1)] - ny[idx(x, y - 1)]);
  return kappa;
}

std::size_t count_flips(const std::vector<double>& a, const std::vector<double>& b) {
  std::size_t flips = 0;
  for (std::size_t i = 0; i < a.size(); ++i) flips += (a[i] >= 0.0) != (b[i] >= 0.0) ? 1 : 0;
  return flips;
}

}  // namespace

LevelSetField checkerboard_level_set(int width, int height) {
  LevelSetField f{width, height, {}, 0.0, 0.0, 1.5};
  f.phi.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      f.phi[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)] =
          std::sin(std::numbers::pi * x / 5.0) * std::sin(std::numbers::pi * y / 5.0);
  return f;
}

LevelSetField circle_level_set(int width, int height, double cx, double cy, double radius) {
  LevelSetField f{width, height, {}, 0.0, 0.0, 1.5};
  f.phi.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      f.phi[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)] =
          radius - std::hypot(x - cx, y - cy);
  return f;
}

void validate(const SegParams& params, int width, int height) {
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (!params.lambda.empty()) {
    if (params.lambda.size() != n) throw std::invalid_argument("lambda map does not match image");
    for (double l : params.lambda)
      if (!(l >= 0.0) || !std::isfinite(l)) throw std::invalid_argument("lambda must be finite and nonnegative");
  }
  if (!(params.nu >= 0.0) || !(params.mu_smooth >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
  if (!(params.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (params.max_iters < 0) throw std::invalid_argument("max_iters must be nonnegative");
}

std::pair<double, double> region_means(const Raster& raster, const LevelSetField& field, const SegParams& params) {
  validate(params, raster.width(), raster.height());
  if (field.width != raster.width() || field.height != raster.height())
    throw std::invalid_argument("level set does not match image");
  return means_of(gray_values(raster), field.phi, params, field.c1, field.c2);
}

double ms_energy(const Raster& raster, const LevelSetField& field, const SegParams& params) {
  validate(params, raster.width(), raster.height());
  if (field.width != raster.width() || field.height != raster.height())
    throw std::invalid_argument("level set does not match image");
  return energy_of(gray_values(raster), field.phi, field.width, field.height, field.c1, field.c2, field.epsilon,
                   params);
}

SegmentationResult evolve_level_set(const Raster& raster, LevelSetField field, const SegParams& params) {
  validate(params, raster.width(), raster.height());
  if (field.width != raster.width() || field.height != raster.height())
    throw std::invalid_argument("level set does not match image");
  const int w = field.width, h = field.height;
  const std::size_t n = field.phi.size();
  const std::vector<double> u0 = gray_values(raster);
  field.epsilon = params.epsilon;
  const double eps = field.epsilon;
  const double dirac_max = dirac(0.0, eps);

  SegmentationResult result;
  EvolutionTrace& trace = result.trace;
  std::tie(field.c1, field.c2) = means_of(u0, field.phi, params, field.c1, field.c2);
  double energy = energy_of(u0, field.phi, w, h, field.c1, field.c2, eps, params);
  trace.energy.push_back(energy);

  double scale = 1.0;  // adaptive factor on the step, capped at 1
  int streak = 0;
  int stable = 0;
  std::vector<double> force(n), candidate(n);

  for (int it = 0; it < params.max_iters; ++it) {
    const std::vector<double> kappa = params.nu != 0.0 ? curvature(field.phi, w, h) : std::vector<double>(n, 0.0);
    double bracket_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double l = lambda_at(params, i);
      const double b = params.nu * kappa[i] - l * (u0[i] - field.c1) * (u0[i] - field.c1) +
                       l * (u0[i] - field.c2) * (u0[i] - field.c2);
      force[i] = dirac(field.phi[i], eps) * b;
      bracket_max = std::max(bracket_max, std::abs(b));
    }
    if (bracket_max == 0.0) {
      trace.converged = true;
      break;
    }
    // Automatic step: at most two units of phi per step, and within the
    // explicit stability limit of the curvature term.
    double base_dt = params.dt;
    if (base_dt <= 0.0) {
      base_dt = 2.0 / (dirac_max * bracket_max);
      if (params.nu > 0.0) base_dt = std::min(base_dt, 1.0 / (4.0 * params.nu * dirac_max));
    }

    bool accepted = false;
    double c1 = field.c1, c2 = field.c2, new_energy = energy;
    while (!accepted) {
      const double dt = scale * base_dt;
      for (std::size_t i = 0; i < n; ++i) {
        candidate[i] = field.phi[i] + dt * force[i];
        if (!std::isfinite(candidate[i]))
          throw std::runtime_error("evolution diverged at iteration " + std::to_string(it));
      }
      std::tie(c1, c2) = means_of(u0, candidate, params, field.c1, field.c2);
      new_energy = energy_of(u0, candidate, w, h, c1, c2, eps, params);
      if (!std::isfinite(new_energy)) throw std::runtime_error("evolution diverged at iteration " + std::to_string(it));
      if (new_energy <= energy) {
        accepted = true;
        trace.dt.push_back(dt);
      } else {
        ++trace.rejected;
        streak = 0;
        scale *= 0.5;
        if (scale < 1e-10) break;
      }
    }
    if (!accepted) {
      trace.converged = true;  // no descent step left at this resolution
      break;
    }

    const std::size_t flips = count_flips(field.phi, candidate);
    field.phi.swap(candidate);
    field.c1 = c1;
    field.c2 = c2;
    energy = new_energy;
    trace.energy.push_back(energy);
    trace.flips.push_back(flips);
    ++trace.iterations;

    if (++streak == 5) {
      scale = std::min(1.0, scale * 1.2);
      streak = 0;
    }
    if (static_cast<double>(flips) <= params.tol * static_cast<double>(n)) {
      if (++stable >= params.patience) {
        trace.converged = true;
        break;
      }
    } else {
      stable = 0;
    }

    if (params.reinit_interval > 0 && (it + 1) % params.reinit_interval == 0) {
      LevelSetField reinit = field;
      reinitialize(reinit);
      const double e = energy_of(u0, reinit.phi, w, h, field.c1, field.c2, eps, params);
      if (e <= energy) {
        field.phi.swap(reinit.phi);
        energy = e;
        trace.energy.back() = energy;
        ++trace.reinitializations;
      }
    }
  }

  if (field.c1 > field.c2) {
    // Negation keeps the energy: H(-phi) = 1 - H(phi).
    for (double& v : field.phi) v = v == 0.0 ? -std::numeric_limits<double>::min() : -v;
    std::swap(field.c1, field.c2);
  }
  result.field = std::move(field);
  return result;
}

void reinitialize(LevelSetField& field) {
  const int w = field.width, h = field.height;
  const std::size_t n = field.phi.size();
  auto idx = [w](int x, int y) {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
  };
  std::vector<double> dist(n, kInf);
  std::vector<char> fixed(n, 0);
  bool any_interface = false;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = idx(x, y);
      const double a = field.phi[i];
      const int nbx[4] = {x - 1, x + 1, x, x};
      const int nby[4] = {y, y, y - 1, y + 1};
      for (int k = 0; k < 4; ++k) {
        if (nbx[k] < 0 || nby[k] < 0 || nbx[k] >= w || nby[k] >= h) continue;
        const double b = field.phi[idx(nbx[k], nby[k])];
        if ((a >= 0.0) == (b >= 0.0)) continue;
        const double denom = std::abs(a) + std::abs(b);
        dist[i] = std::min(dist[i], denom > 0.0 ? std::abs(a) / denom : 0.0);
        fixed[i] = 1;
        any_interface = true;
      }
    }
  if (!any_interface) return;

  auto update = [&](int x, int y) {
    const std::size_t i = idx(x, y);
    if (fixed[i]) return;
    const double a = std::min(x > 0 ? dist[idx(x - 1, y)] : kInf, x + 1 < w ? dist[idx(x + 1, y)] : kInf);
    const double b = std::min(y > 0 ? dist[idx(x, y - 1)] : kInf, y + 1 < h ? dist[idx(x, y + 1)] : kInf);
    if (a == kInf && b == kInf) return;
    double u;
    if (std::abs(a - b) >= 1.0)
      u = std::min(a, b) + 1.0;
    else
      u = 0.5 * (a + b + std::sqrt(2.0 - (a - b) * (a - b)));
    dist[i] = std::min(dist[i], u);
  };
  for (int round = 0; round < 2; ++round) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) update(x, y);
    for (int y = 0; y < h; ++y)
      for (int x = w - 1; x >= 0; --x) update(x, y);
    for (int y = h - 1; y >= 0; --y)
      for (int x = 0; x < w; ++x) update(x, y);
    for (int y = h - 1; y >= 0; --y)
      for (int x = w - 1; x >= 0; --x) update(x, y);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::max(dist[i], 0.0);
    field.phi[i] = field.phi[i] >= 0.0 ? d : -std::max(d, std::numeric_limits<double>::min());
  }
}

std::pair<RegionMask, RegionMask> structure_mask_from_segmentation(const LevelSetField& field) {
  RegionMask phase1(field.width, field.height), phase2(field.width, field.height);
  for (int y = 0; y < field.height; ++y)
    for (int x = 0; x < field.width; ++x) (field(x, y) >= 0.0 ? phase1 : phase2).set(x, y, true);
  return {std::move(phase1), std::move(phase2)};
}

std::vector<int> phase_labels(const LevelSetField& field) {
  std::vector<int> labels(field.phi.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = field.phi[i] >= 0.0 ? 0 : 1;
  return labels;
}

namespace {

// Sparse operator of the region-restricted damped Poisson problem.
struct PoissonSystem {
  int w = 0;
  int h = 0;
  std::vector<int> id;            // pixel -> unknown index, -1 outside
  std::vector<std::size_t> pix;   // unknown index -> pixel
  std::vector<double> diag;
  std::vector<std::array<int, 4>> nbr;
  double mu = 0.0;

  PoissonSystem(const RegionMask& region, const SegParams& params) : w(region.width()), h(region.height()) {
    mu = params.mu_smooth;
    id.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), -1);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (region(x, y)) {
          const std::size_t p = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
          id[p] = static_cast<int>(pix.size());
          pix.push_back(p);
        }
    diag.resize(pix.size());
    nbr.resize(pix.size());
    for (std::size_t k = 0; k < pix.size(); ++k) {
      const int x = static_cast<int>(pix[k] % static_cast<std::size_t>(w));
      const int y = static_cast<int>(pix[k] / static_cast<std::size_t>(w));
      const int nx[4] = {x - 1, x + 1, x, x};
      const int ny[4] = {y, y, y - 1, y + 1};
      int count = 0;
      for (int j = 0; j < 4; ++j) {
        nbr[k][static_cast<std::size_t>(j)] = -1;
        if (nx[j] < 0 || ny[j] < 0 || nx[j] >= w || ny[j] >= h) continue;
        const int other = id[static_cast<std::size_t>(ny[j]) * static_cast<std::size_t>(w) + static_cast<std::size_t>(nx[j])];
        if (other < 0) continue;
        nbr[k][static_cast<std::size_t>(j)] = other;
        ++count;
      }
      diag[k] = lambda_at(params, pix[k]) + mu * count;
    }
  }

  void apply(const std::vector<double>& x, std::vector<double>& out) const {
    const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      double v = diag[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
      for (int j : nbr[static_cast<std::size_t>(k)])
        if (j >= 0) v -= mu * x[static_cast<std::size_t>(j)];
      out[static_cast<std::size_t>(k)] = v;
    }
  }
};

// Fixed-order dot product.
double dot_product(const std::vector<double>& a, const std::vector<double>& b) {
  constexpr std::size_t kBlock = 256;
  const std::size_t blocks = (a.size() + kBlock - 1) / kBlock;
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(blocks); ++bi) {
    double s = 0.0;
    const std::size_t lo = static_cast<std::size_t>(bi) * kBlock, hi = std::min(a.size(), lo + kBlock);
    for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
    partial[static_cast<std::size_t>(bi)] = s;
  }
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

std::vector<double> solve_damped_poisson(const Raster& raster, const RegionMask& region, const SegParams& params) {
  validate(params, raster.width(), raster.height());
  if (region.width() != raster.width() || region.height() != raster.height())
    throw std::invalid_argument("region does not match image");
  if (region.empty()) throw std::invalid_argument("damped Poisson region is empty");
  std::vector<double> u0 = gray_values(raster);
  std::vector<double> u = u0;
  if (params.mu_smooth == 0.0) return u;

  const PoissonSystem sys(region, params);
  const std::size_t m = sys.pix.size();
  std::vector<double> x(m), b(m), r(m), p(m), ap(m);
  for (std::size_t k = 0; k < m; ++k) {
    x[k] = u0[sys.pix[k]];
    b[k] = lambda_at(params, sys.pix[k]) * u0[sys.pix[k]];
  }
  const int cap = params.poisson_max_iters > 0 ? params.poisson_max_iters : static_cast<int>(10 * m) + 100;

  int iterations = 0;
  double residual = kInf;
  // Restarted CG: the recurrence residual is refreshed from the true one.
  while (iterations < cap) {
    sys.apply(x, ap);
    for (std::size_t k = 0; k < m; ++k) r[k] = b[k] - ap[k];
    residual = inf_norm(r);
    if (residual < params.poisson_tol) break;
    p = r;
    double rr = dot_product(r, r);
    const int inner_cap = std::min(cap - iterations, static_cast<int>(m) + 10);
    for (int k = 0; k < inner_cap; ++k, ++iterations) {
      sys.apply(p, ap);
      const double pap = dot_product(p, ap);
      if (pap <= 0.0) break;
      const double alpha = rr / pap;
      for (std::size_t i = 0; i < m; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
      }
      if (inf_norm(r) < 0.25 * params.poisson_tol) {
        ++iterations;
        break;
      }
      const double rr_new = dot_product(r, r);
      const double beta = rr_new / rr;
      rr = rr_new;
      for (std::size_t i = 0; i < m; ++i) p[i] = r[i] + beta * p[i];
    }
    if (inner_cap <= 0) break;
  }
  if (!(residual < params.poisson_tol))
    throw std::runtime_error("damped Poisson solve did not converge; residual " + std::to_string(residual));
  for (std::size_t k = 0; k < m; ++k) u[sys.pix[k]] = x[k];
  return u;
}

double damped_poisson_residual(const Raster& raster, const RegionMask& region, const SegParams& params,
                               const std::vector<double>& u) {
  const std::vector<double> u0 = gray_values(raster);
  const int w = raster.width(), h = raster.height();
  double worst = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!region(x, y)) continue;
      const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
      double lap = 0.0;
      const int nx[4] = {x - 1, x + 1, x, x};
      const int ny[4] = {y, y, y - 1, y + 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h || !region(nx[k], ny[k])) continue;
        lap += u[static_cast<std::size_t>(ny[k]) * static_cast<std::size_t>(w) + static_cast<std::size_t>(nx[k])] - u[i];
      }
      worst = std::max(worst, std::abs(lambda_at(params, i) * (u[i] - u0[i]) - params.mu_smooth * lap));
    }
  return worst;
}

double boundary_flux(const Raster& raster, const RegionMask& region, const SegParams& params,
                     const std::vector<double>& u) {
  if (params.mu_smooth == 0.0) return 0.0;
  const std::vector<double> u0 = gray_values(raster);
  double total = 0.0;
  for (std::size_t i = 0; i < u0.size(); ++i)
    if (region.flags()[i]) total += lambda_at(params, i) * (u[i] - u0[i]);
  return std::abs(total / params.mu_smooth);
}

std::pair<std::vector<double>, std::vector<double>> piecewise_smooth(const Raster& raster, const LevelSetField& field,
                                                                     const SegParams& params) {
  const auto [phase1, phase2] = structure_mask_from_segmentation(field);
  std::vector<double> u1 = phase1.empty() ? gray_values(raster) : solve_damped_poisson(raster, phase1, params);
  std::vector<double> u2 = phase2.empty() ? gray_values(raster) : solve_damped_poisson(raster, phase2, params);
  return {std::move(u1), std::move(u2)};
}

}  // namespace patchfill
