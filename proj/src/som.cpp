#include "patchfill/som.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace patchfill {

Color pixel_color(const Raster& raster, int x, int y) {
  const double* px = raster.pixel(x, y);
  if (raster.channels() == 1) return {px[0], px[0], px[0]};
  return {px[0], px[1], px[2]};
}

namespace {

double squared_distance(const Color& a, const Color& b) {
  const double d0 = a[0] - b[0], d1 = a[1] - b[1], d2 = a[2] - b[2];
  return d0 * d0 + d1 * d1 + d2 * d2;
}

// Spreads the lattice over the plane of the two leading principal axes,
// +-1 standard deviation along each.
void linear_init(SomGrid& som, const std::vector<Color>& samples) {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const Color& s : samples) mean += Eigen::Vector3d(s[0], s[1], s[2]);
  mean /= static_cast<double>(samples.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Color& s : samples) {
    const Eigen::Vector3d d = Eigen::Vector3d(s[0], s[1], s[2]) - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(samples.size());
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  // Eigenvalues ascend; column 2 is the leading axis.
  const Eigen::Vector3d major = solver.eigenvectors().col(2) * std::sqrt(std::max(solver.eigenvalues()(2), 0.0));
  const Eigen::Vector3d minor = solver.eigenvectors().col(1) * std::sqrt(std::max(solver.eigenvalues()(1), 0.0));
  const bool rows_major = som.rows() >= som.cols();
  for (int i = 0; i < som.rows(); ++i)
    for (int j = 0; j < som.cols(); ++j) {
      const double u = som.rows() > 1 ? 2.0 * i / (som.rows() - 1) - 1.0 : 0.0;
      const double v = som.cols() > 1 ? 2.0 * j / (som.cols() - 1) - 1.0 : 0.0;
      const Eigen::Vector3d w = mean + (rows_major ? u * major + v * minor : v * major + u * minor);
      Color& out = som.weight(i * som.cols() + j);
      for (int c = 0; c < 3; ++c) out[static_cast<std::size_t>(c)] = std::clamp(w(c), 0.0, kMaxIntensity);
    }
}

}  // namespace

SomGrid::SomGrid(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("SOM grid dimensions must be positive");
  weights_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), Color{0.0, 0.0, 0.0});
  hits.assign(weights_.size(), 0);
}

int SomGrid::bmu(const Color& color) const {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < size(); ++k) {
    const double d = squared_distance(color, weights_[static_cast<std::size_t>(k)]);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

std::vector<Color> training_samples(const Raster& raster, const RegionMask& mask) {
  std::vector<Color> samples;
  samples.reserve(raster.pixel_count() - mask.count());
  for (int y = 0; y < raster.height(); ++y)
    for (int x = 0; x < raster.width(); ++x)
      if (!mask(x, y)) samples.push_back(pixel_color(raster, x, y));
  return samples;
}

double quantization_error(const SomGrid& som, const std::vector<Color>& samples) {
  if (samples.empty()) return 0.0;
  double total = 0.0;
  for (const Color& s : samples) total += std::sqrt(squared_distance(s, som.weight(som.bmu(s))));
  return total / static_cast<double>(samples.size());
}

SomGrid train_som(const Raster& raster, const RegionMask& mask, const SomParams& params,
                  std::vector<double>* quantization_trace) {
  if (params.rows < 1 || params.cols < 1 || params.rows * params.cols < 2)
    throw std::invalid_argument("SOM grid needs at least two neurons");
  if (params.rows * params.cols > 255)
    throw std::invalid_argument("SOM grid larger than 255 neurons leaves neurons that never fire");
  if (params.epochs < 1) throw std::invalid_argument("SOM needs at least one epoch");
  if (!(params.lr0 > 0.0 && params.lr0 <= 1.0)) throw std::invalid_argument("SOM learning rate must lie in (0, 1]");

  const std::vector<Color> samples = training_samples(raster, mask);
  if (samples.empty()) throw std::invalid_argument("SOM training set is empty");

  SomGrid som(params.rows, params.cols);
  som.lr0 = params.lr0;
  som.radius0 = params.radius0 > 0.0 ? params.radius0 : std::max(params.rows, params.cols) / 2.0;
  linear_init(som, samples);

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(params.seed);
  const double final_radius = std::min(0.5, som.radius0);

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    const double t = params.epochs > 1 ? static_cast<double>(epoch) / (params.epochs - 1) : 0.0;
    const double lr = params.lr0 * std::pow(0.01, t);
    const double radius = som.radius0 * std::pow(final_radius / som.radius0, t);
    const double inv_2r2 = 1.0 / (2.0 * radius * radius);

    if (params.shuffle) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      const Color& s = samples[idx];
      const int winner = som.bmu(s);
      const int wr = winner / som.cols(), wc = winner % som.cols();
      for (int k = 0; k < som.size(); ++k) {
        const int dr = k / som.cols() - wr, dc = k % som.cols() - wc;
        const double d2 = dr * dr + dc * dc;
        if (d2 > radius * radius) continue;
        const double step = lr * std::exp(-d2 * inv_2r2);
        Color& w = som.weight(k);
        // Convex step toward the sample keeps weights inside [0, 255]^3.
        for (std::size_t c = 0; c < 3; ++c) w[c] += step * (s[c] - w[c]);
      }
    }
    som.epoch = epoch + 1;
    if (quantization_trace) quantization_trace->push_back(quantization_error(som, samples));
  }

  std::fill(som.hits.begin(), som.hits.end(), 0);
  for (const Color& s : samples) ++som.hits[static_cast<std::size_t>(som.bmu(s))];
  return som;
}

LayerMap::LayerMap(int width, int height, int layer_count)
    : width_(width),
      height_(height),
      layer_count_(layer_count),
      index_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), kUnassigned) {}

LayerMap assign_layers(const Raster& raster, const RegionMask& mask, const SomGrid& som) {
  LayerMap map(raster.width(), raster.height(), som.size());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < raster.height(); ++y)
    for (int x = 0; x < raster.width(); ++x)
      if (!mask(x, y)) map.set(x, y, som.bmu(pixel_color(raster, x, y)));
  return map;
}

std::vector<RegionMask> route_damaged(const LayerMap& layers, const RegionMask& mask, int radius) {
  if (radius < 1) throw std::invalid_argument("routing radius must be >= 1");
  if (mask.count() == static_cast<std::size_t>(mask.width()) * static_cast<std::size_t>(mask.height()))
    throw std::invalid_argument("no known context: the target region covers the whole image");
  const int w = mask.width(), h = mask.height();
  const int layer_count = layers.layer_count();
  std::vector<int> route(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), LayerMap::kUnassigned);

#pragma omp parallel for schedule(dynamic, 4)
  for (int y = 0; y < h; ++y) {
    std::vector<int> votes(static_cast<std::size_t>(layer_count));
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      for (int r = radius;; r *= 2) {
        std::fill(votes.begin(), votes.end(), 0);
        int total = 0;
        for (int qy = std::max(0, y - r); qy <= std::min(h - 1, y + r); ++qy)
          for (int qx = std::max(0, x - r); qx <= std::min(w - 1, x + r); ++qx) {
            if (mask(qx, qy)) continue;
            const int layer = layers(qx, qy);
            if (layer < 0) continue;
            ++votes[static_cast<std::size_t>(layer)];
            ++total;
          }
        if (total > 0) {
          route[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] =
              static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
          break;
        }
      }
    }
  }

  std::vector<RegionMask> out(static_cast<std::size_t>(layer_count), RegionMask(w, h));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int layer = route[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)];
      if (layer >= 0) out[static_cast<std::size_t>(layer)].set(x, y, true);
    }
  return out;
}

LayeredInpaintResult inpaint_by_layers(const Raster& raster, const RegionMask& mask, const SomParams& som_params,
                                       const InpaintParams& params) {
  validate(params);
  const std::size_t n = raster.pixel_count();
  if (som_params.rows * som_params.cols == 1) {
    LayeredInpaintResult out{inpaint(raster, mask, params), LayerMap(raster.width(), raster.height(), 1),
                             std::vector<int>(n, -1), SomGrid(1, 1)};
    for (int y = 0; y < raster.height(); ++y)
      for (int x = 0; x < raster.width(); ++x) {
        if (mask(x, y))
          out.target_layers[static_cast<std::size_t>(y) * static_cast<std::size_t>(raster.width()) +
                            static_cast<std::size_t>(x)] = 0;
        else
          out.layers.set(x, y, 0);
      }
    return out;
  }

  SomGrid som = train_som(raster, mask, som_params);
  LayerMap layers = assign_layers(raster, mask, som);
  const std::vector<RegionMask> routes = route_damaged(layers, mask, som_params.route_radius);

  InpaintParams restricted = params;
  restricted.source_labels = layers.indices();
  restricted.target_labels.assign(n, -1);
  for (std::size_t layer = 0; layer < routes.size(); ++layer) {
    const auto flags = routes[layer].flags();
    for (std::size_t i = 0; i < n; ++i)
      if (flags[i]) restricted.target_labels[i] = static_cast<int>(layer);
  }
  std::vector<int> target_layers = restricted.target_labels;
  return {inpaint(raster, mask, restricted), std::move(layers), std::move(target_layers), std::move(som)};
}

}  // namespace patchfill
