#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "patchfill/image.hpp"
#include "patchfill/inpaint.hpp"

namespace patchfill {

using Color = std::array<double, 3>;

/// RGB of a pixel; grey rasters are replicated into all three components.
Color pixel_color(const Raster& raster, int x, int y);

struct SomParams {
  int rows = 4;
  int cols = 4;
  int epochs = 20;
  double lr0 = 0.5;
  double radius0 = 0.0;  // <= 0: max(rows, cols) / 2
  std::uint64_t seed = 7;
  int route_radius = 2;
  bool shuffle = true;  // false keeps the row-major sample order every epoch
};

/// m x n lattice of RGB weight vectors.
class SomGrid {
 public:
  SomGrid() = default;
  SomGrid(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int size() const { return rows_ * cols_; }
  const Color& weight(int k) const { return weights_[static_cast<std::size_t>(k)]; }
  Color& weight(int k) { return weights_[static_cast<std::size_t>(k)]; }

  /// Nearest neuron by Euclidean distance; ties go to the lowest index.
  int bmu(const Color& color) const;

  int epoch = 0;
  double lr0 = 0.0;
  double radius0 = 0.0;
  std::vector<std::size_t> hits;  // training samples won per neuron, last epoch

  friend bool operator==(const SomGrid&, const SomGrid&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Color> weights_;
};

/// Colours of every pixel outside `mask`, in row-major order.
std::vector<Color> training_samples(const Raster& raster, const RegionMask& mask);

/// Online SOM: linear initialisation along the two leading principal axes,
/// samples reshuffled every epoch by a seeded generator, learning rate and
/// neighbourhood radius decaying exponentially to lr0 / 100 and 0.5. The
/// neighbourhood is Gaussian in lattice distance, cut off beyond the radius.
/// `quantization_trace`, when given, receives the mean BMU distance after
/// each epoch.
SomGrid train_som(const Raster& raster, const RegionMask& mask, const SomParams& params,
                  std::vector<double>* quantization_trace = nullptr);

/// Mean distance from each sample to its BMU.
double quantization_error(const SomGrid& som, const std::vector<Color>& samples);

class LayerMap {
 public:
  static constexpr int kUnassigned = -1;

  LayerMap() = default;
  LayerMap(int width, int height, int layer_count);

  int width() const { return width_; }
  int height() const { return height_; }
  int layer_count() const { return layer_count_; }
  int operator()(int x, int y) const { return index_[offset(x, y)]; }
  void set(int x, int y, int layer) { index_[offset(x, y)] = layer; }
  const std::vector<int>& indices() const { return index_; }

  friend bool operator==(const LayerMap&, const LayerMap&) = default;

 private:
  std::size_t offset(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  int layer_count_ = 0;
  std::vector<int> index_;
};

/// BMU index of every known pixel; target pixels stay kUnassigned.
LayerMap assign_layers(const Raster& raster, const RegionMask& mask, const SomGrid& som);

/// Assigns every target pixel to the majority layer among known pixels within
/// Chebyshev `radius` (ties to the lower layer), doubling the radius until
/// some known pixel is found. Returns one mask per layer; together they
/// partition `mask`.
std::vector<RegionMask> route_damaged(const LayerMap& layers, const RegionMask& mask, int radius);

struct LayeredInpaintResult {
  InpaintResult result;
  LayerMap layers;
  std::vector<int> target_layers;  // per pixel; -1 outside the target region
  SomGrid som;
};

/// Inpaints with each target pixel's exemplars restricted to its routed layer.
/// A 1 x 1 grid is plain inpainting.
LayeredInpaintResult inpaint_by_layers(const Raster& raster, const RegionMask& mask, const SomParams& som_params,
                                       const InpaintParams& params);

}  // namespace patchfill
