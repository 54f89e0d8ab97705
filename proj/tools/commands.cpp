#include "commands.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "patchfill/energy.hpp"
#include "patchfill/fixtures.hpp"
#include "patchfill/image_io.hpp"
#include "patchfill/inpaint.hpp"
#include "patchfill/level_set.hpp"
#include "patchfill/patch_search.hpp"
#include "patchfill/som.hpp"

namespace patchfill::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void configure_threads(int threads) {
  if (threads <= 0) {
    if (const char* env = std::getenv("INPAINT_THREADS"); env && *env) {
      char* end = nullptr;
      const long n = std::strtol(env, &end, 10);
      if (*end != '\0' || n <= 0) throw UsageError(std::string("INPAINT_THREADS must be a positive integer: ") + env);
      threads = static_cast<int>(n);
    }
  }
  if (threads > 0) omp_set_num_threads(threads);
}

std::pair<int, int> parse_grid(const std::string& text) {
  int m = 0, n = 0;
  char x = 0, extra = 0;
  if (std::sscanf(text.c_str(), "%d%c%d%c", &m, &x, &n, &extra) != 3 || (x != 'x' && x != 'X') || m < 1 || n < 1)
    throw UsageError("grid must look like MxN: " + text);
  return {m, n};
}

BilateralParams parse_bilateral(const std::string& text) {
  double s = 0.0, r = 0.0;
  char comma = 0, extra = 0;
  if (std::sscanf(text.c_str(), "%lf%c%lf%c", &s, &comma, &r, &extra) != 3 || comma != ',')
    throw UsageError("bilateral must look like SIGMA_S,SIGMA_R: " + text);
  BilateralParams p = BilateralParams::from_sigmas(s, r);
  try {
    validate(p);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return p;
}

void check_patch(int patch) {
  if (patch % 2 == 0) throw UsageError("patch size must be odd");
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path);
  if (!file) throw ImageIoError("cannot write " + path);
  file << text;
}

// Mask from a file when given, else from sentinel pixels.
RegionMask resolve_mask(const Raster& image, const std::string& mask_path, std::optional<double> marker) {
  if (!mask_path.empty()) {
    RegionMask mask = load_mask(mask_path);
    if (mask.width() != image.width() || mask.height() != image.height())
      throw std::invalid_argument("mask and image dimensions differ");
    return mask;
  }
  if (marker) return detect_damaged(image, *marker);
  throw UsageError("either --mask or --marker is required");
}

std::vector<double> load_lambda_map(const std::string& path, const Raster& image) {
  const Raster map = to_gray(load_raster(path));
  if (map.width() != image.width() || map.height() != image.height())
    throw std::invalid_argument("lambda map and image dimensions differ");
  std::vector<double> lambda(map.data().begin(), map.data().end());
  for (double& v : lambda) v /= kMaxIntensity;
  return lambda;
}

Raster label_image(const LevelSetField& field) {
  Raster out(field.width, field.height, 1);
  for (int y = 0; y < field.height; ++y)
    for (int x = 0; x < field.width; ++x) out.set(x, y, 0, field(x, y) >= 0.0 ? 0.0 : kMaxIntensity);
  return out;
}

// ---------------------------------------------------------------- inpaint

struct InpaintArgs {
  std::string in, mask, out, report;
  std::optional<double> marker;
  int patch = 9;
  std::optional<int> radius;
  bool no_sea = false;
  std::string bilateral;
  bool allow_filled = false;
  bool energy = false;
  std::string grid;
  std::uint64_t seed = 7;
  bool phase_guided = false;
  double nu = SegParams{}.nu;
  int iters = SegParams{}.max_iters;
};

int cmd_inpaint(const InpaintArgs& a, std::ostream& out) {
  check_patch(a.patch);
  InpaintParams params;
  params.patch_size = a.patch;
  params.search_radius = a.radius;
  params.use_sea = !a.no_sea;
  params.allow_filled_sources = a.allow_filled;
  params.rng_seed = a.seed;
  if (!a.bilateral.empty()) params.bilateral = parse_bilateral(a.bilateral);
  try {
    validate(params);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::optional<SomParams> som;
  if (!a.grid.empty()) {
    const auto [m, n] = parse_grid(a.grid);
    som = SomParams{};
    som->rows = m;
    som->cols = n;
    som->seed = a.seed;
  }
  if (som && a.phase_guided) throw UsageError("--grid and --phase-guided are exclusive");

  const Raster image = load_raster(a.in);
  const RegionMask mask = resolve_mask(image, a.mask, a.marker);

  if (a.phase_guided) {
    SegParams seg;
    seg.nu = a.nu;
    seg.max_iters = a.iters;
    seg.lambda.assign(image.pixel_count(), 1.0);
    for (std::size_t i = 0; i < seg.lambda.size(); ++i)
      if (mask.flags()[i]) seg.lambda[i] = 0.0;
    const auto field = evolve_level_set(image, checkerboard_level_set(image.width(), image.height()), seg).field;
    params.source_labels = phase_labels(field);
    params.target_labels = params.source_labels;
  }

  InpaintResult result = som ? inpaint_by_layers(image, mask, *som, params).result : inpaint(image, mask, params);
  if (a.energy) result.report.energy = global_patch_energy(result.image, mask, params.patch_size);
  save_raster(result.image, a.out);
  const std::string report = result.report.to_key_value();
  out << report;
  if (!a.report.empty()) write_text(a.report, report, out);
  return kExitOk;
}

// ---------------------------------------------------------------- bench

struct BenchFixture {
  std::string id;
  Raster image;
  RegionMask mask;
  std::optional<Raster> truth;
  std::vector<int> patches;
};

std::vector<BenchFixture> builtin_fixtures(std::uint64_t seed) {
  std::vector<BenchFixture> list;
  Raster texture = fixtures::two_texture(400, 300, seed);
  RegionMask blob = fixtures::blob_mask(400, 300, 0.10, 10, seed + 1);
  list.push_back({"two_texture", texture, std::move(blob), texture, {9}});
  Raster tile = fixtures::periodic_tile(64, 64, 5, 3, seed);
  list.push_back({"periodic", tile, fixtures::centered_square(64, 64, 20), tile, {5, 9}});
  return list;
}

std::optional<fs::path> find_image(const fs::path& dir, const std::string& stem) {
  for (const char* ext : {".png", ".ppm", ".pgm"})
    if (fs::exists(dir / (stem + ext))) return dir / (stem + ext);
  return std::nullopt;
}

std::vector<BenchFixture> directory_fixtures(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("fixture missing: " + dir.string());
  std::vector<std::string> stems;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string ext = entry.path().extension().string();
    const std::string stem = entry.path().stem().string();
    if (ext != ".png" && ext != ".ppm" && ext != ".pgm") continue;
    if (stem.ends_with("_mask") || stem.ends_with("_gt")) continue;
    stems.push_back(stem);
  }
  std::sort(stems.begin(), stems.end());
  stems.erase(std::unique(stems.begin(), stems.end()), stems.end());
  std::vector<BenchFixture> list;
  for (const std::string& stem : stems) {
    const auto mask_path = find_image(dir, stem + "_mask");
    if (!mask_path) throw std::runtime_error("fixture missing: no mask for " + stem);
    BenchFixture f{stem, load_raster(*find_image(dir, stem)), load_mask(*mask_path), std::nullopt, {9}};
    if (const auto gt = find_image(dir, stem + "_gt")) f.truth = load_raster(*gt);
    list.push_back(std::move(f));
  }
  if (list.empty()) throw std::runtime_error("fixture missing: no images in " + dir.string());
  return list;
}

struct BenchArgs {
  std::string fixtures_dir;
  std::string only;
  std::vector<int> patches;
  std::string strategies = "brute,sea";
  bool no_energy = false;
  std::string out;
  std::optional<int> radius;
  std::uint64_t seed = 7;
};

std::vector<std::string> split_strategies(const std::string& text) {
  std::vector<std::string> list;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item != "brute" && item != "sea") throw UsageError("unknown strategy: " + item);
    if (std::find(list.begin(), list.end(), item) == list.end()) list.push_back(item);
  }
  if (list.empty()) throw UsageError("no strategy given");
  return list;
}

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  const std::vector<std::string> strategies = split_strategies(a.strategies);
  for (int p : a.patches) check_patch(p);
  std::vector<BenchFixture> list = a.fixtures_dir.empty() ? builtin_fixtures(a.seed) : directory_fixtures(a.fixtures_dir);
  if (!a.only.empty()) {
    std::erase_if(list, [&](const BenchFixture& f) { return f.id != a.only; });
    if (list.empty()) throw std::runtime_error("fixture missing: " + a.only);
  }
  if (!a.patches.empty())
    for (BenchFixture& f : list) f.patches = a.patches;

  std::ostringstream csv;
  csv << "id,w,h,mask_frac,patch,strategy,seconds,examined,pruned,energy,psnr\n";
  bool identical = true;
  for (const BenchFixture& f : list) {
    const double mask_frac = static_cast<double>(f.mask.count()) / static_cast<double>(f.image.pixel_count());
    for (int patch : f.patches) {
      InpaintParams params;
      params.patch_size = patch;
      params.search_radius = a.radius;
      try {
        validate(params);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      std::vector<InpaintResult> runs;
      std::vector<double> seconds;
      for (const std::string& s : strategies) {
        params.use_sea = s == "sea";
        const auto start = std::chrono::steady_clock::now();
        runs.push_back(inpaint(f.image, f.mask, params));
        seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
      }
      for (std::size_t k = 1; k < runs.size(); ++k)
        if (!(runs[k].image == runs[0].image)) {
          identical = false;
          err << "outputs differ between strategies on " << f.id << " patch " << patch << "\n";
        }
      // Identical outputs share one energy and PSNR.
      const std::string energy =
          a.no_energy ? "" : format_double(global_patch_energy(runs[0].image, f.mask, patch));
      const std::string quality = f.truth ? format_double(psnr(runs[0].image, *f.truth)) : "";
      for (std::size_t k = 0; k < runs.size(); ++k) {
        const std::string psnr_k = k == 0 || runs[k].image == runs[0].image
                                       ? quality
                                       : (f.truth ? format_double(psnr(runs[k].image, *f.truth)) : "");
        char frac[32], secs[32];
        std::snprintf(frac, sizeof frac, "%.4f", mask_frac);
        std::snprintf(secs, sizeof secs, "%.6f", seconds[k]);
        csv << f.id << ',' << f.image.width() << ',' << f.image.height() << ',' << frac << ',' << patch << ','
            << strategies[k] << ',' << secs << ',' << runs[k].report.examined << ',' << runs[k].report.pruned << ','
            << (k == 0 || runs[k].image == runs[0].image ? energy : "") << ',' << psnr_k << "\n";
      }
    }
  }
  write_text(a.out, csv.str(), out);
  return identical ? kExitOk : kExitProcessing;
}

// ---------------------------------------------------------------- segment

struct SegmentArgs {
  std::string in, out, report, lambda_map, mask, smooth_out;
  double nu = SegParams{}.nu;
  int iters = SegParams{}.max_iters;
  double dt = 0.0;
  double mu = SegParams{}.mu_smooth;
};

int cmd_segment(const SegmentArgs& a, std::ostream& out) {
  SegParams params;
  params.nu = a.nu;
  params.max_iters = a.iters;
  params.dt = a.dt;
  params.mu_smooth = a.mu;
  const Raster image = load_raster(a.in);
  if (!a.lambda_map.empty()) params.lambda = load_lambda_map(a.lambda_map, image);
  if (!a.mask.empty()) {
    const RegionMask mask = load_mask(a.mask);
    if (mask.width() != image.width() || mask.height() != image.height())
      throw std::invalid_argument("mask and image dimensions differ");
    if (params.lambda.empty()) params.lambda.assign(image.pixel_count(), 1.0);
    for (std::size_t i = 0; i < params.lambda.size(); ++i)
      if (mask.flags()[i]) params.lambda[i] = 0.0;
  }
  try {
    validate(params, image.width(), image.height());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const SegmentationResult result =
      evolve_level_set(image, checkerboard_level_set(image.width(), image.height()), params);
  save_raster(label_image(result.field), a.out);

  std::ostringstream csv;
  csv << "iteration,energy,dt,flips\n";
  const EvolutionTrace& t = result.trace;
  for (std::size_t i = 0; i < t.energy.size(); ++i) {
    csv << i << ',' << format_double(t.energy[i]) << ',';
    if (i > 0) csv << format_double(t.dt[i - 1]) << ',' << t.flips[i - 1];
    else csv << ',';
    csv << "\n";
  }
  write_text(a.report, csv.str(), out);
  if (!a.report.empty())
    out << "c1=" << format_double(result.field.c1) << "\nc2=" << format_double(result.field.c2)
        << "\niterations=" << t.iterations << "\nconverged=" << (t.converged ? 1 : 0) << "\n";

  if (!a.smooth_out.empty()) {
    const auto [u1, u2] = piecewise_smooth(image, result.field, params);
    Raster smooth(image.width(), image.height(), 1);
    for (int y = 0; y < image.height(); ++y)
      for (int x = 0; x < image.width(); ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(image.width()) +
                              static_cast<std::size_t>(x);
        smooth.set(x, y, 0, std::clamp(result.field(x, y) >= 0.0 ? u1[i] : u2[i], 0.0, kMaxIntensity));
      }
    save_raster(smooth, a.smooth_out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- layers

struct LayersArgs {
  std::string in, mask, out, report;
  std::optional<double> marker;
  std::string grid = "4x4";
  std::uint64_t seed = 7;
  int epochs = SomParams{}.epochs;
};

int cmd_layers(const LayersArgs& a, std::ostream& out) {
  SomParams params;
  std::tie(params.rows, params.cols) = parse_grid(a.grid);
  params.seed = a.seed;
  params.epochs = a.epochs;
  if (params.rows * params.cols < 2 || params.rows * params.cols > 255)
    throw UsageError("grid must have between 2 and 255 neurons");
  if (params.epochs < 1) throw UsageError("epochs must be positive");

  const Raster image = load_raster(a.in);
  const RegionMask mask = a.mask.empty() && !a.marker ? RegionMask(image.width(), image.height())
                                                      : resolve_mask(image, a.mask, a.marker);
  const SomGrid som = train_som(image, mask, params);
  const LayerMap layers = assign_layers(image, mask, som);
  std::vector<int> index = layers.indices();
  if (!mask.empty()) {
    const auto routes = route_damaged(layers, mask, params.route_radius);
    for (std::size_t l = 0; l < routes.size(); ++l)
      for (std::size_t i = 0; i < index.size(); ++i)
        if (routes[l].flags()[i]) index[i] = static_cast<int>(l);
  }
  Raster picture(image.width(), image.height(), 1);
  const double scale = kMaxIntensity / (som.size() - 1);
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x) {
      const int l = index[static_cast<std::size_t>(y) * static_cast<std::size_t>(image.width()) +
                          static_cast<std::size_t>(x)];
      picture.set(x, y, 0, std::round(std::max(l, 0) * scale));
    }
  save_raster(picture, a.out);

  std::ostringstream csv;
  csv << "neuron,row,col,r,g,b,hits\n";
  for (int k = 0; k < som.size(); ++k) {
    const Color& w = som.weight(k);
    csv << k << ',' << k / som.cols() << ',' << k % som.cols() << ',' << format_double(w[0]) << ','
        << format_double(w[1]) << ',' << format_double(w[2]) << ',' << som.hits[static_cast<std::size_t>(k)] << "\n";
  }
  write_text(a.report, csv.str(), out);
  return kExitOk;
}

// ---------------------------------------------------------------- energy

struct EnergyArgs {
  std::string in, mask;
  int patch = 9;
};

int cmd_energy(const EnergyArgs& a, std::ostream& out) {
  check_patch(a.patch);
  if (a.patch < 1) throw UsageError("patch size must be positive");
  const Raster image = load_raster(a.in);
  const RegionMask mask = load_mask(a.mask);
  if (mask.width() != image.width() || mask.height() != image.height())
    throw std::invalid_argument("mask and image dimensions differ");
  out << format_double(global_patch_energy(image, mask, a.patch)) << "\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exemplar-based inpainting, segmentation and colour layering"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: INPAINT_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  InpaintArgs ia;
  CLI::App* inp = app.add_subcommand("inpaint", "Fill the masked region of an image");
  inp->add_option("--in", ia.in, "Input image")->required()->check(CLI::ExistingFile);
  inp->add_option("--mask", ia.mask, "Mask image; nonzero marks pixels to fill")->check(CLI::ExistingFile);
  inp->add_option("--marker", ia.marker, "Sentinel value marking damaged pixels (used without --mask)");
  inp->add_option("--out", ia.out, "Output image")->required();
  inp->add_option("--patch", ia.patch, "Patch side (odd, >= 5)");
  inp->add_option("--radius", ia.radius, "Search window half-side (default: whole image)");
  inp->add_flag("--no-sea", ia.no_sea, "Exhaustive search instead of successive elimination");
  inp->add_option("--bilateral", ia.bilateral, "Denoise the matching guide: SIGMA_S,SIGMA_R");
  inp->add_flag("--allow-filled-sources", ia.allow_filled, "Let filled pixels serve as exemplars");
  inp->add_flag("--energy", ia.energy, "Report the patch-coherence energy of the result");
  inp->add_option("--grid", ia.grid, "Restrict exemplars to SOM colour layers, MxN");
  inp->add_option("--seed", ia.seed, "SOM seed");
  inp->add_flag("--phase-guided", ia.phase_guided, "Restrict exemplars to the same two-phase segment");
  inp->add_option("--nu", ia.nu, "Contour weight for --phase-guided");
  inp->add_option("--iters", ia.iters, "Level-set iterations for --phase-guided");
  inp->add_option("--report", ia.report, "Also write the report to FILE");
  inp->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  BenchArgs ba;
  CLI::App* bench = app.add_subcommand("bench", "Compare exhaustive and elimination search");
  bench->add_option("--fixtures", ba.fixtures_dir, "Directory of NAME.png + NAME_mask.png [+ NAME_gt.png]");
  bench->add_option("--only", ba.only, "Run a single fixture by id");
  bench->add_option("--patch", ba.patches, "Patch sizes (repeatable)");
  bench->add_option("--strategies", ba.strategies, "Comma list of brute,sea");
  bench->add_option("--radius", ba.radius, "Search window half-side");
  bench->add_flag("--no-energy", ba.no_energy, "Skip the energy column");
  bench->add_option("--seed", ba.seed, "Seed of the built-in fixtures");
  bench->add_option("--out", ba.out, "CSV file (default: standard output)");
  bench->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  SegmentArgs sa;
  CLI::App* seg = app.add_subcommand("segment", "Two-phase piecewise-constant segmentation");
  seg->add_option("--in", sa.in, "Input image")->required()->check(CLI::ExistingFile);
  seg->add_option("--out", sa.out, "Label image: 0 for the darker phase, 255 for the brighter")->required();
  seg->add_option("--nu", sa.nu, "Contour-length weight");
  seg->add_option("--lambda-map", sa.lambda_map, "Per-pixel data weight image, value / 255")
      ->check(CLI::ExistingFile);
  seg->add_option("--mask", sa.mask, "Pixels whose data weight is set to zero")->check(CLI::ExistingFile);
  seg->add_option("--iters", sa.iters, "Maximum iterations")->check(CLI::NonNegativeNumber);
  seg->add_option("--dt", sa.dt, "Time step (<= 0: automatic)");
  seg->add_option("--mu", sa.mu, "Smoothness weight for --smooth-out");
  seg->add_option("--smooth-out", sa.smooth_out, "Write the piecewise-smooth approximation");
  seg->add_option("--report", sa.report, "Energy CSV (default: standard output)");
  seg->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  LayersArgs la;
  CLI::App* lay = app.add_subcommand("layers", "Split an image into SOM colour layers");
  lay->add_option("--in", la.in, "Input image")->required()->check(CLI::ExistingFile);
  lay->add_option("--mask", la.mask, "Pixels excluded from training")->check(CLI::ExistingFile);
  lay->add_option("--marker", la.marker, "Sentinel value excluded from training");
  lay->add_option("--out", la.out, "Layer-index image scaled to 0..255")->required();
  lay->add_option("--grid", la.grid, "Lattice MxN");
  lay->add_option("--seed", la.seed, "Shuffle seed");
  lay->add_option("--epochs", la.epochs, "Training epochs");
  lay->add_option("--report", la.report, "Hit-count CSV (default: standard output)");
  lay->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  EnergyArgs ea;
  CLI::App* en = app.add_subcommand("energy", "Patch-coherence energy of a completed image");
  en->add_option("--in", ea.in, "Completed image")->required()->check(CLI::ExistingFile);
  en->add_option("--orig-mask", ea.mask, "Original target region")->required()->check(CLI::ExistingFile);
  en->add_option("--patch", ea.patch, "Patch side (odd)");
  en->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    configure_threads(threads);
    if (*inp) return cmd_inpaint(ia, out);
    if (*bench) return cmd_bench(ba, out, err);
    if (*seg) return cmd_segment(sa, out);
    if (*lay) return cmd_layers(la, out);
    return cmd_energy(ea, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitProcessing;
  }
}

}  // namespace patchfill::cli
