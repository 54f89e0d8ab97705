// Serial reference kernels against their OpenMP counterparts, and exhaustive
// search against successive elimination.

#include <benchmark/benchmark.h>

#include "patchfill/bilateral.hpp"
#include "patchfill/energy.hpp"
#include "patchfill/fill_front.hpp"
#include "patchfill/fixtures.hpp"
#include "patchfill/inpaint.hpp"
#include "patchfill/patch_search.hpp"
#include "patchfill/serial.hpp"
#include "patchfill/som.hpp"

using namespace patchfill;

namespace {

const Raster& texture() {
  static const Raster img = fixtures::two_texture(160, 120, 7);
  return img;
}

const RegionMask& hole() {
  static const RegionMask m = fixtures::blob_mask(160, 120, 0.08, 6, 8);
  return m;
}

void BM_BilateralSerial(benchmark::State& state) {
  const auto p = BilateralParams::from_sigmas(2.0, 25.0);
  for (auto _ : state) benchmark::DoNotOptimize(serial::bilateral_filter(texture(), p));
}

void BM_BilateralParallel(benchmark::State& state) {
  const auto p = BilateralParams::from_sigmas(2.0, 25.0);
  for (auto _ : state) benchmark::DoNotOptimize(bilateral_filter(texture(), p));
}

void BM_EnergySerial(benchmark::State& state) {
  const RegionMask m = fixtures::blob_mask(80, 60, 0.05, 6, 9);
  const Raster img = fixtures::two_texture(80, 60, 7);
  for (auto _ : state) benchmark::DoNotOptimize(serial::global_patch_energy(img, m, 7));
}

void BM_EnergyParallel(benchmark::State& state) {
  const RegionMask m = fixtures::blob_mask(80, 60, 0.05, 6, 9);
  const Raster img = fixtures::two_texture(80, 60, 7);
  for (auto _ : state) benchmark::DoNotOptimize(global_patch_energy(img, m, 7));
}

SomGrid trained_grid() {
  SomParams p;
  p.rows = 4;
  p.cols = 4;
  p.epochs = 3;
  return train_som(texture(), hole(), p);
}

void BM_AssignLayersSerial(benchmark::State& state) {
  const SomGrid som = trained_grid();
  for (auto _ : state) benchmark::DoNotOptimize(serial::assign_layers(texture(), hole(), som));
}

void BM_AssignLayersParallel(benchmark::State& state) {
  const SomGrid som = trained_grid();
  for (auto _ : state) benchmark::DoNotOptimize(assign_layers(texture(), hole(), som));
}

// One query per front pixel of the hole, patch size from the argument.
struct SearchScene {
  CandidateIndex index;
  RowPrefixSums prefix;
  std::vector<PatchQuery> queries;
  explicit SearchScene(int ps) : index(hole(), ps), prefix(texture()) {
    const auto front = extract_front(hole());
    for (std::size_t i = 0; i < front.size(); i += 8) queries.push_back(PatchQuery::build(texture(), hole(), front[i], ps));
  }
};

void BM_SearchSerialBrute(benchmark::State& state) {
  const SearchScene s(static_cast<int>(state.range(0)));
  for (auto _ : state)
    for (const auto& q : s.queries) benchmark::DoNotOptimize(serial::best_match_bruteforce(q, texture(), hole()));
}

void BM_SearchBrute(benchmark::State& state) {
  const SearchScene s(static_cast<int>(state.range(0)));
  for (auto _ : state)
    for (const auto& q : s.queries) benchmark::DoNotOptimize(best_match_bruteforce(q, texture(), s.index));
}

void BM_SearchSea(benchmark::State& state) {
  const SearchScene s(static_cast<int>(state.range(0)));
  for (auto _ : state)
    for (const auto& q : s.queries) benchmark::DoNotOptimize(best_match_sea(q, texture(), s.prefix, s.index));
}

void BM_Inpaint(benchmark::State& state) {
  InpaintParams p;
  p.patch_size = 9;
  p.use_sea = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(inpaint(texture(), hole(), p));
  state.SetLabel(p.use_sea ? "sea" : "brute");
}

}  // namespace

BENCHMARK(BM_BilateralSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BilateralParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnergySerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnergyParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssignLayersSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssignLayersParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SearchSerialBrute)->Arg(5)->Arg(9)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SearchBrute)->Arg(5)->Arg(9)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SearchSea)->Arg(5)->Arg(9)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Inpaint)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->Iterations(1);

BENCHMARK_MAIN();
