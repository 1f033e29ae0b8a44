#include <benchmark/benchmark.h>

#include "tmap/optimize.hpp"
#include "tmap/targets.hpp"
#include "tmap/templates.hpp"
#include "tmap/triangular_map.hpp"

namespace {

using namespace tmap;

ComponentKind kind_arg(const benchmark::State& state) { return static_cast<ComponentKind>(state.range(0)); }

TriangularMap fitted_map(ComponentKind kind) {
  const SampleMatrix x = sample(TargetSpec::banana(), 2000, 1);
  const SampleMatrix u = Standardizer::fit(x).standardize(x);
  TemplateOptions o;
  o.kind = kind;
  o.degree = 3;
  if (kind != ComponentKind::CrossTerm) {
    o.rbf_count = 3;
    o.edge_terms = true;
  }
  return fit_map_from_samples(make_template(2, o, &u), x).map;
}

void BM_Forward(benchmark::State& state) {
  const auto map = fitted_map(kind_arg(state));
  const SampleMatrix x = sample(TargetSpec::banana(), 1000, 2);
  for (auto _ : state) benchmark::DoNotOptimize(map.forward(x));
  state.SetItemsProcessed(state.iterations() * x.rows());
}

void BM_Inverse(benchmark::State& state) {
  const auto map = fitted_map(kind_arg(state));
  const SampleMatrix z = standard_normal_samples(1000, 2, 3);
  for (auto _ : state) benchmark::DoNotOptimize(map.inverse(z));
  state.SetItemsProcessed(state.iterations() * z.rows());
}

void BM_ObjectiveGradient(benchmark::State& state) {
  const SampleMatrix x = sample(TargetSpec::banana(), 2000, 4);
  const SampleMatrix u = Standardizer::fit(x).standardize(x);
  TemplateOptions o;
  o.kind = kind_arg(state);
  o.degree = 3;
  const auto comp = make_template(2, o, &u)[1];
  for (auto _ : state) benchmark::DoNotOptimize(nll_gradient(comp, u));
  state.SetItemsProcessed(state.iterations() * u.rows());
}

void BM_Fit(benchmark::State& state) {
  const SampleMatrix x = sample(TargetSpec::banana(), state.range(1), 5);
  const SampleMatrix u = Standardizer::fit(x).standardize(x);
  TemplateOptions o;
  o.kind = kind_arg(state);
  o.degree = 3;
  const auto templ = make_template(2, o, &u);
  FitOptions f;
  f.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(fit_map_from_samples(templ, x, f));
}

constexpr int kMarginal = static_cast<int>(ComponentKind::Marginal);
constexpr int kSeparable = static_cast<int>(ComponentKind::Separable);
constexpr int kCross = static_cast<int>(ComponentKind::CrossTerm);

}  // namespace

BENCHMARK(BM_Forward)->Arg(kMarginal)->Arg(kSeparable)->Arg(kCross)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Inverse)->Arg(kMarginal)->Arg(kSeparable)->Arg(kCross)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ObjectiveGradient)->Arg(kSeparable)->Arg(kCross)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Fit)->Args({kSeparable, 2000})->Args({kCross, 2000})->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
