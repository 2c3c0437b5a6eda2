#include <benchmark/benchmark.h>

#include "momentkit/kernel_basis.hpp"
#include "momentkit/rng.hpp"

using namespace momentkit;

namespace {

KernelBasis gaussian_family() {
  BasisSpec spec;
  spec.kind = BasisKind::GaussianMonomial;
  spec.domain = BoxDomain::interval(-2.0, 2.0);
  spec.centers = BasisSpec::equidistant_centers(-1.5, 1.5, 7);
  spec.sigma = 2.0 / 3.0;
  return make_basis(spec);
}

Matrix random_points(const BoxDomain& box, int n, std::uint64_t seed) {
  CounterRng rng(seed);
  Matrix pts(n, box.dim());
  std::uint64_t ctr = 0;
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < box.dim(); ++a)
      pts(i, a) = rng.uniform(ctr++, box.lower(a), box.upper(a));
  return pts;
}

}  // namespace

static void BM_EvalGaussianFamily(benchmark::State& state) {
  KernelBasis basis = gaussian_family();
  Matrix pts = random_points(basis.domain(), static_cast<int>(state.range(0)), 1);
  for (auto _ : state) {
    EvalTable table = eval_basis(basis, pts);
    benchmark::DoNotOptimize(table.values.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * basis.size());
}
BENCHMARK(BM_EvalGaussianFamily)->Arg(1000)->Arg(10000);

static void BM_EvalPoly2D(benchmark::State& state) {
  BasisSpec spec;
  spec.kind = BasisKind::Poly2D;
  spec.domain = BoxDomain::square(-2.0, 2.0);
  spec.degree = 7;
  KernelBasis basis = make_basis(spec);
  Matrix pts = random_points(basis.domain(), static_cast<int>(state.range(0)), 2);
  for (auto _ : state) {
    EvalTable table = eval_basis(basis, pts);
    benchmark::DoNotOptimize(table.values.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * basis.size());
}
BENCHMARK(BM_EvalPoly2D)->Arg(1000)->Arg(10000);

BENCHMARK_MAIN();
