// Serial reference vs OpenMP kernels on the two hot paths: stepping a user
// population through a collection round, and the per-candidate score scan of
// one guidance selection.
#include <benchmark/benchmark.h>

#include "ipg/guidance.hpp"
#include "ipg/harness.hpp"
#include "ipg/kernels.hpp"
#include "ipg/rng.hpp"

namespace {

constexpr uint64_t kSeed = 17;

ipg::World make_world(int n_users, int n_items) {
  ipg::SimConfig sim;
  return ipg::generate_world(n_users, n_items, sim, kSeed, ipg::par::max_threads());
}

void BM_collection_round(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  const int n_users = 2000;
  const int n_items = 1000;
  static ipg::World world = make_world(n_users, n_items);
  ipg::SimConfig sim;
  for (auto _ : state) {
    auto result = ipg::run_log_collection(world, sim, 5, 0.3, kSeed, threads);
    benchmark::DoNotOptimize(result.log.records.data());
  }
}

void BM_ipg_scan(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  const int n_items = 200000;
  static ipg::RecommenderModel model = [] {
    ipg::RecommenderModel m;
    std::mt19937_64 rng = ipg::make_stream(kSeed, ipg::Stream::TrainInit);
    std::normal_distribution<double> noise(0.0, 0.1);
    m.item_table.resize(n_items);
    for (auto& e : m.item_table)
      for (double& v : e) v = noise(rng);
    return m;
  }();
  ipg::Embedding rep{};
  rep[0] = 1.0;
  ipg::SelectContext ctx;
  ctx.model = &model;
  ctx.rep = &rep;
  ctx.target = 7;
  for (auto _ : state) {
    int pick = ipg::select(ipg::Policy{ipg::PolicyKind::IPG}, ctx, n_items, threads);
    benchmark::DoNotOptimize(pick);
  }
}

}  // namespace

BENCHMARK(BM_collection_round)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ipg_scan)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
