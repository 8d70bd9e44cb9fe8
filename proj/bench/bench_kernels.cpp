// Serial vs OpenMP kernels on synthetic inputs.
//   ./ev2r_bench --benchmark_filter=meteor

#include <benchmark/benchmark.h>

#include <cmath>
#include <string>
#include <vector>

#include "ev2r/baselines.hpp"
#include "ev2r/kernels.hpp"
#include "ev2r/perturb.hpp"
#include "ev2r/rng.hpp"
#include "ev2r/text.hpp"

using namespace ev2r;

namespace {

const std::vector<std::string> kWords{"the",   "council", "budget", "cut",    "rose",  "report", "city",
                                      "water", "prices",  "school", "voters", "state", "figures", "said",
                                      "in",    "by",      "was",    "not",    "new",   "roads"};

std::string sentence(SeededRng& rng, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += kWords[rng.below(kWords.size())];
  }
  return s + ".";
}

EvidenceSet evidence(SeededRng& rng, std::size_t items) {
  EvidenceSet e;
  for (std::size_t i = 0; i < items; ++i) {
    QAPair qa;
    qa.question = sentence(rng, 6);
    qa.question.back() = '?';
    qa.answer = sentence(rng, 12) + " " + sentence(rng, 9);
    e.items.push_back(qa);
  }
  return e;
}

std::vector<TokenSequence> items(SeededRng& rng, std::size_t n) {
  std::vector<TokenSequence> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(tokenize(sentence(rng, 20)));
  return out;
}

template <bool Parallel>
void BM_pairwise_meteor(benchmark::State& state) {
  SeededRng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = items(rng, n), b = items(rng, n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      benchmark::DoNotOptimize(kernels::pairwise_meteor(a, b));
    } else {
      benchmark::DoNotOptimize(kernels::serial::pairwise_meteor(a, b));
    }
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}

template <bool Parallel>
void BM_batch_score(benchmark::State& state) {
  SeededRng rng(2);
  std::vector<EvidenceSet> cand, ref;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    cand.push_back(evidence(rng, 3));
    ref.push_back(evidence(rng, 3));
  }
  const kernels::EvidenceMetric metric = [](const EvidenceSet& c, const EvidenceSet& r) {
    return baselines::hungarian_meteor(c, r);
  };
  for (auto _ : state) {
    if constexpr (Parallel) {
      benchmark::DoNotOptimize(kernels::batch_score(metric, cand, ref));
    } else {
      benchmark::DoNotOptimize(kernels::serial::batch_score(metric, cand, ref));
    }
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_extreme_permutations(benchmark::State& state) {
  SeededRng rng(3);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = double(i) - double(n - 1) / 2.0;
    y[i] = rng.uniform() - 0.5;
  }
  for (auto _ : state) {
    if constexpr (Parallel) {
      benchmark::DoNotOptimize(kernels::count_extreme_permutations(x, y, 0.5));
    } else {
      benchmark::DoNotOptimize(kernels::serial::count_extreme_permutations(x, y, 0.5));
    }
  }
}

template <bool Parallel>
void BM_generate_suite(benchmark::State& state) {
  SeededRng rng(4);
  std::vector<EvalInstance> instances;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    EvalInstance inst;
    inst.claim.id = "b" + std::to_string(i);
    inst.claim.text = sentence(rng, 10);
    inst.reference_evidence = evidence(rng, 2);
    inst.reference_evidence.provenance = Provenance::reference;
    inst.retrieved_evidence = evidence(rng, 3);
    instances.push_back(inst);
  }
  perturb::SuiteOptions opts;
  opts.seed = 9;
  for (auto _ : state) {
    if constexpr (Parallel) {
      benchmark::DoNotOptimize(perturb::generate_suite(instances, opts));
    } else {
      benchmark::DoNotOptimize(perturb::serial::generate_suite(instances, opts));
    }
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_pairwise_meteor<false>)->Name("pairwise_meteor/serial")->Arg(8)->Arg(32);
BENCHMARK(BM_pairwise_meteor<true>)->Name("pairwise_meteor/omp")->Arg(8)->Arg(32);
BENCHMARK(BM_batch_score<false>)->Name("batch_score/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_batch_score<true>)->Name("batch_score/omp")->Arg(64)->Arg(256);
BENCHMARK(BM_extreme_permutations<false>)->Name("count_extreme_permutations/serial")->Arg(8)->Arg(10);
BENCHMARK(BM_extreme_permutations<true>)->Name("count_extreme_permutations/omp")->Arg(8)->Arg(10);
BENCHMARK(BM_generate_suite<false>)->Name("generate_suite/serial")->Arg(50)->Arg(200);
BENCHMARK(BM_generate_suite<true>)->Name("generate_suite/omp")->Arg(50)->Arg(200);

BENCHMARK_MAIN();
