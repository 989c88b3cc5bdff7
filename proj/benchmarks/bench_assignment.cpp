#include <random>

#include <benchmark/benchmark.h>

#include "msglmb/assignment.hpp"

namespace {

msglmb::CostMatrix random_costs(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    msglmb::CostMatrix c(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) c(i, j) = u(rng);
    return c;
}

void BM_Munkres(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto c = random_costs(n, n, 42);
    for (auto _ : state) {
        auto a = msglmb::munkres(c);
        benchmark::DoNotOptimize(a);
    }
}
BENCHMARK(BM_Munkres)->Arg(8)->Arg(16)->Arg(32)->Arg(64);

void BM_MurtyTop30(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto c = random_costs(n, n + 4, 7);
    for (auto _ : state) {
        msglmb::MurtyIterator it(c);
        for (int k = 0; k < 30 && it.has_next(); ++k) {
            auto a = it.get_next();
            benchmark::DoNotOptimize(a);
        }
    }
}
BENCHMARK(BM_MurtyTop30)->Arg(6)->Arg(10)->Arg(14);

void BM_KMinSum(benchmark::State& state) {
    const int arrays = static_cast<int>(state.range(0));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<std::vector<double>> in(static_cast<std::size_t>(arrays));
    for (auto& a : in) {
        a.resize(30);
        for (auto& v : a) v = u(rng);
    }
    for (auto _ : state) {
        auto sel = msglmb::k_min_sum(in, 30);
        benchmark::DoNotOptimize(sel);
    }
}
BENCHMARK(BM_KMinSum)->Arg(2)->Arg(4)->Arg(8);

}  // namespace
