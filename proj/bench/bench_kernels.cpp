// Serial reference against the OpenMP kernels. Set OMP_NUM_THREADS to compare.
#include <benchmark/benchmark.h>

#include "iontrap/constants.hpp"
#include "iontrap/spin_motion.hpp"
#include "iontrap/thermal_beam.hpp"

using namespace iontrap;

namespace {

const auto beam = BeamThermalConfig::from_g(49.7, 8.5e-6);
const RamseyConfig ramsey{0.56, constants::two_pi * 32.4e3, constants::two_pi * 150e6, 30.0e-6, 1059};

void thermal_rabi_serial(benchmark::State& st) {
  for (auto _ : st)
    benchmark::DoNotOptimize(mc_thermal_rabi_serial(constants::pi, beam, st.range(0), 1).mean);
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void thermal_rabi_omp(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(mc_thermal_rabi(constants::pi, beam, st.range(0), 1).mean);
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void ramsey_serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(ramsey_pup_mc_serial(ramsey, st.range(0), 1).mean);
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void ramsey_omp(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(ramsey_pup_mc(ramsey, st.range(0), 1).mean);
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

BENCHMARK(thermal_rabi_serial)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(thermal_rabi_omp)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(ramsey_serial)->Arg(1 << 14)->Arg(1 << 17)->Unit(benchmark::kMillisecond);
BENCHMARK(ramsey_omp)->Arg(1 << 14)->Arg(1 << 17)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
