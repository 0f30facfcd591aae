#include <benchmark/benchmark.h>

#include "codedstereo/conv.hpp"
#include "codedstereo/fft.hpp"
#include "codedstereo/optics.hpp"
#include "codedstereo/render.hpp"
#include "codedstereo/rng.hpp"
#include "codedstereo/stereo.hpp"
#include "codedstereo/synth.hpp"
#include "codedstereo/wiener.hpp"

namespace {

using namespace cs;

OpticalConfig default_config() { return OpticalConfig{}; }

void BM_Fft2(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<std::complex<double>> buf(static_cast<size_t>(n) * n);
  Rng rng(1);
  for (auto& v : buf) v = {rng.uniform(), rng.uniform()};
  std::vector<std::complex<double>> out(buf.size());
  for (auto _ : state) {
    fft2_c2c_forward(n, n, buf.data(), out.data());
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_Fft2)->Arg(216)->Arg(256);

void BM_PsfSingle(benchmark::State& state) {
  const OpticalConfig config = default_config();
  const PhaseMask mask = make_cubic_mask(30.0, config);
  for (auto _ : state) {
    Grid k = compute_psf(mask, 96.0, config.wavelengths[1], config);
    benchmark::DoNotOptimize(k.data());
  }
}
BENCHMARK(BM_PsfSingle);

void BM_PsfStack(benchmark::State& state) {
  const OpticalConfig config = default_config();
  const PhaseMask mask = make_cubic_mask(30.0, config);
  for (auto _ : state) {
    PsfStack stack = compute_psf_stack(mask, config);
    benchmark::DoNotOptimize(stack.kernels.data());
  }
}
BENCHMARK(BM_PsfStack)->Unit(benchmark::kMillisecond);

void BM_RenderPair(benchmark::State& state) {
  const OpticalConfig config = default_config();
  const PhaseMask mask = make_cubic_mask(30.0, config);
  const PsfStack stack = compute_psf_stack(mask, config);
  const Scene scene = make_ramp_scene(128, 256, 0.0, 192.0, 7, "bench");
  for (auto _ : state) {
    CodedPair pair = render_stereo_pair_with_stack(scene, stack, config, 0.02, 1, "bench");
    benchmark::DoNotOptimize(pair.coded_left.ch[0].data());
  }
}
BENCHMARK(BM_RenderPair)->Unit(benchmark::kMillisecond);

void BM_StereoMatch(benchmark::State& state) {
  const OpticalConfig config = default_config();
  const PhaseMask mask = make_cubic_mask(30.0, config);
  const PsfStack stack = compute_psf_stack(mask, config);
  const Scene scene = make_ramp_scene(128, 256, 0.0, 192.0, 7, "bench");
  const CodedPair pair = render_stereo_pair_with_stack(scene, stack, config, 0.02, 1, "b");
  for (auto _ : state) {
    StereoResult res = match_stereo(pair.coded_left, pair.coded_right, config);
    benchmark::DoNotOptimize(res.disparity.data());
  }
}
BENCHMARK(BM_StereoMatch)->Unit(benchmark::kMillisecond);

void BM_Wiener(benchmark::State& state) {
  const OpticalConfig config = default_config();
  const PhaseMask mask = make_cubic_mask(30.0, config);
  const PsfStack stack = compute_psf_stack(mask, config);
  const Image img = make_noise_texture(256, 256, 3);
  for (auto _ : state) {
    Image out = wiener_deconvolve(img, stack.kernel(1, 10), 1e-3);
    benchmark::DoNotOptimize(out.ch[0].data());
  }
}
BENCHMARK(BM_Wiener)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
