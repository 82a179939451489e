// Intercept error of the LBW projection on seeded noisy deliveries, next to
// the same statistic for an extended-precision normal-equations fit of the
// same windows. Usage: lbw_calibration [deliveries] [noise_m] [sample_hz]

#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#include "../tests/support/oracles.hpp"

using namespace aware_ground;

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 1000;
  const double sigma = argc > 2 ? std::atof(argv[2]) : 0.005;
  const double hz = argc > 3 ? std::atof(argv[3]) : 100.0;
  const auto g = default_layout();
  const auto zone = stump_zone(g, BowlingEnd::kNorth);

  std::mt19937_64 rng(20240601);
  std::vector<double> err_fit, err_oracle, window_sizes;
  int failures = 0, verdict_agree = 0;
  for (int i = 0; i < n; ++i) {
    const auto spec = oracle::random_lbw_delivery(g, rng, hz);
    const auto sim = simulate_delivery(g, spec, {hz, static_cast<std::uint64_t>(i + 1), sigma, 0.0});
    Track ball(spec.ball_id);
    for (const auto& s : sim.samples) {
      if (s.kind == SensorKind::kBall) ball.ingest(s);
    }
    try {
      const auto windows = bounce_split(ball, g.ball_radius);
      const auto fit = fit_trajectory(ball, windows.back());
      const auto ev = project_to_stumps(fit, zone);
      const Point3 truth = *sim.truth.stump_intercept;
      const double dy = *ev.measurement("intercept_y") - truth.y;
      const double dz = *ev.measurement("intercept_z") - truth.z;
      err_fit.push_back(std::hypot(dy, dz));
      verdict_agree += (ev.verdict == Verdict::kHitting) == *sim.truth.hitting;
      const auto w = ball.window(windows.back().t_start, windows.back().t_end);
      window_sizes.push_back(static_cast<double>(w.size()));
      const auto of = oracle::project(oracle::normal_equations_fit(w), zone.plane_x);
      err_oracle.push_back(std::hypot(of->y - truth.y, of->z - truth.z));
    } catch (const Error& e) {
      ++failures;
    }
  }
  std::printf("deliveries %d  noise %.4f m  rate %.0f Hz  failures %d\n", n, sigma, hz, failures);
  std::printf("window samples    median %.1f  min %.0f\n", oracle::median(window_sizes),
              *std::min_element(window_sizes.begin(), window_sizes.end()));
  std::printf("production fit    median %.5f m  p95 %.5f m  max %.5f m\n", oracle::median(err_fit),
              oracle::percentile(err_fit, 95), oracle::percentile(err_fit, 100));
  std::printf("normal equations  median %.5f m  p95 %.5f m  max %.5f m\n", oracle::median(err_oracle),
              oracle::percentile(err_oracle, 95), oracle::percentile(err_oracle, 100));
  std::printf("verdict agreement %d / %zu\n", verdict_agree, err_fit.size());
  return 0;
}
