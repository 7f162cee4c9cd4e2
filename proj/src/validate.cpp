#include "amor/validate.hpp"

#include <cmath>
#include <complex>
#include <cstring>
#include <exception>
#include <functional>
#include <random>

#include "amor/core.hpp"
#include "amor/dsp.hpp"
#include "amor/io.hpp"
#include "amor/noise.hpp"
#include "amor/pipeline.hpp"
#include "amor/spin.hpp"
#include "amor/units.hpp"

namespace amor {

namespace {

CheckResult guarded(const std::string& name, double tolerance,
                    const std::function<CheckResult()>& body) {
  try {
    CheckResult r = body();
    r.name = name;
    r.tolerance = tolerance;
    return r;
  } catch (const std::exception& e) {
    return {name, false, std::nan(""), tolerance, std::string("error: ") + e.what()};
  }
}

CheckResult rwa_check(const ValidatedConfig& vc) {
  const auto& c = vc.config;
  const double g = c.cell.relaxation_Gamma;
  const double wm = vc.derived.omega_mod;
  const auto drive = pump_fundamental(c.pump);
  const double dt = vc.derived.dt;
  double worst = 0.0;
  std::string worst_at;
  for (double k : {-10.0, -3.0, -1.0, 0.0, 1.0, 3.0, 10.0}) {
    const double delta = k * g;
    SpinDynamics d = SpinDynamics::from_config(vc);
    d.omega_bias = wm - delta;
    d.omega_injection = 0.0;
    SpinIntegrator integ(d, dt);
    const auto skip = static_cast<std::size_t>(std::ceil(c.simulation.transient_relaxation_times / (g * dt)));
    for (std::size_t i = 0; i < skip; ++i) integ.step();
    SpinTrajectory traj;
    traj.dt = dt;
    traj.start_time = integ.time();
    const auto m = static_cast<std::size_t>(std::llround(200.0 / (c.pump.mod_freq * dt)));
    traj.samples.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      traj.samples.push_back(integ.state());
      integ.step();
    }
    const auto num = rwa_from_coefficient(corotating_coefficient(traj, c.pump.mod_freq), drive, delta);
    const auto ref = rwa_steady_state(delta, g, drive.R1);
    const double dev = std::abs(num.amplitude / ref.amplitude - 1.0);
    if (dev >= worst) {
      worst = dev;
      worst_at = "Delta/Gamma=" + io::format_double(k);
    }
  }
  const double limit = max_integration_step(SpinDynamics::from_config(vc));
  const bool step_ok = dt <= limit * (1.0 + 1e-12);
  std::string detail = "worst relative amplitude error at " + worst_at;
  if (!step_ok) {
    detail += "; step " + io::format_double(dt) + " s exceeds the limit " + io::format_double(limit) + " s";
  }
  return {"", step_ok && worst <= 0.02, worst, 0.0, detail};
}

CheckResult lockin_tone_check(const ValidatedConfig& vc) {
  const auto& c = vc.config;
  const double fs = c.detection.sample_rate, f = c.pump.mod_freq, tau = c.detection.lockin_time_constant;
  const double amp = 0.37, phi0 = 0.6, ref_phase = 0.25;
  Lockin lia(f, fs, ref_phase, tau, c.detection.lockin_filter_order);
  Oscillator tone(f, fs, phi0);
  const auto settle = static_cast<std::size_t>(std::ceil(10.0 * tau * c.detection.lockin_filter_order * fs));
  const auto avg = static_cast<std::size_t>(std::llround(std::round(1e-3 * f) * fs / f));
  for (std::size_t i = 0; i < settle; ++i) {
    lia.push(amp * tone.cos());
    tone.advance();
  }
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < avg; ++i) {
    lia.push(amp * tone.cos());
    tone.advance();
    sx += lia.x();
    sy += lia.y();
  }
  sx /= static_cast<double>(avg);
  sy /= static_cast<double>(avg);
  const double amp_err = std::abs(std::hypot(sx, sy) / amp - 1.0);
  const double phase_err = std::abs(std::remainder(std::atan2(sy, sx) - (phi0 - ref_phase), units::two_pi));
  const double dev = std::max(amp_err, phase_err);
  return {"", dev <= 1e-3, dev, 0.0,
          "amplitude error " + io::format_double(amp_err) + ", phase error " +
              io::format_double(phase_err) + " rad"};
}

CheckResult parseval_check(std::uint64_t seed) {
  const std::size_t n = 1u << 20;
  const double fs = 1.0e6;
  NoiseModel m;
  m.shot_asd = 1e-3;
  const auto series = synthesize_probe_noise(m, n, fs, seed);
  const auto psd = psd_estimate(series.samples, fs, fs / 1024.0, 0, Window::hann);
  double integral = 0.0;
  for (double v : psd.values) integral += v * psd.rbw;
  double mean = 0.0, var = 0.0;
  for (double v : series.samples) mean += v;
  mean /= static_cast<double>(n);
  for (double v : series.samples) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  const double dev = std::abs(integral / var - 1.0);
  return {"", dev <= 0.01, dev, 0.0, "integrated PSD over sample variance"};
}

CheckResult loss_check(const ValidatedConfig& vc) {
  const double out_db = variance_to_db(loss_propagated_variance(db_to_variance(-1.9), 0.9));
  const double dev = std::abs(out_db - (-1.67));
  return {"", dev <= 0.01, dev, 0.0,
          "(-1.9 dB, eta 0.9) -> " + io::format_double(out_db) + " dB; configured probe leaves the cell at " +
              io::format_double(variance_to_db(vc.derived.squeeze_variance_out)) + " dB"};
}

CheckResult determinism_check(const ValidatedConfig& vc, std::uint64_t seed) {
  const auto model = make_noise_model(vc, true);
  const auto a = synthesize_probe_noise(model, 1u << 16, vc.config.detection.sample_rate, seed);
  const auto b = synthesize_probe_noise(model, 1u << 16, vc.config.detection.sample_rate, seed);
  const bool noise_same = a.samples.size() == b.samples.size() &&
                          std::memcmp(a.samples.data(), b.samples.data(), a.samples.size() * sizeof(double)) == 0;
  const auto ra = detector_record(vc, model, seed, 4096, "a");
  const auto rb = detector_record(vc, model, seed, 4096, "b");
  const bool chain_same =
      std::memcmp(ra.samples.data(), rb.samples.data(), ra.samples.size() * sizeof(double)) == 0;
  const bool ok = noise_same && chain_same;
  return {"", ok, ok ? 0.0 : 1.0, 0.0,
          std::string("noise ") + (noise_same ? "identical" : "differs") + ", detector chain " +
              (chain_same ? "identical" : "differs")};
}

CheckResult rolloff_check(const ValidatedConfig& vc_in) {
  const double b0 = vc_in.config.pump.mod_freq / vc_in.config.field.gamma;
  const double span = 0.05 * vc_in.config.cell.relaxation_Gamma /
                      (units::two_pi * vc_in.config.field.gamma) +
                      vc_in.config.scenario.response_injection_amplitude;
  const auto vc = with_fixed_step(vc_in, b0 + span);
  const auto& c = vc.config;
  const double fc = 1.0 / (units::two_pi * c.detection.lockin_time_constant);
  const double amp = c.scenario.response_injection_amplitude;
  // Slope-maximizing phase: argument of d(X + iY)/dB read at phase 0.
  const double db = 0.05 * c.cell.relaxation_Gamma / (units::two_pi * c.field.gamma);
  const auto [xp, yp] = steady_lockin(vc, b0 + db, 0.0, c.scenario.lockin_sweep_average_time);
  const auto [xm, ym] = steady_lockin(vc, b0 - db, 0.0, c.scenario.lockin_sweep_average_time);
  const double phase = std::atan2(yp - ym, xp - xm);
  const double f_lo = 40.0;
  const double h_lo = std::abs(injected_tone_response(vc, b0, phase, amp, f_lo));
  const double h_c = std::abs(injected_tone_response(vc, b0, phase, amp, fc));
  // First-order corner implied by the attenuation at the nominal corner.
  const double r = h_c / h_lo * std::sqrt(1.0 + std::pow(f_lo / fc, 2));
  const double implied = fc / std::sqrt(1.0 / (r * r) - 1.0);
  const double dev = std::abs(implied / fc - 1.0);
  return {"", dev <= 0.05, dev, 0.0,
          "3 dB point " + io::format_double(implied) + " Hz vs " + io::format_double(fc) + " Hz"};
}

}  // namespace

bool ValidationReport::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return !checks.empty();
}

ValidationReport run_validation(const ExperimentConfig& config) {
  ValidationReport report;
  ValidatedConfig vc;
  try {
    vc = validate_config(config);
  } catch (const std::exception& e) {
    report.checks.push_back({"config", false, std::nan(""), 0.0, e.what()});
    return report;
  }
  const std::uint64_t seed = io::derive_seed(config.detection.rng_seed, "validate");
  report.checks.push_back(guarded("rwa_vs_integrator", 0.02, [&] { return rwa_check(vc); }));
  report.checks.push_back(guarded("lockin_calibration_tone", 1e-3, [&] { return lockin_tone_check(vc); }));
  report.checks.push_back(guarded("parseval", 0.01, [&] { return parseval_check(seed); }));
  report.checks.push_back(guarded("loss_propagation", 0.01, [&] { return loss_check(vc); }));
  report.checks.push_back(guarded("determinism", 0.0, [&] { return determinism_check(vc, seed); }));
  report.checks.push_back(guarded("lockin_rolloff", 0.05, [&] { return rolloff_check(vc); }));
  return report;
}

std::string format_validation(const ValidationReport& report) {
  std::string out = "# validation report\n# status\tcheck\tdeviation\ttolerance\tdetail\n";
  for (const auto& c : report.checks) {
    out += std::string(c.passed ? "PASS" : "FAIL") + "\t" + c.name + "\t" + io::format_double(c.deviation) +
           "\t" + io::format_double(c.tolerance) + "\t" + c.detail + "\n";
  }
  out += std::string("# overall ") + (report.all_passed() ? "PASS" : "FAIL") + "\n";
  return out;
}

}  // namespace amor
