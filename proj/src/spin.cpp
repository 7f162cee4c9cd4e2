#include "amor/spin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "amor/core.hpp"
#include "amor/error.hpp"
#include "amor/io.hpp"
#include "amor/units.hpp"

namespace amor {

namespace {

// Pump stages at the step ends are evaluated this far inside the step.
constexpr double kEdgeInset = 1e-6;

double wrap_phase(double p) {
  p = std::remainder(p, units::two_pi);
  return p <= -units::pi ? p + units::two_pi : p;
}

}  // namespace

double SpinState::norm() const { return std::sqrt(Sx * Sx + Sy * Sy + Sz * Sz); }

double pump_rate_waveform(double t, const PumpConfig& pump) {
  const double cycles = t * pump.mod_freq;
  const double frac = cycles - std::floor(cycles);
  switch (pump.waveform) {
    case Waveform::square:
      return frac < pump.duty ? pump.peak_rate_R0 : 0.0;
    case Waveform::sine:
      return 0.5 * pump.peak_rate_R0 * (1.0 + std::cos(units::two_pi * frac));
  }
  return 0.0;
}

PumpFundamental pump_fundamental(const PumpConfig& pump) {
  switch (pump.waveform) {
    case Waveform::square:
      // c1 = R0 sin(pi d) / pi * exp(-i pi d) for a pulse on [0, d T).
      return {2.0 * pump.peak_rate_R0 * std::sin(units::pi * pump.duty) / units::pi,
              -units::pi * pump.duty};
    case Waveform::sine:
      return {0.5 * pump.peak_rate_R0, 0.0};
  }
  return {};
}

SpinDynamics SpinDynamics::from_config(const ValidatedConfig& vc) {
  const auto& c = vc.config;
  SpinDynamics d;
  d.omega_bias = vc.derived.omega_larmor;
  d.omega_injection = larmor_angular(c.field.injection_amplitude, c.field.gamma);
  d.injection_freq = c.field.injection_freq;
  d.relaxation = c.cell.relaxation_Gamma;
  d.pump = c.pump;
  return d;
}

double SpinDynamics::larmor_rate(double t) const {
  if (omega_injection == 0.0) return omega_bias;
  return omega_bias + omega_injection * std::sin(units::two_pi * injection_freq * t);
}

double SpinDynamics::pump_rate(double t) const {
  return dc_pump ? pump.peak_rate_R0 : pump_rate_waveform(t, pump);
}

SpinIntegrator::SpinIntegrator(const SpinDynamics& dynamics, double dt, SpinState initial)
    : dyn_(dynamics), dt_(dt), state_(initial) {
  if (!(dt > 0.0)) throw ConfigError("integration step must be positive");
}

SpinState SpinIntegrator::derivative(const SpinState& s, double t, double pump) const {
  const double w = dyn_.larmor_rate(t);
  const double g = dyn_.relaxation;
  return {-w * s.Sy - g * s.Sx + pump, w * s.Sx - g * s.Sy, -g * s.Sz};
}

void SpinIntegrator::step() {
  const double k = static_cast<double>(index_);
  const double t0 = dt_ * k;
  const double th = dt_ * (k + 0.5);
  const double t1 = dt_ * (k + 1.0);
  const double r0 = dyn_.pump_rate(dt_ * (k + kEdgeInset));
  const double rh = dyn_.pump_rate(th);
  const double r1 = dyn_.pump_rate(dt_ * (k + 1.0 - kEdgeInset));

  const SpinState& s = state_;
  const double h = dt_;
  auto axpy = [](const SpinState& a, double c, const SpinState& b) {
    return SpinState{a.Sx + c * b.Sx, a.Sy + c * b.Sy, a.Sz + c * b.Sz};
  };
  const SpinState k1 = derivative(s, t0, r0);
  const SpinState k2 = derivative(axpy(s, 0.5 * h, k1), th, rh);
  const SpinState k3 = derivative(axpy(s, 0.5 * h, k2), th, rh);
  const SpinState k4 = derivative(axpy(s, h, k3), t1, r1);
  state_.Sx += h / 6.0 * (k1.Sx + 2.0 * k2.Sx + 2.0 * k3.Sx + k4.Sx);
  state_.Sy += h / 6.0 * (k1.Sy + 2.0 * k2.Sy + 2.0 * k3.Sy + k4.Sy);
  state_.Sz += h / 6.0 * (k1.Sz + 2.0 * k2.Sz + 2.0 * k3.Sz + k4.Sz);
  ++index_;
  if (!std::isfinite(state_.Sx) || !std::isfinite(state_.Sy) || !std::isfinite(state_.Sz)) {
    throw NumericError("non-finite spin state at step " + std::to_string(index_));
  }
}

double max_integration_step(const SpinDynamics& d) {
  const double larmor_hz = (std::abs(d.omega_bias) + std::abs(d.omega_injection)) / units::two_pi;
  const double fastest = std::max(d.dc_pump ? 0.0 : d.pump.mod_freq, larmor_hz);
  return fastest > 0.0 ? 1.0 / (20.0 * fastest) : std::numeric_limits<double>::infinity();
}

SpinTrajectory integrate_spin(const ValidatedConfig& vc, double duration, double dt,
                              bool discard_transient) {
  const auto dyn = SpinDynamics::from_config(vc);
  const double limit = max_integration_step(dyn);
  if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12)) {
    throw ConfigError("integrate_spin: step " + io::format_double(dt) +
                      " s exceeds 1/20 of the fastest period (" + io::format_double(limit) + " s)");
  }
  const double transient = vc.config.simulation.transient_relaxation_times / dyn.relaxation;
  if (duration < transient * (1.0 - 1e-12)) {
    throw ConfigError("integrate_spin: duration " + io::format_double(duration) +
                      " s is shorter than the transient window " + io::format_double(transient) +
                      " s");
  }
  const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
  const std::size_t first = discard_transient
                                ? static_cast<std::size_t>(std::ceil(transient / dt - 1e-9))
                                : 0;

  SpinIntegrator integ(dyn, dt);
  SpinTrajectory traj;
  traj.dt = dt;
  traj.start_time = dt * static_cast<double>(first);
  traj.samples.reserve(steps + 1 - std::min(first, steps));
  if (first == 0) traj.samples.push_back(integ.state());
  for (std::size_t i = 1; i <= steps; ++i) {
    integ.step();
    if (i >= first) traj.samples.push_back(integ.state());
  }
  if (traj.samples.empty()) traj.samples.push_back(integ.state());
  return traj;
}

RwaSolution rwa_steady_state(double Delta, double Gamma, double R1) {
  if (!(Gamma > 0.0)) throw DomainError("rwa_steady_state: Gamma must be positive");
  return {0.5 * R1 / std::hypot(Gamma, Delta), wrap_phase(std::atan2(Delta, Gamma)), Delta};
}

std::complex<double> corotating_coefficient(const SpinTrajectory& traj, double freq_hz) {
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const double arg = -units::two_pi * freq_hz * traj.time(i);
    const auto& s = traj.samples[i];
    acc += std::complex<double>(s.Sx, s.Sy) * std::polar(1.0, arg);
  }
  return acc / static_cast<double>(traj.samples.size());
}

std::complex<double> sy_fundamental(const SpinTrajectory& traj, double freq_hz) {
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const double arg = -units::two_pi * freq_hz * traj.time(i);
    acc += traj.samples[i].Sy * std::polar(1.0, arg);
  }
  return 2.0 * acc / static_cast<double>(traj.samples.size());
}

RwaSolution rwa_from_coefficient(std::complex<double> coefficient, const PumpFundamental& drive,
                                 double Delta) {
  return {std::abs(coefficient), wrap_phase(drive.phase - std::arg(coefficient)), Delta};
}

std::vector<double> static_rotation_curve(std::span<const double> b_grid, const ValidatedConfig& vc) {
  const auto& c = vc.config;
  const double g = c.cell.relaxation_Gamma;
  std::vector<double> out;
  out.reserve(b_grid.size());
  for (double b : b_grid) {
    const double w = larmor_angular(b, c.field.gamma);
    out.push_back(c.probe.coupling_kappa * c.pump.peak_rate_R0 * w / (g * g + w * w));
  }
  return out;
}

std::vector<double> rotation_timeseries(const SpinTrajectory& traj, const ProbeConfig& probe) {
  std::vector<double> out;
  out.reserve(traj.samples.size());
  for (const auto& s : traj.samples) out.push_back(probe.coupling_kappa * s.Sy);
  return out;
}

std::string format_trajectory(const SpinTrajectory& traj, const std::string& config_hash) {
  const std::size_t n = traj.samples.size();
  std::vector<double> t(n), sx(n), sy(n), sz(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = traj.time(i);
    sx[i] = traj.samples[i].Sx;
    sy[i] = traj.samples[i].Sy;
    sz[i] = traj.samples[i].Sz;
  }
  return io::format_columns({"spin trajectory", "config_hash " + config_hash,
                             "dt_s " + io::format_double(traj.dt)},
                            {"t_s", "Sx", "Sy", "Sz"}, {t, sx, sy, sz});
}

}  // namespace amor
