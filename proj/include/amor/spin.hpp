#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "amor/config.hpp"

namespace amor {

/// Ground-state orientation (rank-1 Bloch vector). The pump orients along x,
/// the bias field points along z and the probe reads Sy.
struct SpinState {
  double Sx = 0.0;
  double Sy = 0.0;
  double Sz = 0.0;

  double norm() const;
};

struct SpinTrajectory {
  double dt = 0.0;
  double start_time = 0.0;
  std::vector<SpinState> samples;

  double time(std::size_t i) const { return start_time + dt * static_cast<double>(i); }
};

struct RwaSolution {
  double amplitude = 0.0;
  double phase = 0.0;         // (-pi, pi]
  double detuning_Delta = 0.0;  // Omega_m - Omega_L, rad/s
};

/// Complex Fourier coefficient of the pump rate at the modulation frequency:
/// R(t) contains R1 cos(Omega_m t + phase).
struct PumpFundamental {
  double R1 = 0.0;
  double phase = 0.0;
};

/// Pumping rate at time t. The square wave is on for the first `duty`
/// fraction of each modulation period.
double pump_rate_waveform(double t, const PumpConfig& pump);
PumpFundamental pump_fundamental(const PumpConfig& pump);

/// Right-hand-side parameters of dS/dt = Omega_L(t) z x S - Gamma S + R(t) x.
struct SpinDynamics {
  double omega_bias = 0.0;            // signed Larmor rate of the bias field, rad/s
  double omega_injection = 0.0;       // Larmor-rate amplitude of the AC test field, rad/s
  double injection_freq = 0.0;        // Hz
  double relaxation = 0.0;            // Gamma, 1/s
  PumpConfig pump;
  bool dc_pump = false;               // constant rate R0 instead of the waveform

  static SpinDynamics from_config(const ValidatedConfig& vc);

  double larmor_rate(double t) const;
  double pump_rate(double t) const;
};

/// Fixed-step classical RK4 integrator. Stage evaluations of the pump rate
/// stay strictly inside the step, so square-wave edges that fall on step
/// boundaries are integrated exactly.
class SpinIntegrator {
 public:
  SpinIntegrator(const SpinDynamics& dynamics, double dt, SpinState initial = {});

  /// Advances one step; throws NumericError on a non-finite state.
  void step();

  const SpinState& state() const { return state_; }
  double time() const { return dt_ * static_cast<double>(index_); }
  std::uint64_t step_index() const { return index_; }
  double dt() const { return dt_; }

 private:
  SpinState derivative(const SpinState& s, double t, double pump) const;

  SpinDynamics dyn_;
  double dt_;
  SpinState state_;
  std::uint64_t index_ = 0;
};

/// Largest step allowed for the given dynamics: 1/20 of the fastest of the
/// modulation and Larmor periods.
double max_integration_step(const SpinDynamics& dynamics);

/// Integrates a validated config for `duration` seconds with step `dt`.
/// With `discard_transient` only samples after transient_relaxation_times / Gamma
/// are returned.
SpinTrajectory integrate_spin(const ValidatedConfig& vc, double duration, double dt,
                              bool discard_transient = false);

/// Rotating-wave steady state of the co-rotating coherence.
RwaSolution rwa_steady_state(double Delta, double Gamma, double R1);

/// Co-rotating transverse coherence: mean of (Sx + i Sy) exp(-i 2 pi f t) over
/// the trajectory. Use whole modulation periods for an exact projection.
std::complex<double> corotating_coefficient(const SpinTrajectory& traj, double freq_hz);

/// Amplitude and phase of the Sy component at freq_hz, as
/// Sy ~ a cos(2 pi f t + phi).
std::complex<double> sy_fundamental(const SpinTrajectory& traj, double freq_hz);

/// Compares a demodulated co-rotating coefficient with the drive so it can be
/// checked against rwa_steady_state.
RwaSolution rwa_from_coefficient(std::complex<double> coefficient, const PumpFundamental& drive,
                                 double Delta);

/// DC-pumped polarization rotation kappa * R0 Omega_L / (Gamma^2 + Omega_L^2), rad.
std::vector<double> static_rotation_curve(std::span<const double> b_grid, const ValidatedConfig& vc);

/// phi(t) = kappa * Sy(t), rad.
std::vector<double> rotation_timeseries(const SpinTrajectory& traj, const ProbeConfig& probe);

/// Columnar (t, Sx, Sy, Sz) text with the config hash in the header.
std::string format_trajectory(const SpinTrajectory& traj, const std::string& config_hash);

}  // namespace amor
