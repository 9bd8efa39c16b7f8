// Copyright 2026 The oner-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oner/atom.hpp"
#include "oner/core.hpp"

namespace oner {

struct DriveConfig {
  double B = 500.0;                       // G
  double omega_E = units::mhz(20.0);      // peak electronic Rabi frequency
  double T = 1.0;                         // modulation period, us
  double theta = kPi / 2.0;               // polarization angle
  std::optional<double> detuning;         // explicit; empty selects the midpoint rule
  double envelope_phase = 0.0;

  void validate() const {
    if (!(T > 0.0)) throw std::invalid_argument("modulation period must be positive");
    if (!(omega_E >= 0.0)) throw std::invalid_argument("Rabi frequency must be non-negative");
    if (!(theta >= 0.0 && theta <= kPi + 1e-15)) throw std::invalid_argument("theta must lie in [0, pi]");
    if (!(B >= 0.0)) throw std::invalid_argument("magnetic field must be non-negative");
  }
};

inline double envelope(const DriveConfig& c, double t) {
  return 0.5 * c.omega_E * (1.0 - std::cos(kTwoPi * t / c.T + c.envelope_phase));
}

// Constant part of the atom-field coupling; H_AF(t) = envelope(t) * coupling.
inline ComplexMatrix drive_coupling(const AtomSpec& spec, double theta) {
  const int n = spec.spin_dim();
  ComplexMatrix v = ComplexMatrix::Zero(spec.dim(), spec.dim());
  const double c = std::cos(theta);
  const double s = std::sin(theta) / std::sqrt(2.0);
  for (int k = 0; k < n; ++k) {
    const int g = k;
    v(g, 2 * n + k) = 0.5 * c;   // P(0)
    v(g, 1 * n + k) = 0.5 * s;   // P(-1)
    v(g, 3 * n + k) = -0.5 * s;  // P(+1)
  }
  return v + v.adjoint().eval();
}

inline ComplexMatrix h_atom_field(const AtomSpec& spec, const DriveConfig& c, double t) {
  return envelope(c, t) * drive_coupling(spec, c.theta);
}

struct LaserFrequency {
  double omega = 0.0;     // laser angular frequency relative to omega0
  double detuning = 0.0;  // value fed to h_electronic
  double line_a = 0.0;    // transition to |P,-1,-9/2>-like state, relative to omega0
  double line_b = 0.0;    // transition to |P,-1,-5/2>-like state
  std::vector<std::string> warnings;
};

inline double excited_label_energy(const AtomSpec& spec, const ExcitedSpectrum& sp, int m_J, double m_I) {
  const int k = excited_index(spec, m_J, m_I) - spec.spin_dim();
  Eigen::Index best;
  const double w = sp.vectors.row(k).cwiseAbs2().maxCoeff(&best);
  if (w < 0.5) {
    throw std::runtime_error("ambiguous excited-state character for m_J=" + std::to_string(m_J) +
                             " m_I=" + std::to_string(m_I));
  }
  return sp.energies(best);
}

// Laser frequency halfway between the lines to |P,-1,-9/2> and |P,-1,-5/2>.
// In the rotating frame the excited manifold sits at omega0 - omega, so the
// detuning handed to h_electronic is omega - omega0.
inline LaserFrequency auto_laser_frequency(const AtomSpec& spec, double B) {
  LaserFrequency out;
  if (B < 100.0) out.warnings.push_back("B below 100 G: (m_J, m_I) labels are poorly defined");
  const auto sp = excited_spectrum(spec, B);
  const ComplexMatrix hz = h_zeeman(spec, B);
  const auto ground = [&](double m) { return hz(ground_index(spec, m), ground_index(spec, m)).real(); };
  const double I = spec.nuclear_spin.value();
  out.line_a = excited_label_energy(spec, sp, -1, -I) - ground(-I);
  out.line_b = excited_label_energy(spec, sp, -1, -I + 2.0) - ground(-I + 2.0);
  out.omega = spec.omega0 + 0.5 * (out.line_a + out.line_b);
  out.detuning = out.omega - spec.omega0;
  return out;
}

inline double resolve_detuning(const AtomSpec& spec, const DriveConfig& c, std::vector<std::string>* warnings = nullptr) {
  double d;
  if (c.detuning) {
    d = *c.detuning;
  } else {
    auto lf = auto_laser_frequency(spec, c.B);
    if (warnings) warnings->insert(warnings->end(), lf.warnings.begin(), lf.warnings.end());
    d = lf.detuning;
  }
  if (warnings && std::abs(d) > 0.0 && c.T < 10.0 * kTwoPi / std::abs(d)) {
    warnings->push_back("modulation period below 10 optical detuning cycles; RWA assumption is marginal");
  }
  return d;
}

// H(t) = h_static + envelope(t) * coupling, built once per configuration.
struct DriveModel {
  AtomSpec spec;
  DriveConfig config;
  double detuning = 0.0;
  ComplexMatrix h_static;
  ComplexMatrix coupling;
  std::vector<std::string> warnings;

  double envelope(double t) const { return oner::envelope(config, t); }
  ComplexMatrix hamiltonian(double t) const { return h_static + envelope(t) * coupling; }
};

inline DriveModel build_drive_model(const AtomSpec& spec, const DriveConfig& c) {
  spec.validate();
  c.validate();
  DriveModel m;
  m.spec = spec;
  m.config = c;
  m.detuning = resolve_detuning(spec, c, &m.warnings);
  m.h_static = atom_hamiltonian(spec, c.B, m.detuning);
  m.coupling = drive_coupling(spec, c.theta);
  return m;
}

// Rabi frequency <-> laser intensity for the intercombination line.
struct IntensityConversion {
  // Dipole matrix element per component, atomic units, Wigner factor included.
  double dipole_au = 0.151 / std::sqrt(3.0);

  static constexpr double kAtomicDipole = 8.4783536255e-30;  // C m
  static constexpr double kHbar = 1.054571817e-34;           // J s
  static constexpr double kEpsilon0 = 8.8541878128e-12;      // F/m
  static constexpr double kLightSpeed = 299792458.0;         // m/s

  // The quoted intensities (1, 4, 10 W/cm^2 at 20, 40, 60 MHz) follow from
  // hbar times the cyclic Rabi frequency Omega_E/2pi, which is what is used.
  double rabi_to_intensity(double omega_E) const {
    if (omega_E < 0.0) throw std::invalid_argument("Rabi frequency must be non-negative");
    const double energy = kHbar * (omega_E / kTwoPi) * 1e6;  // rad/us -> Hz
    const double e0 = energy / (dipole_au * kAtomicDipole);
    return 0.5 * kEpsilon0 * kLightSpeed * e0 * e0 * 1e-4;  // W/cm^2
  }

  double intensity_to_rabi(double intensity) const {
    if (intensity < 0.0) throw std::invalid_argument("intensity must be non-negative");
    const double e0 = std::sqrt(2.0 * intensity * 1e4 / (kEpsilon0 * kLightSpeed));
    const double f_hz = dipole_au * kAtomicDipole * e0 / kHbar;
    return kTwoPi * f_hz * 1e-6;
  }
};

}  // namespace oner
