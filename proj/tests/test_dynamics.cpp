// Copyright 2026 The oner-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include <set>

#include <gtest/gtest.h>

#include "oner/dynamics.hpp"

namespace oner {
namespace {

const AtomSpec kSr = strontium87();
constexpr double kPeakT = 1.856;  // first resonance at 500 G, 20 MHz

DriveConfig peak_config() {
  DriveConfig c;
  c.T = kPeakT;
  return c;
}

int g(double m) { return ground_index(kSr, m); }

TEST(Collapse, ProjectorsAndSpinConservation) {
  const auto c = collapse_operators(kSr);
  const int n = kSr.spin_dim();
  ComplexMatrix p0 = ComplexMatrix::Zero(40, 40);
  p0.block(2 * n, 2 * n, n, n).setIdentity();
  EXPECT_EQ(c[0].adjoint() * c[0], p0);
  EXPECT_EQ(c[0].adjoint() * c[0] + c[1].adjoint() * c[1] + c[2].adjoint() * c[2], excited_projector(kSr));
  for (double m = -4.5; m <= 4.5; m += 1.0)
    for (double mp = -4.5; mp <= 4.5; mp += 1.0)
      EXPECT_EQ(c[2](g(mp), excited_index(kSr, -1, m)), Complex(m == mp ? 1.0 : 0.0));
}

TEST(Evolve, UndrivenGroundStateIsStationary) {
  DriveConfig c = peak_config();
  c.omega_E = 0.0;
  const auto r = evolve(kSr, c, pure_density(kSr, g(-4.5)), 2.0, 0.1);
  for (Eigen::Index k = 0; k < r.populations.rows(); ++k) {
    EXPECT_NEAR(r.populations(k, g(-4.5)), 1.0, 1e-10);
    EXPECT_NEAR(r.excited_occupation[static_cast<size_t>(k)], 0.0, 1e-10);
  }
}

// A mixed-character pure state: both qubit levels plus an excited admixture.
ComplexVector probe_state() {
  ComplexVector psi = ComplexVector::Zero(40);
  psi(g(-4.5)) = 0.8;
  psi(g(-2.5)) = Complex(0.0, 0.5);
  psi(excited_index(kSr, -1, -4.5)) = Complex(0.3, 0.1);
  return psi.normalized();
}

TEST(Evolve, ClosedSystemStaysPure) {
  AtomSpec closed = kSr;
  closed.gamma = 0.0;
  const auto model = build_drive_model(closed, peak_config());
  const ComplexVector psi = probe_state();
  ComplexMatrix rho = psi * psi.adjoint();
  LindbladRhs rhs(model, 0.0);
  double worst = 0.0;
  std::vector<double> stops;
  for (int k = 1; k <= 20; ++k) stops.push_back(0.1 * k);
  integrate(rhs, rho, 0.0, stops, [&](double, const ComplexMatrix& y) { worst = std::max(worst, std::abs((y * y).trace().real() - 1.0)); });
  EXPECT_LE(worst, 1e-7);

  // The density-matrix and state-vector integrators agree.
  const auto states = evolve_state(model, psi, stops);
  const ComplexMatrix pure = states.back() * states.back().adjoint();
  EXPECT_LE(max_abs(pure - rho), 1e-7);
}

TEST(Evolve, TraceHermiticityPositivity) {
  const auto model = build_drive_model(kSr, peak_config());
  const ComplexVector psi = probe_state();
  const auto r = evolve(model, psi * psi.adjoint(), 2.0, 0.05);
  EXPECT_LE(r.max_trace_error, 1e-8);
  EXPECT_LE(r.max_hermiticity_error, 1e-9);
  EXPECT_GE(r.min_eigenvalue, -1e-8);  // tolerance-level, monitored only
  EXPECT_EQ(r.method, "direct");
}

TEST(Evolve, ToleranceHalvingIsStable) {
  const auto model = build_drive_model(kSr, peak_config());
  EvolveOptions a, b;
  b.integrator.rtol = 0.5 * a.integrator.rtol;
  b.integrator.atol = 0.5 * a.integrator.atol;
  const auto ra = evolve(model, pure_density(kSr, g(-4.5)), 2.0, 0.1, a);
  const auto rb = evolve(model, pure_density(kSr, g(-4.5)), 2.0, 0.1, b);
  EXPECT_LE((ra.populations - rb.populations).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Evolve, NoHyperfineMeansNoSpinFlip) {
  AtomSpec bare = kSr;
  bare.hyperfine_A = 0.0;
  bare.quadrupole_Q = 0.0;
  DriveConfig c = peak_config();
  c.detuning = units::mhz(-2100.0);
  const auto model = build_drive_model(bare, c);
  ComplexVector psi = ComplexVector::Zero(40);
  psi(g(-4.5)) = 1.0;
  std::vector<double> stops;
  for (int k = 1; k <= 10; ++k) stops.push_back(0.5 * k);
  for (const auto& s : evolve_state(model, psi, stops)) {
    double off = 0.0;
    for (int k = 0; k < 40; ++k)
      if (BasisState::from_index(bare, k).m_I.twice() != -9) off += std::norm(s(k));
    EXPECT_LE(off, 1e-12);
  }
}

TEST(Evolve, RejectsInvalidInput) {
  const auto model = build_drive_model(kSr, peak_config());
  EXPECT_THROW(evolve(model, ComplexMatrix::Identity(40, 40), 1.0, 0.1), std::invalid_argument);
  EXPECT_THROW(evolve(model, pure_density(kSr, 0), 0.05, 0.1), std::invalid_argument);
}

TEST(Blocks, PartitionTheBasis) {
  const auto model = build_drive_model(kSr, peak_config());
  const auto blocks = coupled_blocks(model);
  std::set<int> all;
  for (const auto& b : blocks)
    for (int s : b) EXPECT_TRUE(all.insert(s).second);
  EXPECT_EQ(all.size(), 40u);
  // At theta = 90 deg the -9/2 and -5/2 ground levels share a block.
  for (const auto& b : blocks) {
    const bool a = std::find(b.begin(), b.end(), g(-4.5)) != b.end();
    const bool t = std::find(b.begin(), b.end(), g(-2.5)) != b.end();
    EXPECT_EQ(a, t);
  }
}

TEST(PeriodMap, MatchesDirectIntegrationAtStrobes) {
  for (double theta_deg : {90.0, 89.0}) {
    DriveConfig c = peak_config();
    c.theta = theta_deg * kPi / 180.0;
    const auto model = build_drive_model(kSr, c);
    const double horizon = 3 * kPeakT;
    const auto direct = evolve(model, pure_density(kSr, g(-4.5)), horizon, kPeakT / 16);
    const auto mapped = simulate_from_ground(model, g(-4.5), horizon);
    EXPECT_EQ(mapped.method, "period-map");
    ASSERT_EQ(direct.strobe_times.size(), mapped.strobe_times.size());
    for (size_t k = 0; k < direct.strobe_times.size(); ++k) {
      EXPECT_NEAR(direct.strobe_times[k], mapped.strobe_times[k], 1e-12);
      EXPECT_NEAR(direct.strobe_target[k], mapped.strobe_target[k], 1e-6) << "theta " << theta_deg << " period " << k;
    }
    EXPECT_LE(mapped.max_trace_error, 1e-6);
  }
}

TEST(PeriodMap, ValidatesOptions) {
  const auto model = build_drive_model(kSr, peak_config());
  PeriodMapOptions o;
  o.nodes = 63;
  EXPECT_THROW(PeriodMap(model, o), std::invalid_argument);
  DriveConfig shifted = peak_config();
  shifted.envelope_phase = 0.3;
  EXPECT_THROW(PeriodMap(build_drive_model(kSr, shifted)), std::invalid_argument);
}

TEST(PeriodMap, UndrivenIsIdentityOnGround) {
  DriveConfig c = peak_config();
  c.omega_E = 0.0;
  const PeriodMap map(build_drive_model(kSr, c));
  ComplexMatrix rho = ComplexMatrix::Zero(map.slow_dim(), map.slow_dim());
  rho(0, 0) = 0.5;
  rho(2, 2) = 0.5;
  rho(0, 2) = rho(2, 0) = 0.5;
  const auto out = map.step(rho);
  EXPECT_NEAR(out(0, 0).real(), 0.5, 1e-9);
  EXPECT_NEAR(std::abs(out(0, 2)), 0.5, 1e-9);
}

TEST(Rabi, SyntheticSineSquared) {
  const double t0 = 21.3;
  std::vector<double> t, p;
  for (int k = 0; k <= 400; ++k) {
    t.push_back(0.25 * k);
    p.push_back(std::pow(std::sin(kPi * t.back() / (2 * t0)), 2));
  }
  const auto est = extract_nuclear_rabi(t, p);
  ASSERT_TRUE(est.omega_N.has_value());
  EXPECT_NEAR(*est.omega_N, kPi / t0, 1e-4 * kPi / t0);
  ASSERT_TRUE(est.omega_dft.has_value());
  EXPECT_TRUE(est.dft_agrees);
}

TEST(Rabi, FlatSignalIsUnresolved) {
  std::vector<double> t, p(100, 0.0);
  for (int k = 0; k < 100; ++k) t.push_back(0.5 * k);
  EXPECT_FALSE(extract_nuclear_rabi(t, p).omega_N.has_value());
}

TrajectoryResult synthetic_trajectory(double pe, double gamma) {
  TrajectoryResult r;
  r.excited_occupation = {0.0, pe, 0.5 * pe};
  r.gamma = gamma;
  return r;
}

TEST(Scattering, LinearAndBounded) {
  const double wN = units::khz(10.0);
  EXPECT_EQ(*scattered_photons(synthetic_trajectory(0.0, kSr.gamma), wN), 0.0);
  const double n1 = *scattered_photons(synthetic_trajectory(0.004, kSr.gamma), wN);
  EXPECT_NEAR(*scattered_photons(synthetic_trajectory(0.004, 2 * kSr.gamma), wN), 2 * n1, 1e-15);
  // P_3P1 < 0.01 and Omega_N/2pi > 10 kHz keep N_sc below 0.008.
  EXPECT_LT(*scattered_photons(synthetic_trajectory(0.0099, kSr.gamma), wN * 1.0001), 0.008);
  EXPECT_FALSE(scattered_photons(synthetic_trajectory(0.004, kSr.gamma), std::nullopt).has_value());
}

}  // namespace
}  // namespace oner
