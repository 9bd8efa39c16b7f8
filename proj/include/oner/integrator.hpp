// Copyright 2026 The oner-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "oner/core.hpp"

namespace oner {

struct IntegratorOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double initial_step = 0.0;  // 0 picks a step from the first derivative
  double max_step = 0.0;      // 0 means unbounded
  std::int64_t max_steps = 100'000'000;
};

struct IntegratorStats {
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;
  std::int64_t evaluations = 0;
};

namespace dop853 {
// Dormand-Prince 8(5,3) tableau (Hairer, Norsett & Wanner).
inline constexpr double kC[12] = {0.0, 0.526001519587677318785587544488e-01, 0.789002279381515978178381316732e-01, 0.118350341907227396726757197510, 0.281649658092772603273242802490, 0.333333333333333333333333333333, 0.25, 0.307692307692307692307692307692, 0.651282051282051282051282051282, 0.6, 0.857142857142857142857142857142, 1.0};
inline constexpr double kA[13][12] = {
    {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {5.26001519587677318785587544488e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {1.97250569845378994544595329183e-2, 5.91751709536136983633785987549e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {2.95875854768068491816892993775e-2, 0.0, 8.87627564304205475450678981324e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {2.41365134159266685502369798665e-1, 0.0, -8.84549479328286085344864962717e-1, 9.24834003261792003115737966543e-1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {3.7037037037037037037037037037e-2, 0.0, 0.0, 1.70828608729473871279604482173e-1, 1.25467687566822425016691814123e-1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {3.7109375e-2, 0.0, 0.0, 1.70252211019544039314978060272e-1, 6.02165389804559606850219397283e-2, -1.7578125e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {3.70920001185047927108779319836e-2, 0.0, 0.0, 1.70383925712239993810214054705e-1, 1.07262030446373284651809199168e-1, -1.53194377486244017527936158236e-2, 8.27378916381402288758473766002e-3, 0.0, 0.0, 0.0, 0.0, 0.0},
    {6.24110958716075717114429577812e-1, 0.0, 0.0, -3.36089262944694129406857109825, -8.68219346841726006818189891453e-1, 2.75920996994467083049415600797e1, 2.01540675504778934086186788979e1, -4.34898841810699588477366255144e1, 0.0, 0.0, 0.0, 0.0},
    {4.77662536438264365890433908527e-1, 0.0, 0.0, -2.48811461997166764192642586468, -5.90290826836842996371446475743e-1, 2.12300514481811942347288949897e1, 1.52792336328824235832596922938e1, -3.32882109689848629194453265587e1, -2.03312017085086261358222928593e-2, 0.0, 0.0, 0.0},
    {-9.3714243008598732571704021658e-1, 0.0, 0.0, 5.18637242884406370830023853209, 1.09143734899672957818500254654, -8.14978701074692612513997267357, -1.85200656599969598641566180701e1, 2.27394870993505042818970056734e1, 2.49360555267965238987089396762, -3.0467644718982195003823669022, 0.0, 0.0},
    {2.27331014751653820792359768449, 0.0, 0.0, -1.05344954667372501984066689879e1, -2.00087205822486249909675718444, -1.79589318631187989172765950534e1, 2.79488845294199600508499808837e1, -2.85899827713502369474065508674, -8.87285693353062954433549289258, 1.23605671757943030647266201528e1, 6.43392746015763530355970484046e-1, 0.0},
    {5.42937341165687622380535766363e-2, 0.0, 0.0, 0.0, 0.0, 4.45031289275240888144113950566, 1.89151789931450038304281599044, -5.8012039600105847814672114227, 3.1116436695781989440891606237e-1, -1.52160949662516078556178806805e-1, 2.01365400804030348374776537501e-1, 4.47106157277725905176885569043e-2}};
inline constexpr double kE3[12] = {5.42937341165687622380535766363e-2 - 0.244094488188976377952755905512, 0.0, 0.0, 0.0, 0.0, 4.45031289275240888144113950566, 1.89151789931450038304281599044, -5.8012039600105847814672114227, 3.1116436695781989440891606237e-1 - 0.733846688281611857341361741547, -1.52160949662516078556178806805e-1, 2.01365400804030348374776537501e-1, 4.47106157277725905176885569043e-2 - 0.220588235294117647058823529412e-1};
inline constexpr double kE5[12] = {0.1312004499419488073250102996e-1, 0.0, 0.0, 0.0, 0.0, -0.1225156446376204440720569753e+1, -0.4957589496572501915214079952, 0.1664377182454986536961530415e+1, -0.3503288487499736816886487290, 0.3341791187130174790297318841, 0.8192320648511571246570742613e-1, -0.2235530786388629525884427845e-1};
}  // namespace dop853

// Adaptive Dormand-Prince 8(5,3) with PI step control and FSAL. Its stability
// interval on the imaginary axis (about 6 per step) suits the oscillatory
// problems here far better than the 5(4) pair, which is marginally unstable
// there. The state is any Eigen dense object; f(t, y, dy) writes dy = y'(t).
// Integration lands exactly on every entry of `stops` (ascending) and calls
// observer(t, y) there.
template <class State, class Rhs, class Observer>
IntegratorStats integrate(Rhs&& f, State& y, double t0, const std::vector<double>& stops, Observer&& observer,
                          const IntegratorOptions& opt = {}) {
  using namespace dop853;
  IntegratorStats st;
  if (stops.empty()) return st;
  const double t_end = stops.back();
  std::vector<State> k(13, State::Zero(y.rows(), y.cols()));
  State y_new = k[0], tmp = k[0], e5 = k[0], e3 = k[0];

  // Sum of |v_i / sc_i|^2 with sc_i = atol + rtol * max(|a_i|, |b_i|).
  auto scaled_norm2 = [&](const State& v, const State& a, const State& b) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double sc = opt.atol + opt.rtol * std::sqrt(std::max(std::norm(a.data()[i]), std::norm(b.data()[i])));
      sum += std::norm(v.data()[i]) / (sc * sc);
    }
    return sum;
  };

  double t = t0;
  size_t next_stop = 0;
  while (next_stop < stops.size() && stops[next_stop] <= t0) {
    observer(t0, y);
    ++next_stop;
  }
  if (next_stop == stops.size()) return st;
  f(t, y, k[0]);
  ++st.evaluations;

  double h = opt.initial_step;
  if (h <= 0.0) {
    const auto n = static_cast<double>(y.size());
    const double d0 = std::sqrt(scaled_norm2(y, y, y) / n), d1 = std::sqrt(scaled_norm2(k[0], y, y) / n);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, t_end - t0);
  }
  if (opt.max_step > 0.0) h = std::min(h, opt.max_step);

  constexpr double kBeta = 0.04, kSafe = 0.9, kFacMin = 1.0 / 3.0, kFacMax = 6.0;
  const double expo1 = 1.0 / 8.0 - kBeta * 0.2;
  double err_old = 1e-4;
  bool reject_last = false;

  while (next_stop < stops.size()) {
    if (st.accepted + st.rejected > opt.max_steps) throw NumericalError("integrator: step budget exhausted");
    const double target = stops[next_stop];
    double h_try = h;
    bool clipped = false;
    if (t + h_try >= target - 1e-14 * std::max(1.0, std::abs(target))) {
      h_try = target - t;
      clipped = true;
    }
    if (!(h_try > 1e-14 * std::max(1.0, std::abs(t)))) throw NumericalError("integrator: step size underflow at t=" + std::to_string(t));

    for (int s = 1; s < 12; ++s) {
      tmp = y;
      for (int j = 0; j < s; ++j)
        if (kA[s][j] != 0.0) tmp += (h_try * kA[s][j]) * k[j];
      f(t + kC[s] * h_try, tmp, k[s]);
    }
    y_new = y;
    e5.setZero();
    e3.setZero();
    for (int j = 0; j < 12; ++j) {
      if (kA[12][j] != 0.0) y_new += (h_try * kA[12][j]) * k[j];
      if (kE5[j] != 0.0) e5 += kE5[j] * k[j];
      if (kE3[j] != 0.0) e3 += kE3[j] * k[j];
    }
    st.evaluations += 11;
    double n5 = 0.0, n3 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sc = opt.atol + opt.rtol * std::sqrt(std::max(std::norm(y.data()[i]), std::norm(y_new.data()[i])));
      const double inv = 1.0 / (sc * sc);
      n5 += std::norm(e5.data()[i]) * inv;
      n3 += std::norm(e3.data()[i]) * inv;
    }
    double err = 0.0;
    if (n5 > 0.0 || n3 > 0.0) err = h_try * n5 / std::sqrt((n5 + 0.01 * n3) * static_cast<double>(y.size()));
    if (!std::isfinite(err)) err = 1e10;

    const double fac11 = std::pow(std::max(err, 1e-300), expo1);
    if (err <= 1.0) {
      double fac = fac11 / std::pow(err_old, kBeta);
      fac = std::clamp(fac / kSafe, 1.0 / kFacMax, 1.0 / kFacMin);
      double h_next = h_try / fac;
      if (reject_last) h_next = std::min(h_next, h_try);
      err_old = std::max(err, 1e-4);
      ++st.accepted;
      t = clipped ? target : t + h_try;
      y.swap(y_new);
      f(t, y, k[0]);  // FSAL stage for the next step
      ++st.evaluations;
      reject_last = false;
      // A step shortened to land on a stop should not shrink the next one.
      h = clipped ? std::max(h_next, h) : h_next;
      if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
      if (clipped) {
        observer(t, y);
        ++next_stop;
      }
    } else {
      ++st.rejected;
      h = h_try / std::min(1.0 / kFacMin, fac11 / kSafe);
      reject_last = true;
    }
  }
  return st;
}

}  // namespace oner
