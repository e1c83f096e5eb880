#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "pulseuq/common.hpp"

namespace pulseuq {

/// Pulsatile inlet waveform  Q(t) = norm * Qbar * sin^n(w t) cos(w t - phase),
/// w = pi/T, n odd. `norm` is fixed so the cycle mean is exactly Qbar for any
/// phase; the phase is then solved so the cycle maximum equals Qmax.
struct InflowParams {
  double period = 0.86;      // T, s
  double mean_flow = 1e-4;   // Qbar, m^3/s
  double peak_flow = 6.5e-4; // Qmax, m^3/s
  int exponent = 13;         // n
  double phase = 0.0;        // rad, in (0, pi/2]
  double peak_time = 0.0;    // t*, s
  double normalization = 0.0;
};

namespace detail {

/// sqrt(pi) Gamma((n+3)/2) / Gamma((n+2)/2): the mean-exact value of
/// normalization * sin(phase). Exact via factorials for odd n, lgamma otherwise.
inline double mean_normalization_prefactor(int n) {
  if (n >= 1 && n % 2 == 1) {
    // Gamma((n+3)/2) = ((n+1)/2)!  and  Gamma((n+2)/2) = (n!! / 2^((n+1)/2)) sqrt(pi)
    double num = 1.0;
    for (int k = 2; k <= (n + 1) / 2; ++k) num *= k;
    double dblfac = 1.0;
    for (int k = n; k >= 1; k -= 2) dblfac *= k;
    return num * std::pow(2.0, (n + 1) / 2) / dblfac;
  }
  return std::sqrt(M_PI) *
         std::exp(std::lgamma(0.5 * (n + 3)) - std::lgamma(0.5 * (n + 2)));
}

/// sqrt(pi) Gamma((3+n)/2) / Gamma((1+n)/2) = sqrt(pi) (n+1)/2 for any n.
inline double gamma_ratio_prefactor(int n) {
  if (n >= 1 && n % 2 == 1) return std::sqrt(M_PI) * 0.5 * (n + 1);
  return std::sqrt(M_PI) *
         std::exp(std::lgamma(0.5 * (3 + n)) - std::lgamma(0.5 * (1 + n)));
}

inline double waveform(double theta, int n, double phase) {
  return std::pow(std::sin(theta), n) * std::cos(theta - phase);
}

/// Location and value of the cycle maximum of sin^n(theta) cos(theta - phase)
/// over theta in (0, pi): golden-section bracket plus Newton polish on the
/// stationarity condition n cot(theta) = tan(theta - phase).
inline std::pair<double, double> waveform_peak(int n, double phase, double theta_tol) {
  const int n_scan = 256;
  double best = -1e300, theta0 = 0.5 * M_PI;
  for (int k = 1; k < n_scan; ++k) {
    const double th = M_PI * k / n_scan;
    const double v = waveform(th, n, phase);
    if (v > best) {
      best = v;
      theta0 = th;
    }
  }
  double a = theta0 - M_PI / n_scan, b = theta0 + M_PI / n_scan;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  while (b - a > 64.0 * theta_tol) {
    if (waveform(c, n, phase) > waveform(d, n, phase)) b = d; else a = c;
    c = b - gr * (b - a);
    d = a + gr * (b - a);
  }
  double th = 0.5 * (a + b);
  for (int it = 0; it < 60; ++it) {
    const double g = n * std::cos(th) * std::cos(th - phase) -
                     std::sin(th) * std::sin(th - phase);
    const double dg = -n * std::sin(th) * std::cos(th - phase) -
                      (n + 1.0) * std::cos(th) * std::sin(th - phase) -
                      std::sin(th) * std::cos(th - phase);
    const double step = -g / dg;
    th += step;
    if (std::abs(step) < theta_tol) break;
  }
  if (!(th > a - 1e-6 && th < b + 1e-6)) th = 0.5 * (a + b);  // Newton left the bracket
  return {th, waveform(th, n, phase)};
}

}  // namespace detail

/// Peak flow attainable at phase = pi/2 (the minimum over admissible phases).
inline double min_attainable_peak(double mean_flow, int n) {
  return detail::mean_normalization_prefactor(n) * mean_flow;
}

/// Solve the phase so that max_t Q = Qmax; the normalization keeps the cycle
/// mean exactly Qbar. Throws with the attainable bound when Qmax is infeasible.
inline InflowParams solve_inflow_params(double period, double mean_flow, double peak_flow,
                                        int n = 13) {
  if (!(period > 0.0) || !(mean_flow > 0.0))
    throw ValidationError("inflow: T > 0 and Qbar > 0 required");
  if (!(peak_flow > mean_flow))
    throw ValidationError("inflow: Qmax > Qbar required");
  if (n < 1 || n % 2 == 0)
    throw ValidationError("inflow: odd exponent n >= 1 required for T-periodicity");

  const double prefactor = detail::mean_normalization_prefactor(n);
  const double qmin = prefactor * mean_flow;
  if (peak_flow < qmin * (1.0 - 1e-12))
    throw ValidationError("inflow: Qmax = " + std::to_string(peak_flow) +
                          " below attainable minimum " + std::to_string(qmin) +
                          " (phase range (0, pi/2])");

  const double theta_tol = 1e-12;
  auto peak_at = [&](double phase) {
    const double norm = prefactor / std::sin(phase);
    return norm * mean_flow * detail::waveform_peak(n, phase, theta_tol).second;
  };

  // peak(phase) decreases monotonically toward phase = pi/2
  double lo = 1e-9, hi = 0.5 * M_PI;
  double phase;
  if (peak_flow <= qmin) {
    phase = 0.5 * M_PI;
  } else {
    while (hi - lo > 1e-12) {
      const double mid = 0.5 * (lo + hi);
      if (peak_at(mid) > peak_flow) lo = mid; else hi = mid;
    }
    phase = 0.5 * (lo + hi);
  }

  InflowParams p;
  p.period = period;
  p.mean_flow = mean_flow;
  p.peak_flow = peak_flow;
  p.exponent = n;
  p.phase = phase;
  p.normalization = prefactor / std::sin(phase);
  const auto [theta_star, w_star] = detail::waveform_peak(n, phase, 1e-10 * M_PI / period);
  p.peak_time = theta_star * period / M_PI;
  (void)w_star;
  return p;
}

/// T-periodic evaluation of the inflow waveform; Q(0) = 0.
inline double q_inlet(double t, const InflowParams& p) {
  const double w = M_PI / p.period;
  double tau = std::fmod(t, p.period);
  if (tau < 0.0) tau += p.period;
  return p.normalization * p.mean_flow * detail::waveform(w * tau, p.exponent, p.phase);
}

/// Inlet boundary forcing: a flow-rate function of time plus its cycle mean
/// (the mean feeds the accelerated initialization).
struct Inflow {
  std::function<double(double)> flow;
  double mean = 0.0;
  double period = 0.0;  // 0 for non-periodic forcing
};

inline Inflow make_inflow(const InflowParams& p) {
  return {[p](double t) { return q_inlet(t, p); }, p.mean_flow, p.period};
}

inline Inflow make_constant_inflow(double Q) {
  return {[Q](double) { return Q; }, Q, 0.0};
}

inline Inflow make_zero_inflow() { return make_constant_inflow(0.0); }

/// Tabulated one-cycle waveform, repeated periodically with linear
/// interpolation (validation benchmarks; not part of the stochastic model).
inline Inflow make_tabulated_inflow(std::vector<double> t, std::vector<double> q) {
  if (t.size() != q.size() || t.size() < 2)
    throw ValidationError("tabulated inflow needs matching arrays of >= 2 samples");
  const double T = t.back() - t.front();
  if (!(T > 0.0)) throw ValidationError("tabulated inflow needs an increasing time axis");
  LinearProfile prof(t, q);
  double mean = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i)
    mean += 0.5 * (q[i] + q[i + 1]) * (t[i + 1] - t[i]);
  mean /= T;
  const double t0 = t.front();
  return {[prof, t0, T](double tt) {
            double tau = std::fmod(tt - t0, T);
            if (tau < 0.0) tau += T;
            return prof(t0 + tau);
          },
          mean, T};
}

}  // namespace pulseuq
