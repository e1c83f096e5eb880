#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pulseuq/common.hpp"
#include "pulseuq/network.hpp"
#include "pulseuq/solver/simulation.hpp"

namespace pulseuq {

struct WaveSeparationOptions {
  /// Allowed first/last sample mismatch, relative to the pulse amplitude.
  double periodicity_tol = 0.05;
  /// Amplitude convention for the separated components: peak above the
  /// integration constant (default) or half peak-to-peak.
  enum class Amplitude { peak_above_constant, peak_to_peak } amplitude =
      Amplitude::peak_above_constant;
};

struct WaveSeparation {
  std::vector<double> forward;   // p_f(t)
  std::vector<double> backward;  // p_b(t)
  double constant_forward = 0.0;
  double constant_backward = 0.0;
  double amplitude_forward = 0.0;  // P_f
  double amplitude_backward = 0.0; // P_b
};

/// Characteristic wave separation over one periodic cycle: increments
/// dp_+- = (dp +- rho c du)/2 with the nonlinear wave speed c(A) evaluated on
/// the instantaneous state, integrated cumulatively; each component carries an
/// integration constant of half the cycle mean of p.
inline WaveSeparation separate_waves(std::span<const double> p, std::span<const double> u,
                                     std::span<const double> A, double beta, double rho,
                                     const WaveSeparationOptions& opt = {}) {
  const std::size_t n = p.size();
  if (n < 3 || u.size() != n || A.size() != n)
    throw ValidationError("wave separation needs one full cycle of synchronized samples");

  double p_min = p[0], p_max = p[0], p_mean = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    p_min = std::min(p_min, p[k]);
    p_max = std::max(p_max, p[k]);
  }
  // trapezoid mean on a uniform grid with identical first/last phase
  for (std::size_t k = 0; k + 1 < n; ++k) p_mean += 0.5 * (p[k] + p[k + 1]);
  p_mean /= (n - 1);

  const double amp = std::max(p_max - p_min, 1e-30);
  if (std::abs(p.back() - p.front()) > opt.periodicity_tol * amp)
    throw ValidationError("wave separation: input cycle is not periodic "
                          "(first/last sample mismatch beyond tolerance)");

  WaveSeparation out;
  out.forward.resize(n);
  out.backward.resize(n);
  double f = 0.0, b = 0.0;
  out.forward[0] = 0.0;
  out.backward[0] = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double dp = p[k + 1] - p[k];
    const double du = u[k + 1] - u[k];
    const double A_mid = 0.5 * (A[k] + A[k + 1]);
    const double c = solver::wave_speed(A_mid, beta, rho);
    f += 0.5 * (dp + rho * c * du);
    b += 0.5 * (dp - rho * c * du);
    out.forward[k + 1] = f;
    out.backward[k + 1] = b;
  }

  out.constant_forward = 0.5 * p_mean;
  out.constant_backward = 0.5 * p_mean;
  auto shift = [n](std::vector<double>& v, double target_mean) {
    double m = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) m += 0.5 * (v[k] + v[k + 1]);
    m /= (n - 1);
    for (auto& x : v) x += target_mean - m;
  };
  shift(out.forward, out.constant_forward);
  shift(out.backward, out.constant_backward);

  auto amplitude = [&](const std::vector<double>& v, double constant) {
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    if (opt.amplitude == WaveSeparationOptions::Amplitude::peak_to_peak)
      return 0.5 * (*mx - *mn);
    return *mx - constant;
  };
  out.amplitude_forward = amplitude(out.forward, out.constant_forward);
  out.amplitude_backward = amplitude(out.backward, out.constant_backward);
  return out;
}

/// Scalar outputs at one station for one periodic cycle.
struct StationQoI {
  std::string label;
  int segment_id = 0;
  double p_sys = 0.0, p_dia = 0.0;
  double A_sys = 0.0, A_dia = 0.0;
  double PP = 0.0;   // pulse pressure, Pa
  double AD = 0.0;   // arterial distensibility (A_sys - A_dia)/A_dia
  double RM = 0.0;   // reflection magnitude P_b / P_f
  double P_f = 0.0, P_b = 0.0;
  double AF = 0.0;   // PP_ref / PP, 1 at the reference station
};

/// QoIs from the final recorded cycle of a waveform record. The amplification
/// factor is relative to `reference_station` (index into record.stations);
/// pass -1 to skip AF.
inline std::vector<StationQoI> compute_qoi(const solver::WaveformRecord& rec, double rho,
                                           int reference_station,
                                           const WaveSeparationOptions& sep_opt = {}) {
  if (rec.n_cycles() < 1) throw ValidationError("compute_qoi: no complete cycle recorded");
  const auto [s0, s1] = rec.final_cycle_range();
  std::vector<StationQoI> out(rec.stations.size());
  for (std::size_t i = 0; i < rec.stations.size(); ++i) {
    const auto& st = rec.stations[i];
    StationQoI& q = out[i];
    q.label = st.label;
    q.segment_id = st.segment_id;
    const auto pb = std::span<const double>(rec.p[i]).subspan(s0, s1 - s0 + 1);
    const auto ub = std::span<const double>(rec.u[i]).subspan(s0, s1 - s0 + 1);
    const auto ab = std::span<const double>(rec.a[i]).subspan(s0, s1 - s0 + 1);
    q.p_sys = *std::max_element(pb.begin(), pb.end());
    q.p_dia = *std::min_element(pb.begin(), pb.end());
    q.A_sys = *std::max_element(ab.begin(), ab.end());
    q.A_dia = *std::min_element(ab.begin(), ab.end());
    q.PP = q.p_sys - q.p_dia;
    q.AD = (q.A_sys - q.A_dia) / q.A_dia;
    const auto sep = separate_waves(pb, ub, ab, st.beta, rho, sep_opt);
    q.P_f = sep.amplitude_forward;
    q.P_b = sep.amplitude_backward;
    q.RM = q.P_f != 0.0 ? q.P_b / q.P_f : 0.0;
  }
  if (reference_station >= 0) {
    if (reference_station >= static_cast<int>(out.size()))
      throw ValidationError("compute_qoi: reference station absent");
    const double pp_ref = out[reference_station].PP;
    for (auto& q : out) q.AF = q.PP != 0.0 ? pp_ref / q.PP : 0.0;
  }
  return out;
}

/// Arithmetic aggregation of per-station values over named segment groups.
/// `values` maps segment id to a scalar (e.g. a surrogate mean or std).
inline std::map<std::string, double> group_means(const std::map<int, double>& values,
                                                 const std::map<std::string, std::vector<int>>& groups) {
  std::map<std::string, double> out;
  for (const auto& [name, ids] : groups) {
    if (ids.empty()) throw ValidationError("group '" + name + "' is empty");
    double acc = 0.0;
    int found = 0;
    for (int id : ids) {
      auto it = values.find(id);
      if (it == values.end()) continue;
      acc += it->second;
      ++found;
    }
    if (found == 0) throw ValidationError("group '" + name + "' has no stations with values");
    out[name] = acc / found;
  }
  return out;
}

}  // namespace pulseuq
