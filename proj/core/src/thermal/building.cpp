// SPDX-License-Identifier: Apache-2.0
#include "hvacdr/thermal/building.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "hvacdr/error.hpp"

namespace hvacdr::thermal {

namespace {

constexpr int kCore = 0;
constexpr int kAttic = 5;

bool finite(const ZoneTemps& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

BuildingModel BuildingModel::small_office() {
  BuildingModel m;
  m.A.setZero();
  for (int p = 1; p <= 4; ++p) {
    m.A(kCore, p) = 0.015;
    m.A(p, kCore) = 0.02;
    int q = p % 4 + 1;
    m.A(p, q) = 0.005;
    m.A(q, p) = 0.005;
  }
  for (int z = 0; z < kConditioned; ++z) {
    m.A(z, kAttic) = 0.01;
    m.A(kAttic, z) = 0.01;
  }
  m.b_x << 0.252, 0.198, 0.18, 0.18, 0.198, 0.36;
  m.b_g << 0.02, 0.01, 0.01, 0.01, 0.01, 0.0;
  for (int i = 0; i < kZones; ++i) m.A(i, i) = 1.0 - m.A.row(i).sum() - m.b_x(i) - m.b_g(i);

  // Coefficients above are for a half-hour response; slow everything down to
  // the hourly step of the scheduler.
  constexpr double scale = 0.5;
  const Eigen::Matrix<double, kZones, kZones> I = Eigen::Matrix<double, kZones, kZones>::Identity();
  m.A = I + scale * (m.A - I);
  m.b_x *= scale;
  m.b_g *= scale;

  m.c_solar << 0.004, 0.014, 0.012, 0.016, 0.014, 0.032;
  m.c_internal << 0.024, 0.012, 0.014, 0.014, 0.012, 0.0;
  m.cooling_alloc << 0.3, 0.176, 0.17, 0.178, 0.176, 0.0;
  m.capacitance << 16.0, 6.4, 8.0, 8.0, 6.4, 20.0;
  m.ground_temp = 15.0;
  return m;
}

double BuildingModel::spectral_radius() const {
  Eigen::EigenSolver<Eigen::Matrix<double, kZones, kZones>> es(A, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

void BuildingModel::validate() const {
  for (int i = 0; i < kZones; ++i) {
    double row = 0.0;
    for (int j = 0; j < kZones; ++j) {
      if (A(i, j) < 0.0) throw config_error("coupling matrix has a negative entry");
      row += A(i, j);
    }
    if (row > 1.0 + 1e-12) throw config_error("coupling matrix is not row-substochastic");
    if (capacitance(i) <= 0.0) throw config_error("zone capacitance must be positive");
  }
  if (spectral_radius() >= 1.0) throw config_error("coupling matrix is not stable");
  double total = 0.0;
  for (int i = 0; i < kConditioned; ++i) {
    if (cooling_alloc(i) < 0.0 || cooling_alloc(i) > 1.0)
      throw config_error("cooling allocation outside [0,1]");
    total += cooling_alloc(i);
  }
  if (std::abs(total - 1.0) > 1e-9) throw config_error("cooling allocation must sum to 1");
  if (cooling_alloc(kAttic) != 0.0) throw config_error("attic must not be cooled");
}

void HvacModel::validate(double ambient_lo, double ambient_hi) const {
  if (!(p_rated > 0.0)) throw config_error("rated power must be positive");
  if (cop(ambient_lo) <= 0.0 || cop(ambient_hi) <= 0.0)
    throw config_error("COP is not positive over the ambient range");
}

void ScenarioDay::validate() const {
  for (int h = 0; h < kHours; ++h) {
    if (!std::isfinite(prices[h]) || !std::isfinite(ambient[h]) || !std::isfinite(insolation[h]) ||
        !std::isfinite(internal_load[h]))
      throw input_error("scenario " + date_tag + " has a non-finite value");
    if (prices[h] < 0.0) throw input_error("scenario " + date_tag + " has a negative price");
    if (insolation[h] < 0.0) throw input_error("scenario " + date_tag + " has negative insolation");
  }
}

ZoneTemps step(const BuildingModel& model, const HvacModel& hvac, const ZoneTemps& state,
               const Env& env, double power) {
  if (!finite(state) || !std::isfinite(env.ambient) || !std::isfinite(env.insolation) ||
      !std::isfinite(env.internal_load) || !std::isfinite(power))
    throw input_error("non-finite state or driver passed to step");
  if (power < 0.0 || power > hvac.p_rated) throw input_error("power outside [0, P_rated]");
  const double q = hvac.cooling(env.ambient, power);
  ZoneTemps next{};
  for (int i = 0; i < kZones; ++i) {
    double v = model.b_x(i) * env.ambient + model.b_g(i) * model.ground_temp +
               model.c_solar(i) * env.insolation + model.c_internal(i) * env.internal_load -
               model.cooling_alloc(i) * q / model.capacitance(i);
    for (int j = 0; j < kZones; ++j) v += model.A(i, j) * state[j];
    next[i] = v;
  }
  return next;
}

std::vector<OperatingRecord> simulate_day(const BuildingModel& model, const HvacModel& hvac,
                                          const ScenarioDay& scenario,
                                          std::span<const double> power_profile,
                                          const ZoneTemps& initial) {
  if (power_profile.size() != kHours)
    throw input_error("power profile must have 24 entries, got " +
                      std::to_string(power_profile.size()));
  std::vector<OperatingRecord> out;
  out.reserve(kHours);
  ZoneTemps state = initial;
  for (int h = 1; h <= kHours; ++h) {
    OperatingRecord r;
    r.t = h;
    r.price = scenario.prices[h - 1];
    r.env = scenario.env(h);
    r.power = power_profile[h - 1];
    state = step(model, hvac, state, r.env, r.power);
    r.zone_temps = state;
    out.push_back(r);
  }
  return out;
}

double energy_cost(const Hourly& prices, std::span<const double> power) {
  if (power.size() != kHours) throw input_error("power profile must have 24 entries");
  double c = 0.0;
  for (int h = 0; h < kHours; ++h) c += prices[h] * power[h];
  return c;
}

}  // namespace hvacdr::thermal
