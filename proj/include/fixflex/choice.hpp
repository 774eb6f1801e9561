#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>

#include "fixflex/common.hpp"
#include "fixflex/demand.hpp"
#include "fixflex/router.hpp"

namespace fixflex {

enum class Mode : std::uint8_t { Transit, Auto };

inline const char* to_string(Mode m) { return m == Mode::Transit ? "transit" : "auto"; }

// V_T = β_T0 − Σ β·x. Attribute terms are disutilities; unreachable paths
// give −∞.
inline double transit_utility(const TransitPath& path, const CoefficientVector& b, const FareSchedule& fares) {
  if (!path.reachable) return -kInf;
  return b.transit_asc - GeneralizedCostWeights::from(b, fares).cost_of(path.attrs);
}

inline double transit_utility(const ModalPathAttributes& a, const CoefficientVector& b) {
  return b.transit_asc - (b.walk * a.walk_min + b.micro_wait * a.micro_wait_min + b.frt_wait * a.frt_wait_min +
                          b.micro_ivtt * a.micro_ivtt_min + b.frt_ivtt * a.frt_ivtt_min + b.fare * a.fare +
                          b.frt_transfer * static_cast<double>(a.transfers));
}

inline double auto_utility(const AutoPathAttributes& a, const CoefficientVector& b) {
  return b.auto_asc - (b.auto_ivtt * a.ivtt_min + b.auto_gas * a.gas_cost);
}

inline double auto_utility(const AutoPath& path, const CoefficientVector& b) {
  if (!path.reachable) return -kInf;
  return auto_utility(path.attrs, b);
}

// Binary logit Pr(transit), evaluated after subtracting the larger utility.
inline double choice_probability(double v_transit, double v_auto) {
  if (v_transit == -kInf && v_auto == -kInf) throw ValidationError("no viable mode: both utilities are -inf");
  if (std::isnan(v_transit) || std::isnan(v_auto)) throw ValidationError("utility is NaN");
  if (v_transit == -kInf) return 0.0;
  if (v_auto == -kInf) return 1.0;
  const double m = std::max(v_transit, v_auto);
  const double et = std::exp(v_transit - m);
  const double ed = std::exp(v_auto - m);
  return et / (et + ed);
}

struct ModeChoiceState {
  std::int64_t rq_id = 0;
  double prob_transit = 0.0;
  double prob_transit_prev = 0.0;
  std::optional<Mode> chosen_mode;
  std::uint64_t draw_count = 0;
  std::uint64_t stream_seed = 0;

  // Next uniform of this traveler's stream; advances only when called.
  double draw() { return counter_uniform(stream_seed, draw_count++); }
};

inline ModeChoiceState initial_choice_state(const TravelerProfile& t) {
  ModeChoiceState s;
  s.rq_id = t.rq_id;
  s.stream_seed = derive_seed(t.rng_seed, "mode_choice");
  return s;
}

// Perception-threshold update: redraw only when the transit probability moved
// by more than eta (or no mode has been chosen yet); otherwise keep the mode.
// `uniform` supplies u ~ U(0,1).
template <class UniformSource>
ModeChoiceState assign_mode(ModeChoiceState state, double new_prob, double eta, UniformSource&& uniform) {
  const bool redraw = !state.chosen_mode || std::abs(new_prob - state.prob_transit) > eta;
  if (redraw) state.chosen_mode = uniform() < new_prob ? Mode::Transit : Mode::Auto;
  state.prob_transit_prev = state.prob_transit;
  state.prob_transit = new_prob;
  return state;
}

// Draws from the traveler's own counter-based stream.
inline ModeChoiceState assign_mode(const ModeChoiceState& state, double new_prob, double eta) {
  std::uint64_t used = 0;
  auto next = assign_mode(state, new_prob, eta, [&] { return counter_uniform(state.stream_seed, state.draw_count + used++); });
  next.draw_count += used;
  return next;
}

}  // namespace fixflex
