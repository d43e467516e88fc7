#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "recourse/types.hpp"

// Single decision-maker: expected payoffs of accept / recourse / reject for an
// applicant who is profitable with probability p, and the resulting policy.

namespace recourse {

struct ExpectedPayoffs {
  double accept = 0.0;
  double recourse = 0.0;
  double reject = 0.0;

  double of(Action a) const noexcept {
    switch (a) {
      case Action::Accept:
        return accept;
      case Action::Recourse:
        return recourse;
      case Action::Reject:
        return reject;
    }
    return 0.0;
  }
};

/// Open interval of probabilities. An empty band has magnitude 0 and its
/// endpoints are meaningless.
struct Band {
  Probability lower;
  Probability upper;
  bool empty = true;

  static Band none() { return Band{}; }
  static Band open(double lo, double hi) { return Band{Probability(lo), Probability(hi), false}; }

  bool contains(double p) const noexcept { return !empty && lower.value() < p && p < upper.value(); }
  double magnitude() const noexcept { return empty ? 0.0 : upper.value() - lower.value(); }
};

inline double accept_payoff(double p) noexcept { return p - (1.0 - p); }

inline double recourse_payoff(double p, const PolicyParams& params) noexcept {
  return p * params.u() - (1.0 - p) * params.m();
}

inline ExpectedPayoffs expected_payoffs(Probability p, const PolicyParams& params) noexcept {
  return {accept_payoff(p), recourse_payoff(p, params), 0.0};
}

/// Argmax over the three payoffs. Exact ties go to the earlier action in
/// Accept, Recourse, Reject order.
inline Action best_action(const ExpectedPayoffs& payoffs) noexcept {
  Action best = Action::Accept;
  for (Action a : {Action::Recourse, Action::Reject}) {
    if (payoffs.of(a) > payoffs.of(best)) best = a;
  }
  return best;
}

inline Action optimal_action(Probability p, const PolicyParams& params) noexcept {
  return best_action(expected_payoffs(p, params));
}

/// Probabilities for which recourse is strictly optimal:
///   m/(u+m) < p < (1-m)/((1-m)+(1-u)),
/// empty whenever m >= u (which also covers u = m = 0 and u = m = 1).
inline Band recourse_band(const PolicyParams& params) {
  const double u = params.u();
  const double m = params.m();
  if (m >= u) return Band::none();
  return Band::open(m / (u + m), (1.0 - m) / ((1.0 - m) + (1.0 - u)));
}

inline double band_magnitude(const PolicyParams& params) { return recourse_band(params).magnitude(); }

/// Applicants accepted under a plain accept/reject rule (p > 1/2) who are
/// moved to recourse once recourse is available.
inline Band accept_to_recourse_band(const PolicyParams& params) {
  const Band band = recourse_band(params);
  if (band.empty || band.upper.value() <= 0.5) return Band::none();
  return Band::open(0.5, band.upper.value());
}

struct PopulationClassification {
  std::array<std::size_t, 3> counts{};
  std::vector<Action> labels;

  std::size_t count(Action a) const noexcept { return counts[static_cast<std::size_t>(index_of(a))]; }
  std::size_t total() const noexcept { return counts[0] + counts[1] + counts[2]; }
};

inline PopulationClassification classify_population(std::span<const Probability> ps,
                                                    const PolicyParams& params) {
  PopulationClassification out;
  out.labels.reserve(ps.size());
  for (Probability p : ps) {
    const Action a = optimal_action(p, params);
    out.labels.push_back(a);
    ++out.counts[static_cast<std::size_t>(index_of(a))];
  }
  return out;
}

/// Number of probabilities strictly inside `band`.
inline std::size_t count_in_band(std::span<const double> ps, const Band& band) noexcept {
  std::size_t n = 0;
  for (double p : ps) n += band.contains(p) ? 1 : 0;
  return n;
}

}  // namespace recourse
