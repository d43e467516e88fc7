#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "recourse/model.hpp"
#include "recourse/rng.hpp"
#include "recourse/types.hpp"

// Monte Carlo estimates of the single decision-maker payoffs, drawn from the
// generative story directly (applicant type, then the recourse outcome) with
// no reference to the closed-form expressions.

namespace recourse {

/// Payoff of one simulated applicant. Draw i consumes counters 2i and 2i+1.
inline int simulate_one(const CounterRng& rng, std::uint64_t draw, double p, const PolicyParams& params,
                        Action action) noexcept {
  const bool profitable = rng.uniform(2 * draw) < p;
  switch (action) {
    case Action::Accept:
      return profitable ? 1 : -1;
    case Action::Reject:
      return 0;
    case Action::Recourse: {
      const double v = rng.uniform(2 * draw + 1);
      if (profitable) return v < params.u() ? 1 : 0;
      return v < params.m() ? -1 : 0;
    }
  }
  return 0;
}

/// Outcome tallies. Payoffs are in {-1, 0, +1}, so integer counts are
/// sufficient statistics and merging chunks is exact.
struct PayoffTally {
  std::uint64_t wins = 0;
  std::uint64_t losses = 0;
  std::uint64_t draws = 0;

  PayoffTally& operator+=(const PayoffTally& o) noexcept {
    wins += o.wins;
    losses += o.losses;
    draws += o.draws;
    return *this;
  }
};

inline PayoffTally simulate_range(double p, const PolicyParams& params, Action action, std::uint64_t seed,
                                  std::uint64_t first_draw, std::uint64_t end_draw) noexcept {
  const CounterRng rng(seed);
  PayoffTally t;
  for (std::uint64_t i = first_draw; i < end_draw; ++i) {
    const int x = simulate_one(rng, i, p, params, action);
    t.wins += x > 0;
    t.losses += x < 0;
  }
  t.draws = end_draw - first_draw;
  return t;
}

struct SimEstimate {
  double mean = 0.0;
  double standard_error = 0.0;  // sample SD (n-1) / sqrt(n); 0 when n == 1
  std::uint64_t draws = 0;
  std::uint64_t seed = 0;
};

inline SimEstimate estimate_from(const PayoffTally& t, std::uint64_t seed) noexcept {
  SimEstimate e;
  e.draws = t.draws;
  e.seed = seed;
  if (t.draws == 0) return e;
  const double n = static_cast<double>(t.draws);
  const double sum = static_cast<double>(t.wins) - static_cast<double>(t.losses);
  const double sum_sq = static_cast<double>(t.wins + t.losses);
  e.mean = sum / n;
  if (t.draws > 1) {
    const double var = std::max(0.0, (sum_sq - n * e.mean * e.mean) / (n - 1.0));
    e.standard_error = std::sqrt(var / n);
  }
  return e;
}

inline SimEstimate simulate_action_payoff(Probability p, const PolicyParams& params, Action action,
                                          std::uint64_t draws, std::uint64_t seed) {
  if (draws == 0) throw ValidationError("simulate: draws must be positive");
  return estimate_from(simulate_range(p, params, action, seed, 0, draws), seed);
}

struct PolicyCheck {
  double p = 0.0;
  Action analytic = Action::Accept;
  Action simulated = Action::Accept;
  std::array<SimEstimate, 3> estimates{};
  bool ambiguous = false;

  bool agrees() const noexcept { return analytic == simulated; }
};

struct PolicyVerification {
  std::vector<PolicyCheck> checks;

  std::size_t disagreements() const noexcept {
    std::size_t n = 0;
    for (const auto& c : checks) n += !c.agrees();
    return n;
  }
  std::size_t unexplained_disagreements() const noexcept {
    std::size_t n = 0;
    for (const auto& c : checks) n += !c.agrees() && !c.ambiguous;
    return n;
  }
};

inline constexpr double kSigmaBound = 4.0;

/// Compares the argmax of simulated payoffs with `optimal_action` on each p.
/// A point is ambiguous when the analytic gap between the best and runner-up
/// actions is below 4 combined standard errors of their estimates. All three
/// actions share one seed (common random numbers).
inline PolicyVerification verify_policy(std::span<const Probability> p_grid, const PolicyParams& params,
                                        std::uint64_t draws, std::uint64_t seed) {
  PolicyVerification report;
  report.checks.reserve(p_grid.size());
  for (Probability p : p_grid) {
    PolicyCheck c;
    c.p = p.value();
    ExpectedPayoffs simulated;
    for (Action a : kAllActions) {
      c.estimates[static_cast<std::size_t>(index_of(a))] = simulate_action_payoff(p, params, a, draws, seed);
    }
    simulated.accept = c.estimates[0].mean;
    simulated.recourse = c.estimates[1].mean;
    simulated.reject = c.estimates[2].mean;
    c.simulated = best_action(simulated);

    const ExpectedPayoffs analytic = expected_payoffs(p, params);
    c.analytic = best_action(analytic);
    Action runner_up = c.analytic;
    double runner_pay = -HUGE_VAL;
    for (Action a : kAllActions) {
      if (a != c.analytic && analytic.of(a) > runner_pay) {
        runner_pay = analytic.of(a);
        runner_up = a;
      }
    }
    const double se_best = c.estimates[static_cast<std::size_t>(index_of(c.analytic))].standard_error;
    const double se_next = c.estimates[static_cast<std::size_t>(index_of(runner_up))].standard_error;
    const double gap = analytic.of(c.analytic) - runner_pay;
    c.ambiguous = gap <= kSigmaBound * std::sqrt(se_best * se_best + se_next * se_next);
    report.checks.push_back(c);
  }
  return report;
}

}  // namespace recourse
