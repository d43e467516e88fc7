#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "recourse/model.hpp"
#include "recourse/types.hpp"

// Two decision-makers (Row and Column) see the same p and move simultaneously.
// The applicant picks the better offer (Accept > Recourse > Reject) and splits
// evenly between identical offers.

namespace recourse {

enum class Player { Row, Column };

constexpr std::string_view to_string(Player p) noexcept {
  return p == Player::Row ? "row" : "column";
}

struct PayoffCell {
  double row = 0.0;
  double col = 0.0;

  friend bool operator==(const PayoffCell&, const PayoffCell&) = default;
};

struct PayoffMatrix {
  std::array<std::array<PayoffCell, 3>, 3> cells{};

  PayoffCell& at(Action row, Action col) noexcept {
    return cells[static_cast<std::size_t>(index_of(row))][static_cast<std::size_t>(index_of(col))];
  }
  const PayoffCell& at(Action row, Action col) const noexcept {
    return cells[static_cast<std::size_t>(index_of(row))][static_cast<std::size_t>(index_of(col))];
  }

  /// Payoff to `player` when it plays `own` and the opponent plays `other`.
  double payoff(Player player, Action own, Action other) const noexcept {
    return player == Player::Row ? at(own, other).row : at(other, own).col;
  }

  bool is_symmetric() const noexcept {
    for (Action a : kAllActions) {
      for (Action b : kAllActions) {
        if (at(a, b).row != at(b, a).col) return false;
      }
    }
    return true;
  }
};

inline PayoffMatrix build_payoff_matrix(Probability p, const PolicyParams& params) {
  const ExpectedPayoffs solo = expected_payoffs(p, params);
  PayoffMatrix matrix;
  for (Action r : kAllActions) {
    for (Action c : kAllActions) {
      PayoffCell& cell = matrix.at(r, c);
      if (r == c) {
        cell = {0.5 * solo.of(r), 0.5 * solo.of(c)};
      } else if (index_of(r) < index_of(c)) {
        cell = {solo.of(r), 0.0};
      } else {
        cell = {0.0, solo.of(c)};
      }
    }
  }
  return matrix;
}

struct ActionProfile {
  Action row;
  Action col;

  friend bool operator==(const ActionProfile&, const ActionProfile&) = default;
};

struct EliminationStep {
  Player player;
  Action eliminated;
  Action dominating;

  friend bool operator==(const EliminationStep&, const EliminationStep&) = default;
};

/// Strategy sets that survive iterated elimination of strictly dominated
/// actions, together with the original matrix.
struct ReducedGame {
  PayoffMatrix matrix;
  std::array<bool, 3> row_alive{true, true, true};
  std::array<bool, 3> col_alive{true, true, true};

  std::array<bool, 3>& alive(Player p) noexcept { return p == Player::Row ? row_alive : col_alive; }
  const std::array<bool, 3>& alive(Player p) const noexcept {
    return p == Player::Row ? row_alive : col_alive;
  }
  bool is_alive(Player p, Action a) const noexcept {
    return alive(p)[static_cast<std::size_t>(index_of(a))];
  }
  std::vector<Action> actions(Player p) const {
    std::vector<Action> out;
    for (Action a : kAllActions) {
      if (is_alive(p, a)) out.push_back(a);
    }
    return out;
  }
};

/// True when `dominating` beats `dominated` for `player` against every
/// opponent action still alive in `game`.
inline bool strictly_dominates(const ReducedGame& game, Player player, Action dominating,
                               Action dominated) noexcept {
  const Player opponent = player == Player::Row ? Player::Column : Player::Row;
  bool any_opponent = false;
  for (Action other : kAllActions) {
    if (!game.is_alive(opponent, other)) continue;
    any_opponent = true;
    if (!(game.matrix.payoff(player, dominating, other) > game.matrix.payoff(player, dominated, other))) {
      return false;
    }
  }
  return any_opponent;
}

struct EliminationResult {
  ReducedGame reduced;
  std::vector<EliminationStep> trace;
};

/// Removes strictly dominated actions one at a time (Row before Column, in
/// action order) until none remain. Strict dominance makes the surviving sets
/// independent of this order.
inline EliminationResult iterated_elimination(const PayoffMatrix& matrix) {
  EliminationResult result{ReducedGame{matrix}, {}};
  ReducedGame& game = result.reduced;
  bool changed = true;
  while (changed) {
    changed = false;
    for (Player player : {Player::Row, Player::Column}) {
      for (Action victim : kAllActions) {
        if (!game.is_alive(player, victim)) continue;
        for (Action winner : kAllActions) {
          if (winner == victim || !game.is_alive(player, winner)) continue;
          if (strictly_dominates(game, player, winner, victim)) {
            game.alive(player)[static_cast<std::size_t>(index_of(victim))] = false;
            result.trace.push_back({player, victim, winner});
            changed = true;
            break;
          }
        }
        if (changed) break;
      }
      if (changed) break;
    }
  }
  return result;
}

struct EquilibriumResult {
  std::vector<ActionProfile> pure_equilibria;
  std::vector<EliminationStep> elimination_trace;
  bool indifference_flag = false;
};

/// All pure profiles where each player's action is a weak best response.
/// `indifference_flag` is set if some listed profile has a deviation that
/// pays exactly the same.
inline EquilibriumResult pure_nash(const PayoffMatrix& matrix) {
  EquilibriumResult result;
  for (Action r : kAllActions) {
    for (Action c : kAllActions) {
      const double row_pay = matrix.at(r, c).row;
      const double col_pay = matrix.at(r, c).col;
      bool stable = true;
      bool tie = false;
      for (Action d : kAllActions) {
        if (d == r) continue;
        const double dev = matrix.at(d, c).row;
        if (dev > row_pay) stable = false;
        if (dev == row_pay) tie = true;
      }
      for (Action d : kAllActions) {
        if (d == c) continue;
        const double dev = matrix.at(r, d).col;
        if (dev > col_pay) stable = false;
        if (dev == col_pay) tie = true;
      }
      if (stable) {
        result.pure_equilibria.push_back({r, c});
        result.indifference_flag = result.indifference_flag || tie;
      }
    }
  }
  result.elimination_trace = iterated_elimination(matrix).trace;
  return result;
}

/// Actions `a` such that (a, a) is a pure equilibrium with the highest
/// per-player payoff among symmetric pure equilibria. Several actions are
/// returned only when they tie exactly.
inline std::vector<Action> payoff_dominant_symmetric_actions(const PayoffMatrix& matrix,
                                                             const EquilibriumResult& result) {
  std::vector<Action> best;
  double best_pay = -HUGE_VAL;
  for (const ActionProfile& prof : result.pure_equilibria) {
    if (prof.row != prof.col) continue;
    const double pay = matrix.at(prof.row, prof.col).row;
    if (pay > best_pay) {
      best_pay = pay;
      best.assign(1, prof.row);
    } else if (pay == best_pay) {
      best.push_back(prof.row);
    }
  }
  return best;
}

struct CompetitionThresholds {
  Probability accept_threshold;  // Accept above
  Probability reject_threshold;  // Reject below
};

/// Single decision-maker accept threshold: max{(1-m)/((1-m)+(1-u)), 1/2},
/// which is 1/2 whenever m >= u.
inline double monopoly_accept_threshold(const PolicyParams& params) {
  const Band band = recourse_band(params);
  return band.empty ? 0.5 : std::max(band.upper.value(), 0.5);
}

inline CompetitionThresholds competition_thresholds(const PolicyParams& params) {
  const double u = params.u();
  const double m = params.m();
  const double accept = std::max((1.0 + (1.0 - m)) / (2.0 + (1.0 - m) + (1.0 - u)), 0.5);
  const double reject = m < u ? m / (u + m) : 0.5;
  return {Probability(accept), Probability(reject)};
}

enum class RegionLabel { Reject, Recourse, Accept, Boundary };

constexpr std::string_view to_string(RegionLabel r) noexcept {
  switch (r) {
    case RegionLabel::Reject:
      return "reject";
    case RegionLabel::Recourse:
      return "recourse";
    case RegionLabel::Accept:
      return "accept";
    case RegionLabel::Boundary:
      return "boundary";
  }
  return "?";
}

inline constexpr double kBoundaryTolerance = 1e-9;

inline RegionLabel competitive_region(double p, const CompetitionThresholds& t) noexcept {
  const double lo = t.reject_threshold.value();
  const double hi = t.accept_threshold.value();
  if (std::abs(p - lo) < kBoundaryTolerance || std::abs(p - hi) < kBoundaryTolerance) {
    return RegionLabel::Boundary;
  }
  if (p < lo) return RegionLabel::Reject;
  if (p > hi) return RegionLabel::Accept;
  return RegionLabel::Recourse;
}

inline std::vector<RegionLabel> competitive_action_regions(const PolicyParams& params,
                                                           std::span<const Probability> p_grid) {
  const CompetitionThresholds t = competition_thresholds(params);
  std::vector<RegionLabel> out;
  out.reserve(p_grid.size());
  for (Probability p : p_grid) out.push_back(competitive_region(p, t));
  return out;
}

inline std::vector<RegionLabel> competitive_action_regions(const PolicyParams& params,
                                                           std::span<const double> p_grid) {
  const CompetitionThresholds t = competition_thresholds(params);
  std::vector<RegionLabel> out;
  out.reserve(p_grid.size());
  for (double p : p_grid) out.push_back(competitive_region(Probability(p), t));
  return out;
}

inline std::optional<Action> to_action(RegionLabel r) noexcept {
  switch (r) {
    case RegionLabel::Reject:
      return Action::Reject;
    case RegionLabel::Recourse:
      return Action::Recourse;
    case RegionLabel::Accept:
      return Action::Accept;
    case RegionLabel::Boundary:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace recourse
