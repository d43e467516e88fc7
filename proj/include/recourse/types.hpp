#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <string>
#include <string_view>

#include "recourse/error.hpp"

namespace recourse {

/// A probability in [0, 1]. NaN, infinities and out-of-range values are
/// rejected at construction.
class Probability {
 public:
  constexpr Probability() = default;
  explicit Probability(double value) : value_(value) {
    if (!std::isfinite(value) || value < 0.0 || value > 1.0) {
      throw ValidationError("probability out of range [0, 1]: " + std::to_string(value));
    }
  }

  constexpr double value() const noexcept { return value_; }
  constexpr operator double() const noexcept { return value_; }

  friend constexpr auto operator<=>(Probability, Probability) = default;

 private:
  double value_ = 0.0;
};

/// Applicant response to a recourse offer.
///   continuation: chance a profitable applicant follows through.
///   manipulation: chance an unprofitable applicant gets accepted anyway.
struct PolicyParams {
  Probability continuation;
  Probability manipulation;

  PolicyParams() = default;
  PolicyParams(Probability u, Probability m) : continuation(u), manipulation(m) {}
  PolicyParams(double u, double m) : continuation(u), manipulation(m) {}

  double u() const noexcept { return continuation.value(); }
  double m() const noexcept { return manipulation.value(); }
};

// Enumerator order is the applicant's preference order and the tie order.
enum class Action : int { Accept = 0, Recourse = 1, Reject = 2 };

inline constexpr std::array<Action, 3> kAllActions{Action::Accept, Action::Recourse,
                                                   Action::Reject};

constexpr int index_of(Action a) noexcept { return static_cast<int>(a); }

constexpr std::string_view to_string(Action a) noexcept {
  switch (a) {
    case Action::Accept:
      return "accept";
    case Action::Recourse:
      return "recourse";
    case Action::Reject:
      return "reject";
  }
  return "?";
}

inline Action parse_action(std::string_view s) {
  for (Action a : kAllActions) {
    if (to_string(a) == s) return a;
  }
  throw ValidationError("unknown action: " + std::string(s));
}

}  // namespace recourse
