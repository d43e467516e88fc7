#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "recourse/rng.hpp"
#include "recourse/simulate.hpp"

namespace {

using namespace recourse;

// Expected payoffs by summing over applicant type and recourse outcome.
double oracle_mean(double p, double u, double m, Action a) {
  switch (a) {
    case Action::Accept:
      return p * 1.0 + (1.0 - p) * -1.0;
    case Action::Recourse:
      return p * u * 1.0 + (1.0 - p) * m * -1.0;
    case Action::Reject:
      return 0.0;
  }
  return NAN;
}

TEST(CounterRng, UniformRangeAndSpread) {
  const CounterRng rng(1);
  double sum = 0;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    const double x = rng.uniform(i);
    ASSERT_GE(x, 0.0);
    ASSERT_LT(x, 1.0);
    sum += x;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
  EXPECT_NE(CounterRng(1).bits(0), CounterRng(2).bits(0));
}

TEST(CounterRng, ShuffleIsAPermutationAndRepeatable) {
  std::vector<int> a(100), b(100);
  for (int i = 0; i < 100; ++i) a[i] = b[i] = i;
  deterministic_shuffle(std::span<int>(a), 5);
  deterministic_shuffle(std::span<int>(b), 5);
  EXPECT_EQ(a, b);
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Simulate, RecourseExampleWithinFourStandardErrors) {
  const auto e = simulate_action_payoff(Probability(0.6), {0.5, 0.2}, Action::Recourse, 1'000'000, 42);
  EXPECT_EQ(e.draws, 1'000'000u);
  EXPECT_EQ(e.seed, 42u);
  EXPECT_GT(e.standard_error, 0.0);
  EXPECT_LE(std::abs(e.mean - 0.22), 4.0 * e.standard_error) << e.mean << " se " << e.standard_error;
}

TEST(Simulate, DegenerateCasesAreExact) {
  const auto rej = simulate_action_payoff(Probability(0.3), {0.5, 0.2}, Action::Reject, 1000, 1);
  EXPECT_EQ(rej.mean, 0.0);
  EXPECT_EQ(rej.standard_error, 0.0);
  const auto acc = simulate_action_payoff(Probability(1.0), {0.5, 0.2}, Action::Accept, 1000, 1);
  EXPECT_EQ(acc.mean, 1.0);
  EXPECT_EQ(acc.standard_error, 0.0);
  const auto bad = simulate_action_payoff(Probability(0.0), {0.5, 1.0}, Action::Recourse, 1000, 1);
  EXPECT_EQ(bad.mean, -1.0);
  EXPECT_THROW(simulate_action_payoff(Probability(0.5), {0.5, 0.2}, Action::Accept, 0, 1), ValidationError);
}

TEST(Simulate, SameSeedSameResultAndChunkingIsIrrelevant) {
  const PolicyParams params(0.7, 0.3);
  const auto a = simulate_action_payoff(Probability(0.45), params, Action::Recourse, 200000, 9);
  const auto b = simulate_action_payoff(Probability(0.45), params, Action::Recourse, 200000, 9);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.standard_error, b.standard_error);

  PayoffTally chunks;
  for (std::uint64_t start = 0; start < 200000; start += 30000) {
    chunks += simulate_range(0.45, params, Action::Recourse, 9, start, std::min<std::uint64_t>(start + 30000, 200000));
  }
  const auto c = estimate_from(chunks, 9);
  EXPECT_EQ(c.mean, a.mean);
  EXPECT_EQ(c.standard_error, a.standard_error);

  const auto other = simulate_action_payoff(Probability(0.45), params, Action::Recourse, 200000, 10);
  EXPECT_NE(other.mean, a.mean);
}

TEST(Simulate, StandardErrorMatchesDirectComputation) {
  PayoffTally t;
  t.wins = 3;
  t.losses = 1;
  t.draws = 6;  // values 1,1,1,-1,0,0
  const auto e = estimate_from(t, 0);
  const double xs[] = {1, 1, 1, -1, 0, 0};
  double mean = 0, ss = 0;
  for (double x : xs) mean += x / 6;
  for (double x : xs) ss += (x - mean) * (x - mean);
  EXPECT_NEAR(e.mean, mean, 1e-15);
  EXPECT_NEAR(e.standard_error, std::sqrt(ss / 5) / std::sqrt(6.0), 1e-15);
}

TEST(Simulate, RandomCasesAgreeWithTypeSums) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int within = 0, total = 0;
  for (int i = 0; i < 200; ++i) {
    const double p = unit(rng), u = unit(rng), m = unit(rng);
    const Action a = kAllActions[static_cast<std::size_t>(i % 3)];
    const auto e = simulate_action_payoff(Probability(p), {u, m}, a, 200000, 1000 + static_cast<std::uint64_t>(i));
    const double expected = oracle_mean(p, u, m, a);
    ++total;
    if (e.standard_error == 0.0 ? e.mean == expected : std::abs(e.mean - expected) <= 4.0 * e.standard_error) {
      ++within;
    }
  }
  EXPECT_GE(within, total * 99 / 100);
}

TEST(Simulate, AcceptFrequencyTracksProbability) {
  for (double p : {0.05, 0.3, 0.5, 0.8}) {
    const auto e = simulate_action_payoff(Probability(p), {0.5, 0.5}, Action::Accept, 400000, 3);
    const double implied_p = (e.mean + 1.0) / 2.0;
    EXPECT_NEAR(implied_p, p, 4.0 * e.standard_error / 2.0 + 1e-12);
  }
}

TEST(VerifyPolicy, ExampleGridHasNoUnexplainedDisagreement) {
  const std::vector<Probability> grid{Probability(0.1), Probability(0.4), Probability(0.9)};
  const auto v = verify_policy(grid, {0.5, 0.2}, 1'000'000, 42);
  ASSERT_EQ(v.checks.size(), 3u);
  EXPECT_EQ(v.unexplained_disagreements(), 0u);
  EXPECT_EQ(v.checks[0].analytic, Action::Reject);
  EXPECT_EQ(v.checks[1].analytic, Action::Recourse);
  EXPECT_EQ(v.checks[2].analytic, Action::Accept);
  for (const auto& c : v.checks) EXPECT_TRUE(c.agrees());
}

TEST(VerifyPolicy, ExactTieIsAmbiguous) {
  const std::vector<Probability> grid{Probability(0.5)};
  const auto v = verify_policy(grid, {0.5, 0.5}, 100000, 1);
  ASSERT_EQ(v.checks.size(), 1u);
  EXPECT_TRUE(v.checks[0].ambiguous);
  EXPECT_EQ(v.unexplained_disagreements(), 0u);
}

TEST(VerifyPolicy, EmptyGrid) {
  const auto v = verify_policy({}, {0.5, 0.2}, 1000, 1);
  EXPECT_TRUE(v.checks.empty());
  EXPECT_EQ(v.disagreements(), 0u);
}

TEST(VerifyPolicy, FineGridOnlyDisagreesNearTies) {
  std::vector<Probability> grid;
  for (int i = 0; i <= 100; ++i) grid.emplace_back(i / 100.0);
  for (const PolicyParams params : {PolicyParams(0.5, 0.2), PolicyParams(0.9, 0.05), PolicyParams(0.3, 0.6)}) {
    const auto v = verify_policy(grid, params, 100000, 5);
    EXPECT_EQ(v.unexplained_disagreements(), 0u);
  }
}

}  // namespace
