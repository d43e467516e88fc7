// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "recourse/config.hpp"
#include "recourse/duopoly.hpp"
#include "recourse/german_credit.hpp"
#include "recourse/io.hpp"
#include "recourse/logit.hpp"
#include "recourse/model.hpp"
#include "recourse/report.hpp"
#include "recourse/simulate.hpp"

namespace {

using namespace recourse;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string fmt2(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

const std::string& raw_data() {
  static const std::string text = io::read_file(RECOURSE_DATA_FILE);
  return text;
}

const report::PipelineResult& pipeline() {
  static const report::PipelineResult r = report::run_pipeline(raw_data(), RunConfig{});
  return r;
}

// ---------------------------------------------------------------------------

Outcome ac1() {
  Outcome o;
  const PolicyParams params(0.5, 0.2);
  const Band b = recourse_band(params);
  // Closed forms: m/(u+m) = 0.2/0.7 and (1-m)/((1-m)+(1-u)) = 0.8/1.3.
  const double lo = 2.0 / 7.0, hi = 8.0 / 13.0;
  o.require(!b.empty, "band non-empty");
  o.require(std::abs(b.lower.value() - lo) < 1e-12, "lower = 2/7");
  o.require(std::abs(b.upper.value() - hi) < 1e-12, "upper = 8/13");
  o.require(std::abs(band_magnitude(params) - (hi - lo)) < 1e-12, "magnitude = 8/13 - 2/7");
  o.require(std::round(b.lower.value() * 100) / 100 == 0.29, "rounds to 0.29");
  o.require(std::round(b.upper.value() * 100) / 100 == 0.62, "rounds to 0.62");
  o.require(std::round(band_magnitude(params) * 100) / 100 == 0.33, "magnitude rounds to 0.33");
  o.note("band (" + io::format_number(b.lower) + ", " + io::format_number(b.upper) + "), magnitude " +
         io::format_number(band_magnitude(params)));
  return o;
}

Outcome ac2() {
  Outcome o;
  const PayoffMatrix m = build_payoff_matrix(Probability(0.6), {0.5, 0.2});
  using enum Action;
  struct Cell {
    Action r, c;
    double row, col;
  };
  const Cell expected[] = {{Accept, Accept, 0.1, 0.1},       {Accept, Recourse, 0.2, 0.0},
                           {Accept, Reject, 0.2, 0.0},       {Recourse, Accept, 0.0, 0.2},
                           {Recourse, Recourse, 0.11, 0.11}, {Recourse, Reject, 0.22, 0.0},
                           {Reject, Accept, 0.0, 0.2},       {Reject, Recourse, 0.0, 0.22},
                           {Reject, Reject, 0.0, 0.0}};
  int matched = 0;
  for (const auto& e : expected) {
    const PayoffCell& got = m.at(e.r, e.c);
    const bool ok = std::abs(got.row - e.row) < 1e-12 && std::abs(got.col - e.col) < 1e-12;
    matched += ok;
    o.require(ok, std::string("cell ") + std::string(to_string(e.r)) + "," + std::string(to_string(e.c)));
  }
  const auto eq = pure_nash(m);
  o.require(eq.pure_equilibria == std::vector<ActionProfile>{{Accept, Accept}}, "pure Nash == {(accept, accept)}");
  o.note(std::to_string(matched) + "/9 cells, " + std::to_string(eq.pure_equilibria.size()) + " pure equilibrium");
  return o;
}

Outcome ac3() {
  Outcome o;
  long checked = 0, boundary = 0, multiple = 0, mismatch = 0, not_equilibrium = 0;
  bool widen_ok = true, reject_ok = true;
  for (int iu = 0; iu <= 100; ++iu) {
    for (int im = 0; im <= 100; ++im) {
      const PolicyParams params(iu / 100.0, im / 100.0);
      const auto t = competition_thresholds(params);
      if (params.m() < params.u()) {
        widen_ok = widen_ok && t.accept_threshold.value() <= monopoly_accept_threshold(params) + 1e-15;
        reject_ok = reject_ok && t.reject_threshold.value() == recourse_band(params).lower.value();
      }
      for (int ip = 0; ip <= 1000; ++ip) {
        const double p = ip / 1000.0;
        const auto label = to_action(competitive_region(p, t));
        if (!label) {
          ++boundary;
          continue;
        }
        ++checked;
        const PayoffMatrix matrix = build_payoff_matrix(Probability(p), params);
        const auto eq = pure_nash(matrix);
        const bool is_symmetric_ne =
            std::find(eq.pure_equilibria.begin(), eq.pure_equilibria.end(), ActionProfile{*label, *label}) !=
            eq.pure_equilibria.end();
        not_equilibrium += !is_symmetric_ne;
        const auto best = payoff_dominant_symmetric_actions(matrix, eq);
        long symmetric = 0;
        for (const auto& prof : eq.pure_equilibria) symmetric += prof.row == prof.col;
        multiple += symmetric > 1;
        mismatch += std::find(best.begin(), best.end(), *label) == best.end();
      }
    }
  }
  o.require(mismatch == 0, std::to_string(mismatch) + " points where the region action is not the payoff-dominant "
                                                      "symmetric equilibrium");
  o.require(not_equilibrium == 0, std::to_string(not_equilibrium) + " points where the region action is not an equilibrium");
  o.require(widen_ok, "competitive accept threshold <= monopoly accept threshold");
  o.require(reject_ok, "reject thresholds equal");
  o.note(std::to_string(checked) + " points agree, " + std::to_string(boundary) + " boundary, " +
         std::to_string(multiple) + " with several symmetric equilibria");
  return o;
}

Outcome ac4() {
  Outcome o;
  const auto s = german::summarize(german::parse_german(raw_data()));
  o.require(s.unprofitable.count == 300 && s.profitable.count == 700, "counts 300/700");
  struct Cont {
    const char* name;
    double mean[2], sd[2];
  };
  const Cont cont[] = {{"age", {33.96, 36.22}, {11.22, 11.38}},
                       {"years_at_current_home", {2.85, 2.84}, {1.09, 1.11}},
                       {"loan_duration", {24.86, 19.21}, {13.28, 11.08}},
                       {"loan_amount", {3938.13, 2985.46}, {3535.82, 2401.47}}};
  const german::GroupSummary* groups[2] = {&s.unprofitable, &s.profitable};
  double worst = 0.0;
  for (const auto& c : cont) {
    for (int g = 0; g < 2; ++g) {
      const auto it = std::find_if(groups[g]->continuous.begin(), groups[g]->continuous.end(),
                                   [&](const auto& x) { return x.name == c.name; });
      if (it == groups[g]->continuous.end()) {
        o.require(false, std::string("missing ") + c.name);
        continue;
      }
      const double dm = std::abs(it->mean - c.mean[g]);
      const double ds = std::abs(it->sd - c.sd[g]);
      worst = std::max({worst, dm, ds});
      o.require(dm <= 0.01, std::string(c.name) + " mean " + io::format_number(it->mean, 6));
      o.require(ds <= 0.01, std::string(c.name) + " sd " + io::format_number(it->sd, 6));
    }
  }
  struct Flag {
    const char* name;
    double mean[2];
  };
  const Flag flags[] = {{"female", {0.36, 0.29}},
                        {"purpose_new_car", {0.30, 0.21}},
                        {"purpose_electronics", {0.21, 0.31}},
                        {"has_telephone", {0.38, 0.42}}};
  double worst_flag = 0.0;
  auto flag_of = [](const german::GroupSummary& g, const std::string& name) {
    for (const auto& f : g.flags) {
      if (f.name == name) return f.mean;
    }
    return std::nan("");
  };
  for (const auto& f : flags) {
    for (int g = 0; g < 2; ++g) {
      const double d = std::abs(flag_of(*groups[g], f.name) - f.mean[g]);
      worst_flag = std::max(worst_flag, d);
      o.require(d <= 0.02, std::string(f.name));
    }
  }
  o.note("max continuous deviation " + fmt("%.4f", worst) + ", max flag deviation " + fmt("%.4f", worst_flag));
  o.note("foreign_worker (A201) " +
         fmt2("%.3f / %.3f", flag_of(s.unprofitable, "foreign_worker"), flag_of(s.profitable, "foreign_worker")) +
         " vs reference 0.01 / 0.05, which is the A202 share " +
         fmt2("%.3f / %.3f", 1 - flag_of(s.unprofitable, "foreign_worker"), 1 - flag_of(s.profitable, "foreign_worker")) +
         " (reported, not matched)");
  return o;
}

Outcome ac5() {
  Outcome o;
  const auto& r = pipeline();
  o.require(r.train_size == 750 && r.test_size == 250, "split 750/250");
  o.require(r.model.info.converged && r.model.info.gradient_norm < RunConfig{}.train.tolerance, "logit converged");
  o.require(r.test_accuracy > 0.70, "accuracy > 0.70");
  const auto cal = logit::calibration_report(r.test_probabilities, r.test_labels, 10);
  o.require(cal.expected_calibration_error < 0.10, "10-bin ECE < 0.10");
  o.note("train/test " + std::to_string(r.train_size) + "/" + std::to_string(r.test_size) + ", " +
         std::to_string(r.model.info.iterations) + " Newton steps, gradient norm " +
         fmt("%.2e", r.model.info.gradient_norm) + ", accuracy " + fmt("%.3f", r.test_accuracy) + ", ECE " +
         fmt("%.4f", cal.expected_calibration_error));
  return o;
}

Outcome ac6() {
  Outcome o;
  std::mt19937_64 rng(20240501);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 2);
  int within = 0;
  constexpr int kCases = 100;
  for (int i = 0; i < kCases; ++i) {
    const double p = unit(rng), u = unit(rng), m = unit(rng);
    const Action a = kAllActions[static_cast<std::size_t>(pick(rng))];
    const PolicyParams params(u, m);
    const auto est = simulate_action_payoff(Probability(p), params, a, 1'000'000, 1000 + static_cast<std::uint64_t>(i));
    const double analytic = expected_payoffs(Probability(p), params).of(a);
    const double diff = std::abs(est.mean - analytic);
    // A zero-variance estimate (e.g. Reject) has to be exact.
    within += est.standard_error > 0.0 ? diff < 4.0 * est.standard_error : diff == 0.0;
  }
  o.require(within >= 99, "at least 99 of 100 within 4 SE");

  std::vector<Probability> grid;
  for (int i = 0; i <= 100; ++i) grid.emplace_back(i / 100.0);
  std::size_t unexplained = 0, ambiguous = 0, total = 0;
  for (const PolicyParams params : {PolicyParams(0.5, 0.2), PolicyParams(0.8, 0.1), PolicyParams(0.3, 0.6)}) {
    const auto v = verify_policy(grid, params, 1'000'000, 42);
    unexplained += v.unexplained_disagreements();
    total += v.checks.size();
    for (const auto& c : v.checks) ambiguous += c.ambiguous;
  }
  o.require(unexplained == 0, "verify_policy non-ambiguous disagreements == 0");
  o.note(std::to_string(within) + "/100 within 4 SE; policy check " + std::to_string(total) + " points, " +
         std::to_string(ambiguous) + " ambiguous, " + std::to_string(unexplained) + " unexplained disagreements");
  return o;
}

Outcome ac7() {
  Outcome o;
  const auto& probs = pipeline().test_probabilities;
  o.require(probs.size() == 250, "250 test probabilities");
  const Band band = Band::open(0.3, 0.6);
  std::vector<std::size_t> counts;
  for (double beta : {1.0, 2.0, 4.0}) {
    const auto s = logit::sharpen(probs, beta);
    counts.push_back(static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [&](double p) { return band.contains(p); })));
  }
  o.require(counts[0] >= counts[1] && counts[1] >= counts[2], "recourse counts non-increasing in beta");
  o.note("recourse counts for beta 1/2/4: " + std::to_string(counts[0]) + "/" + std::to_string(counts[1]) + "/" +
         std::to_string(counts[2]));
  return o;
}

// All orders of strict elimination on a 3x3 game, collecting end states.
void explore(const ReducedGame& game, std::set<std::pair<std::array<bool, 3>, std::array<bool, 3>>>& ends) {
  bool moved = false;
  for (Player pl : {Player::Row, Player::Column}) {
    for (Action victim : kAllActions) {
      if (!game.is_alive(pl, victim)) continue;
      for (Action winner : kAllActions) {
        if (winner != victim && game.is_alive(pl, winner) && strictly_dominates(game, pl, winner, victim)) {
          ReducedGame next = game;
          next.alive(pl)[static_cast<std::size_t>(index_of(victim))] = false;
          explore(next, ends);
          moved = true;
          break;
        }
      }
    }
  }
  if (!moved) ends.insert({game.row_alive, game.col_alive});
}

Outcome ac8() {
  Outcome o;
  bool band_iff = true;
  for (int iu = 0; iu <= 1000; ++iu) {
    for (int im = 0; im <= 1000; ++im) {
      const double u = iu / 1000.0, m = im / 1000.0;
      band_iff = band_iff && (!recourse_band({u, m}).empty == (m < u));
    }
  }
  o.require(band_iff, "band non-empty iff m < u");

  bool mono = true;
  constexpr int n = 200;
  for (int iu = 0; iu <= n; ++iu) {
    for (int im = 0; im < iu; ++im) {
      const double u = static_cast<double>(iu) / n, m = static_cast<double>(im) / n;
      const double here = band_magnitude({u, m});
      if (iu < n) mono = mono && here <= band_magnitude({static_cast<double>(iu + 1) / n, m}) + 1e-15;
      if (im > 0) mono = mono && here <= band_magnitude({u, static_cast<double>(im - 1) / n}) + 1e-15;
    }
  }
  o.require(mono, "band magnitude increasing in u and decreasing in m");

  bool sharpen_ok = true;
  std::vector<double> grid;
  for (int i = 0; i <= 10000; ++i) grid.push_back(i / 10000.0);
  for (double beta : {1.0, 1.5, 2.0, 4.0, 16.0}) {
    const auto s = logit::sharpen(grid, beta);
    sharpen_ok = sharpen_ok && std::is_sorted(s.begin(), s.end()) && logit::sharpen_one(0.5, beta) == 0.5;
  }
  o.require(sharpen_ok, "sharpen keeps order and fixes 0.5");

  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> small(-2, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int order_bad = 0;
  constexpr int kGames = 5000;
  for (int i = 0; i < kGames; ++i) {
    PayoffMatrix m;
    if (i % 2) {
      m = build_payoff_matrix(Probability(unit(rng)), {unit(rng), unit(rng)});
    } else {
      for (auto& row : m.cells) {
        for (auto& cell : row) cell = {static_cast<double>(small(rng)), static_cast<double>(small(rng))};
      }
    }
    std::set<std::pair<std::array<bool, 3>, std::array<bool, 3>>> ends;
    explore(ReducedGame{m}, ends);
    const auto res = iterated_elimination(m);
    order_bad += ends.size() != 1 || ends.begin()->first != res.reduced.row_alive ||
                 ends.begin()->second != res.reduced.col_alive;
  }
  o.require(order_bad == 0, "iterated elimination independent of order");

  // Byte determinism: every CSV from repeated runs is identical.
  std::size_t csv_files = 0;
  bool bytes_ok = true;
  auto compare = [&](const report::Outputs& a, const report::Outputs& b) {
    bytes_ok = bytes_ok && a.size() == b.size();
    for (std::size_t i = 0; bytes_ok && i < a.size(); ++i) {
      bytes_ok = a[i].name == b[i].name && a[i].content == b[i].content;
      csv_files += a[i].name.ends_with(".csv");
    }
  };
  const auto ax = report::axis(0.0, 1.0, 101);
  compare(report::cmd_sweep(report::SweepMode::BandMagnitude, ax, ax),
          report::cmd_sweep(report::SweepMode::BandMagnitude, ax, ax));
  compare(report::cmd_sweep(report::SweepMode::CompetitionThresholds, ax, ax),
          report::cmd_sweep(report::SweepMode::CompetitionThresholds, ax, ax));
  compare(pipeline().files, report::run_pipeline(raw_data(), RunConfig{}).files);
  const std::vector<Probability> ps{Probability(0.1), Probability(0.4), Probability(0.9)};
  compare(report::cmd_simulate(ps, {0.5, 0.2}, 10000, 42), report::cmd_simulate(ps, {0.5, 0.2}, 10000, 42));
  compare(report::cmd_game(Probability(0.6), {0.5, 0.2}), report::cmd_game(Probability(0.6), {0.5, 0.2}));
  o.require(bytes_ok, "CSV outputs byte-identical across runs");

  o.note("1001x1001 band grid, 201x201 monotonicity grid, " + std::to_string(kGames) +
         " games checked over all elimination orders, " + std::to_string(csv_files) + " CSV files compared");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* title;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"AC1", "recourse band thresholds", ac1},
      {"AC2", "payoff matrix and pure equilibrium at p=0.6", ac2},
      {"AC3", "competition regions match enumerated equilibria", ac3},
      {"AC4", "German Credit summary statistics", ac4},
      {"AC5", "pipeline split, convergence, accuracy, calibration", ac5},
      {"AC6", "Monte Carlo agreement", ac6},
      {"AC7", "sharpening reduces recourse counts", ac7},
      {"AC8", "property suites", ac8},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::printf("[%s] %s %s: %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
