#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "recourse/config.hpp"
#include "recourse/duopoly.hpp"
#include "recourse/error.hpp"
#include "recourse/german_credit.hpp"
#include "recourse/io.hpp"
#include "recourse/logit.hpp"
#include "recourse/model.hpp"
#include "recourse/simulate.hpp"
#include "recourse/svg.hpp"

// Report generation behind the CLI. Every command builds its files in memory
// (name + content) so output is testable without touching the filesystem;
// write_outputs() persists them.

namespace recourse::report {

enum class OutputFormat { Csv, Svg, Both };

inline OutputFormat parse_format(std::string_view s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "svg") return OutputFormat::Svg;
  if (s == "both") return OutputFormat::Both;
  throw ValidationError("unknown format '" + std::string(s) + "' (expected csv, svg or both)");
}

struct OutputFile {
  std::string name;
  std::string content;
};

using Outputs = std::vector<OutputFile>;

inline const OutputFile& find_output(const Outputs& outs, std::string_view name) {
  for (const auto& f : outs) {
    if (f.name == name) return f;
  }
  throw ValidationError("no output named '" + std::string(name) + "'");
}

/// Writes every output; `.csv` and `.svg` files are filtered by `format`,
/// everything else is always written.
inline std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& dir, const Outputs& outs,
                                                        OutputFormat format) {
  io::ensure_directory(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& f : outs) {
    const auto ext = std::filesystem::path(f.name).extension();
    if (ext == ".csv" && format == OutputFormat::Svg) continue;
    if (ext == ".svg" && format == OutputFormat::Csv) continue;
    io::write_file(dir / f.name, f.content);
    written.push_back(dir / f.name);
  }
  return written;
}

using io::format_number;

// ---------------------------------------------------------------------------
// Parameter sweeps

enum class SweepMode { BandMagnitude, AcceptToRecourse, CompetitionThresholds };

inline std::string_view to_string(SweepMode m) noexcept {
  switch (m) {
    case SweepMode::BandMagnitude:
      return "band_magnitude";
    case SweepMode::AcceptToRecourse:
      return "accept_to_recourse";
    case SweepMode::CompetitionThresholds:
      return "competition_thresholds";
  }
  return "?";
}

inline SweepMode parse_sweep_mode(std::string_view s) {
  for (SweepMode m : {SweepMode::BandMagnitude, SweepMode::AcceptToRecourse, SweepMode::CompetitionThresholds}) {
    if (to_string(m) == s) return m;
  }
  throw ValidationError("unknown sweep mode '" + std::string(s) + "'");
}

/// `steps` evenly spaced values from lo to hi inclusive.
inline std::vector<double> axis(double lo, double hi, std::size_t steps) {
  if (!(0.0 <= lo && lo <= hi && hi <= 1.0)) throw ValidationError("axis range must satisfy 0 <= lo <= hi <= 1");
  if (steps < 1) throw ValidationError("axis needs at least one step");
  if (steps == 1) {
    if (lo != hi) throw ValidationError("a single-step axis needs lo == hi");
    return {lo};
  }
  std::vector<double> v(steps);
  const double denom = static_cast<double>(steps - 1);
  for (std::size_t i = 0; i < steps; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / denom;
  v.back() = hi;
  return v;
}

struct SweepGrid {
  std::string name;
  std::vector<double> u_values;
  std::vector<double> m_values;
  std::vector<double> cells;  // u-major: cells[iu * m_values.size() + im]

  double at(std::size_t iu, std::size_t im) const { return cells[iu * m_values.size() + im]; }
};

inline void check_axis(const std::vector<double>& v, std::string_view name) {
  if (v.empty()) throw ValidationError(std::string(name) + " axis is empty");
  for (std::size_t i = 0; i < v.size(); ++i) {
    (void)Probability(v[i]);
    if (i && !(v[i - 1] < v[i])) throw ValidationError(std::string(name) + " axis must be strictly ascending");
  }
}

inline std::vector<SweepGrid> sweep(SweepMode mode, const std::vector<double>& u_values,
                                    const std::vector<double>& m_values) {
  check_axis(u_values, "u");
  check_axis(m_values, "m");
  std::vector<SweepGrid> grids;
  if (mode == SweepMode::CompetitionThresholds) {
    grids.push_back({"accept_threshold", u_values, m_values, {}});
    grids.push_back({"reject_threshold", u_values, m_values, {}});
  } else {
    grids.push_back({std::string(to_string(mode)), u_values, m_values, {}});
  }
  for (double u : u_values) {
    for (double m : m_values) {
      const PolicyParams params(u, m);
      switch (mode) {
        case SweepMode::BandMagnitude:
          grids[0].cells.push_back(band_magnitude(params));
          break;
        case SweepMode::AcceptToRecourse:
          grids[0].cells.push_back(accept_to_recourse_band(params).magnitude());
          break;
        case SweepMode::CompetitionThresholds: {
          const CompetitionThresholds t = competition_thresholds(params);
          grids[0].cells.push_back(t.accept_threshold.value());
          grids[1].cells.push_back(t.reject_threshold.value());
          break;
        }
      }
    }
  }
  return grids;
}

inline std::string sweep_csv(const std::vector<SweepGrid>& grids) {
  std::vector<std::string> header{"u", "m"};
  for (const auto& g : grids) header.push_back(g.name);
  io::CsvWriter csv(header);
  const auto& ref = grids.front();
  for (std::size_t iu = 0; iu < ref.u_values.size(); ++iu) {
    for (std::size_t im = 0; im < ref.m_values.size(); ++im) {
      std::vector<std::string> row{format_number(ref.u_values[iu]), format_number(ref.m_values[im])};
      for (const auto& g : grids) row.push_back(format_number(g.at(iu, im)));
      csv.row(row);
    }
  }
  return csv.str();
}

inline Outputs cmd_sweep(SweepMode mode, const std::vector<double>& u_values, const std::vector<double>& m_values) {
  const auto grids = sweep(mode, u_values, m_values);
  const std::string stem = "sweep_" + std::string(to_string(mode));
  Outputs outs{{stem + ".csv", sweep_csv(grids)}};
  for (const auto& g : grids) {
    const std::string name = grids.size() == 1 ? stem + ".svg" : stem + "_" + g.name + ".svg";
    outs.push_back({name, svg::heatmap(g.name, "m (ease of manipulation)", "u (continuation probability)",
                                       g.m_values, g.u_values, g.cells)});
  }
  return outs;
}

// ---------------------------------------------------------------------------
// Region classification and histograms

inline RegionLabel to_region(Action a) noexcept {
  switch (a) {
    case Action::Accept:
      return RegionLabel::Accept;
    case Action::Recourse:
      return RegionLabel::Recourse;
    case Action::Reject:
      return RegionLabel::Reject;
  }
  return RegionLabel::Boundary;
}

inline std::size_t region_index(RegionLabel r) noexcept { return static_cast<std::size_t>(r); }

struct Region {
  RegionLabel label;
  double lower;
  double upper;
};

struct RegionHistogram {
  std::vector<double> edges;
  std::vector<std::array<std::size_t, 4>> counts;  // per bin, indexed by RegionLabel

  std::size_t bin_total(std::size_t b) const noexcept {
    return counts[b][0] + counts[b][1] + counts[b][2] + counts[b][3];
  }
  std::size_t total(RegionLabel r) const noexcept {
    std::size_t n = 0;
    for (const auto& c : counts) n += c[region_index(r)];
    return n;
  }
  std::size_t total() const noexcept {
    std::size_t n = 0;
    for (std::size_t b = 0; b < counts.size(); ++b) n += bin_total(b);
    return n;
  }
};

inline std::vector<double> bin_edges(std::size_t bins) {
  if (bins < 1) throw ValidationError("histogram needs at least one bin");
  std::vector<double> e(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) e[i] = static_cast<double>(i) / static_cast<double>(bins);
  return e;
}

inline std::size_t bin_of(double p, std::size_t bins) noexcept {
  return std::min(static_cast<std::size_t>(p * static_cast<double>(bins)), bins - 1);
}

inline RegionHistogram build_region_histogram(std::span<const double> ps, std::span<const RegionLabel> labels,
                                              std::size_t bins) {
  if (ps.size() != labels.size()) throw ValidationError("histogram: probability/label length mismatch");
  RegionHistogram h;
  h.edges = bin_edges(bins);
  h.counts.assign(bins, {});
  for (std::size_t i = 0; i < ps.size(); ++i) ++h.counts[bin_of(ps[i], bins)][region_index(labels[i])];
  return h;
}

/// Monopoly regions: reject up to the band's lower end, recourse inside,
/// accept from the upper end (or from 1/2 when the band is empty).
inline std::vector<Region> monopoly_regions(const Band& band) {
  if (band.empty) return {{RegionLabel::Reject, 0.0, 0.5}, {RegionLabel::Accept, 0.5, 1.0}};
  return {{RegionLabel::Reject, 0.0, band.lower.value()},
          {RegionLabel::Recourse, band.lower.value(), band.upper.value()},
          {RegionLabel::Accept, band.upper.value(), 1.0}};
}

inline std::vector<Region> competition_regions(const CompetitionThresholds& t) {
  std::vector<Region> out{{RegionLabel::Reject, 0.0, t.reject_threshold.value()}};
  if (t.reject_threshold.value() < t.accept_threshold.value()) {
    out.push_back({RegionLabel::Recourse, t.reject_threshold.value(), t.accept_threshold.value()});
  }
  out.push_back({RegionLabel::Accept, t.accept_threshold.value(), 1.0});
  return out;
}

/// Fixed decision rule: recourse strictly inside the band, reject at or
/// below it, accept at or above it.
inline RegionLabel band_rule(double p, const Band& band) noexcept {
  if (band.contains(p)) return RegionLabel::Recourse;
  if (!band.empty) return p <= band.lower.value() ? RegionLabel::Reject : RegionLabel::Accept;
  return p >= 0.5 ? RegionLabel::Accept : RegionLabel::Reject;
}

struct ClassifyOptions {
  PolicyParams params{0.5, 0.2};
  std::size_t bins = 20;
  bool competition = false;
  std::optional<Band> fixed_band;  // overrides the (u, m) policy when set
};

struct ClassifyResult {
  std::vector<RegionLabel> labels;
  std::vector<RegionLabel> baseline;  // accept/reject only
  std::vector<Region> regions;
  RegionHistogram histogram;
  RegionHistogram baseline_histogram;
  std::size_t accept_to_recourse = 0;  // accepted by the baseline, recourse now
  std::vector<std::size_t> accept_to_recourse_per_bin;
};

inline ClassifyResult classify(std::span<const double> ps, const ClassifyOptions& opts) {
  if (opts.competition && opts.fixed_band) throw ValidationError("classify: a fixed band cannot be combined with competition");
  ClassifyResult r;
  r.labels.reserve(ps.size());
  const CompetitionThresholds thresholds = competition_thresholds(opts.params);
  for (double p : ps) {
    const Probability prob(p);
    RegionLabel label;
    if (opts.fixed_band) {
      label = band_rule(p, *opts.fixed_band);
    } else if (opts.competition) {
      label = competitive_region(p, thresholds);
    } else {
      label = to_region(optimal_action(prob, opts.params));
    }
    r.labels.push_back(label);
    const RegionLabel base = accept_payoff(p) >= 0.0 ? RegionLabel::Accept : RegionLabel::Reject;
    r.baseline.push_back(base);
    r.accept_to_recourse += base == RegionLabel::Accept && label == RegionLabel::Recourse;
  }
  if (opts.fixed_band) {
    r.regions = monopoly_regions(*opts.fixed_band);
  } else if (opts.competition) {
    r.regions = competition_regions(thresholds);
  } else {
    r.regions = monopoly_regions(recourse_band(opts.params));
  }
  r.histogram = build_region_histogram(ps, r.labels, opts.bins);
  r.baseline_histogram = build_region_histogram(ps, r.baseline, opts.bins);
  r.accept_to_recourse_per_bin.assign(opts.bins, 0);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (r.baseline[i] == RegionLabel::Accept && r.labels[i] == RegionLabel::Recourse) {
      ++r.accept_to_recourse_per_bin[bin_of(ps[i], opts.bins)];
    }
  }
  return r;
}

/// Probabilities from a CSV file: the `probability` column when the header
/// has one, otherwise the first column. A header-less file of bare numbers is
/// also accepted.
inline std::vector<double> read_probabilities(std::string_view text) {
  io::CsvTable t = io::parse_csv(text);
  if (t.header.empty()) return {};
  std::size_t col = 0;
  double probe = 0.0;
  if (io::try_parse_double(t.header.front(), probe)) {
    t.rows.insert(t.rows.begin(), t.header);
  } else {
    for (std::size_t i = 0; i < t.header.size(); ++i) {
      if (t.header[i] == "probability") col = i;
    }
  }
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto where = "row " + std::to_string(i + 1);
    if (col >= t.rows[i].size()) throw ValidationError(where + ": missing probability column");
    double v = 0.0;
    if (!io::try_parse_double(t.rows[i][col], v)) {
      throw ValidationError(where + ": malformed probability '" + t.rows[i][col] + "'");
    }
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw ValidationError(where + ": probability " + t.rows[i][col] + " outside [0, 1]");
    }
    out.push_back(v);
  }
  return out;
}

inline std::string histogram_csv(const RegionHistogram& h) {
  io::CsvWriter csv({"bin_lower", "bin_upper", "reject", "recourse", "accept", "boundary", "total"});
  for (std::size_t b = 0; b + 1 < h.edges.size(); ++b) {
    const auto& c = h.counts[b];
    csv.row({format_number(h.edges[b]), format_number(h.edges[b + 1]), std::to_string(c[0]), std::to_string(c[1]),
             std::to_string(c[2]), std::to_string(c[3]), std::to_string(h.bin_total(b))});
  }
  return csv.str();
}

inline std::string regions_csv(const std::vector<Region>& regions, const RegionHistogram& h) {
  io::CsvWriter csv({"region", "lower", "upper", "count"});
  for (const auto& r : regions) {
    csv.row({std::string(to_string(r.label)), format_number(r.lower), format_number(r.upper),
             std::to_string(h.total(r.label))});
  }
  if (h.total(RegionLabel::Boundary) > 0) {
    csv.row({"boundary", "", "", std::to_string(h.total(RegionLabel::Boundary))});
  }
  return csv.str();
}

inline std::vector<svg::Series> region_series(const RegionHistogram& h) {
  std::vector<svg::Series> s{{"reject", std::string(svg::kRed), {}},
                             {"recourse", std::string(svg::kOrange), {}},
                             {"accept", std::string(svg::kGreen), {}}};
  const bool any_boundary = h.total(RegionLabel::Boundary) > 0;
  if (any_boundary) s.push_back({"boundary", std::string(svg::kGrey), {}});
  for (const auto& c : h.counts) {
    for (std::size_t k = 0; k < s.size(); ++k) s[k].counts.push_back(c[k]);
  }
  return s;
}

inline std::vector<svg::Marker> region_markers(const std::vector<Region>& regions) {
  std::vector<svg::Marker> out;
  for (std::size_t i = 1; i < regions.size(); ++i) {
    out.push_back({regions[i].lower, std::string(to_string(regions[i - 1].label)) + "|" +
                                         std::string(to_string(regions[i].label))});
  }
  return out;
}

inline std::string comparison_csv(const ClassifyResult& r) {
  io::CsvWriter csv({"bin_lower", "bin_upper", "baseline_reject", "baseline_accept", "reject", "recourse", "accept",
                     "boundary", "accept_to_recourse"});
  const auto& h = r.histogram;
  const auto& base = r.baseline_histogram;
  for (std::size_t b = 0; b + 1 < h.edges.size(); ++b) {
    csv.row({format_number(h.edges[b]), format_number(h.edges[b + 1]),
             std::to_string(base.counts[b][region_index(RegionLabel::Reject)]),
             std::to_string(base.counts[b][region_index(RegionLabel::Accept)]), std::to_string(h.counts[b][0]),
             std::to_string(h.counts[b][1]), std::to_string(h.counts[b][2]), std::to_string(h.counts[b][3]),
             std::to_string(r.accept_to_recourse_per_bin[b])});
  }
  return csv.str();
}

/// Histogram CSV, region table, before/after comparison and two SVGs: the
/// three-region histogram and the accept-only vs with-recourse comparison,
/// where applicants moved from accept to recourse are drawn in yellow.
inline Outputs classify_outputs(const ClassifyResult& r, std::string_view stem = "classify") {
  const std::string s(stem);
  Outputs outs;
  outs.push_back({s + "_histogram.csv", histogram_csv(r.histogram)});
  outs.push_back({s + "_regions.csv", regions_csv(r.regions, r.histogram)});
  outs.push_back({s + "_comparison.csv", comparison_csv(r)});

  const svg::HistogramPanel regions{"Actions by predicted probability", r.histogram.edges,
                                    region_series(r.histogram), region_markers(r.regions)};
  outs.push_back({s + "_regions.svg", svg::histograms({regions}, "predicted probability of being profitable")});

  svg::HistogramPanel before{"Without recourse", r.baseline_histogram.edges,
                             {{"reject", std::string(svg::kRed), {}}, {"accept", std::string(svg::kGreen), {}}},
                             {{0.5, "reject|accept"}}};
  for (const auto& c : r.baseline_histogram.counts) {
    before.series[0].counts.push_back(c[region_index(RegionLabel::Reject)]);
    before.series[1].counts.push_back(c[region_index(RegionLabel::Accept)]);
  }
  svg::HistogramPanel after{"With recourse", r.histogram.edges,
                            {{"reject", std::string(svg::kRed), {}},
                             {"recourse", std::string(svg::kOrange), {}},
                             {"accept to recourse", std::string(svg::kYellow), {}},
                             {"accept", std::string(svg::kGreen), {}}},
                            region_markers(r.regions)};
  for (std::size_t b = 0; b < r.histogram.counts.size(); ++b) {
    const auto& c = r.histogram.counts[b];
    const std::size_t moved = r.accept_to_recourse_per_bin[b];
    after.series[0].counts.push_back(c[region_index(RegionLabel::Reject)]);
    after.series[1].counts.push_back(c[region_index(RegionLabel::Recourse)] - moved);
    after.series[2].counts.push_back(moved);
    after.series[3].counts.push_back(c[region_index(RegionLabel::Accept)] + c[region_index(RegionLabel::Boundary)]);
  }
  outs.push_back({s + "_comparison.svg", svg::histograms({before, after}, "predicted probability of being profitable")});
  return outs;
}

// ---------------------------------------------------------------------------
// Two decision-maker game report

inline std::string game_text(Probability p, const PolicyParams& params) {
  const PayoffMatrix matrix = build_payoff_matrix(p, params);
  const EquilibriumResult eq = pure_nash(matrix);
  const CompetitionThresholds t = competition_thresholds(params);
  std::string out;
  out += "Two decision-maker game\n";
  out += "p = " + format_number(p) + ", u = " + format_number(params.u()) + ", m = " + format_number(params.m()) + "\n\n";
  out += "Payoffs (row, column):\n";
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(s.size(), w), ' ');
    return s;
  };
  out += pad("", 10);
  for (Action c : kAllActions) out += pad(std::string(to_string(c)), 26);
  out += "\n";
  for (Action r : kAllActions) {
    out += pad(std::string(to_string(r)), 10);
    for (Action c : kAllActions) {
      const PayoffCell& cell = matrix.at(r, c);
      out += pad(format_number(cell.row) + ", " + format_number(cell.col), 26);
    }
    out += "\n";
  }
  out += "\nIterated elimination of strictly dominated actions:\n";
  if (eq.elimination_trace.empty()) out += "  (no strictly dominated action)\n";
  for (std::size_t i = 0; i < eq.elimination_trace.size(); ++i) {
    const auto& step = eq.elimination_trace[i];
    out += "  " + std::to_string(i + 1) + ". " + std::string(to_string(step.player)) + " drops " +
           std::string(to_string(step.eliminated)) + " (dominated by " + std::string(to_string(step.dominating)) + ")\n";
  }
  out += "\nPure Nash equilibria:\n";
  for (const auto& prof : eq.pure_equilibria) {
    out += "  (" + std::string(to_string(prof.row)) + ", " + std::string(to_string(prof.col)) + ")\n";
  }
  if (eq.pure_equilibria.empty()) out += "  (none)\n";
  out += std::string("Indifference: ") + (eq.indifference_flag ? "yes" : "no") + "\n";
  out += "\nCompetition thresholds: reject below " + format_number(t.reject_threshold) + ", accept above " +
         format_number(t.accept_threshold) + "\n";
  out += "Closed-form region: " + std::string(to_string(competitive_region(p, t))) + "\n";
  out += "Single decision-maker action: " + std::string(to_string(optimal_action(p, params))) + "\n";
  return out;
}

inline std::string game_csv(Probability p, const PolicyParams& params) {
  const PayoffMatrix matrix = build_payoff_matrix(p, params);
  const EquilibriumResult eq = pure_nash(matrix);
  io::CsvWriter csv({"row_action", "col_action", "row_payoff", "col_payoff", "pure_nash"});
  for (Action r : kAllActions) {
    for (Action c : kAllActions) {
      const bool nash = std::find(eq.pure_equilibria.begin(), eq.pure_equilibria.end(), ActionProfile{r, c}) !=
                        eq.pure_equilibria.end();
      csv.row({std::string(to_string(r)), std::string(to_string(c)), format_number(matrix.at(r, c).row),
               format_number(matrix.at(r, c).col), nash ? "1" : "0"});
    }
  }
  return csv.str();
}

inline Outputs cmd_game(Probability p, const PolicyParams& params) {
  return {{"game.txt", game_text(p, params)}, {"game.csv", game_csv(p, params)}};
}

// ---------------------------------------------------------------------------
// Monte Carlo check

inline Outputs cmd_simulate(std::span<const Probability> ps, const PolicyParams& params, std::uint64_t draws,
                            std::uint64_t seed) {
  const PolicyVerification ver = verify_policy(ps, params, draws, seed);
  io::CsvWriter est({"p", "action", "analytic", "mean", "standard_error", "draws", "seed", "within_4se"});
  io::CsvWriter pol({"p", "analytic_action", "simulated_action", "agrees", "ambiguous"});
  for (const auto& c : ver.checks) {
    const ExpectedPayoffs analytic = expected_payoffs(Probability(c.p), params);
    for (Action a : kAllActions) {
      const SimEstimate& e = c.estimates[static_cast<std::size_t>(index_of(a))];
      const bool within = std::abs(e.mean - analytic.of(a)) <= kSigmaBound * e.standard_error;
      est.row({format_number(c.p), std::string(to_string(a)), format_number(analytic.of(a)), format_number(e.mean),
               format_number(e.standard_error), std::to_string(e.draws), std::to_string(e.seed), within ? "1" : "0"});
    }
    pol.row({format_number(c.p), std::string(to_string(c.analytic)), std::string(to_string(c.simulated)),
             c.agrees() ? "1" : "0", c.ambiguous ? "1" : "0"});
  }
  return {{"simulate.csv", est.str()}, {"verify.csv", pol.str()}};
}

// ---------------------------------------------------------------------------
// Dataset outputs

inline std::string summary_csv(const german::SummaryStats& s) {
  io::CsvWriter csv({"feature", "statistic", "unprofitable", "profitable"});
  csv.row({"observations", "count", std::to_string(s.unprofitable.count), std::to_string(s.profitable.count)});
  for (std::size_t i = 0; i < s.unprofitable.continuous.size(); ++i) {
    const auto& a = s.unprofitable.continuous[i];
    const auto& b = s.profitable.continuous[i];
    csv.row({a.name, "mean", format_number(a.mean), format_number(b.mean)});
    csv.row({a.name, "sd", format_number(a.sd), format_number(b.sd)});
  }
  for (std::size_t i = 0; i < s.unprofitable.flags.size(); ++i) {
    const auto& a = s.unprofitable.flags[i];
    const auto& b = s.profitable.flags[i];
    csv.row({a.name, "mean", format_number(a.mean), format_number(b.mean)});
  }
  return csv.str();
}

inline std::string encoded_csv(const std::vector<std::string>& names, std::span<const german::EncodedRecord> train,
                               std::span<const german::EncodedRecord> test) {
  std::vector<std::string> header{"split", "label"};
  header.insert(header.end(), names.begin(), names.end());
  io::CsvWriter csv(header);
  auto emit = [&csv](std::string_view split, std::span<const german::EncodedRecord> rows) {
    for (const auto& r : rows) {
      std::vector<std::string> row{std::string(split), std::to_string(r.label)};
      for (double x : r.features) row.push_back(format_number(x));
      csv.row(row);
    }
  };
  emit("train", train);
  emit("test", test);
  return csv.str();
}

/// Runs `f`, prefixing any library error with the stage name while keeping
/// its kind (and therefore its exit code).
template <typename F>
auto run_stage(std::string_view stage, F&& f) -> decltype(f()) {
  const std::string prefix = std::string(stage) + ": ";
  try {
    return f();
  } catch (const NonConvergenceError& e) {
    throw NonConvergenceError(prefix + e.what());
  } catch (const IoError& e) {
    throw IoError(prefix + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(prefix + e.what());
  }
}

struct EncodedSplit {
  german::EncodingSpec spec;
  std::vector<german::RawRecord> train_raw;
  std::vector<german::RawRecord> test_raw;
  std::vector<german::EncodedRecord> train;
  std::vector<german::EncodedRecord> test;
};

/// Split raw records, fit the encoding on the training part, encode both.
inline EncodedSplit split_and_encode(std::span<const german::RawRecord> raw, const logit::TrainConfig& cfg) {
  EncodedSplit out;
  std::tie(out.train_raw, out.test_raw) = logit::split(raw, cfg);
  out.spec = german::fit_encoding(out.train_raw);
  out.train = german::encode(out.train_raw, out.spec);
  out.test = german::encode(out.test_raw, out.spec);
  return out;
}

inline Outputs cmd_ingest(std::string_view raw_text, const RunConfig& cfg) {
  const auto raw = run_stage("ingest", [&] { return german::parse_german(raw_text); });
  const auto enc = run_stage("encode", [&] { return split_and_encode(raw, cfg.train); });
  return {{"encoded.csv", encoded_csv(enc.spec.column_names(), enc.train, enc.test)}};
}

inline Outputs cmd_summarize(std::string_view raw_text) {
  const auto raw = run_stage("ingest", [&] { return german::parse_german(raw_text); });
  return {{"summary_stats.csv", run_stage("summarize", [&] { return summary_csv(german::summarize(raw)); })}};
}

// ---------------------------------------------------------------------------
// End-to-end pipeline

struct SharpeningStep {
  double beta;
  std::array<std::size_t, 3> counts;  // reject, recourse, accept under the fixed rule
};

struct PipelineResult {
  german::SummaryStats summary;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  logit::LogitModel model;
  std::vector<double> test_probabilities;
  std::vector<int> test_labels;
  double test_accuracy = 0.0;
  double majority_rate = 0.0;  // share of the larger class in the test set
  logit::CalibrationReport calibration;
  Band decision_band;
  std::vector<SharpeningStep> sharpening;
  ClassifyResult regions;
  Outputs files;
};

inline std::string calibration_csv(const logit::CalibrationReport& rep) {
  io::CsvWriter csv({"bin_lower", "bin_upper", "mean_predicted", "positive_rate", "count"});
  for (const auto& b : rep.bins) {
    csv.row({format_number(b.lower), format_number(b.upper), format_number(b.mean_predicted),
             format_number(b.positive_rate), std::to_string(b.count)});
  }
  return csv.str();
}

inline std::string pipeline_report_text(const PipelineResult& r, const RunConfig& cfg) {
  std::string out = "Pipeline report\n\n";
  out += "records: " + std::to_string(r.summary.total()) + " (unprofitable " +
         std::to_string(r.summary.unprofitable.count) + ", profitable " + std::to_string(r.summary.profitable.count) + ")\n";
  out += "split: train " + std::to_string(r.train_size) + ", test " + std::to_string(r.test_size) +
         " (seed " + std::to_string(cfg.train.seed) + ", fraction " + format_number(cfg.train.train_fraction) + ")\n";
  out += "logit: iterations " + std::to_string(r.model.info.iterations) + ", gradient norm " +
         format_number(r.model.info.gradient_norm) + ", converged " + (r.model.info.converged ? "yes" : "no") + "\n";
  out += "test accuracy: " + format_number(r.test_accuracy) + " (majority share " + format_number(r.majority_rate) + ")\n";
  out += "expected calibration error (" + std::to_string(cfg.calibration_bins) +
         " bins): " + format_number(r.calibration.expected_calibration_error) + "\n";
  out += "decision band: ";
  out += r.decision_band.empty ? std::string("empty")
                               : "(" + format_number(r.decision_band.lower) + ", " + format_number(r.decision_band.upper) + ")";
  out += "\nsharpening (logit temperature beta, fixed decision band):\n";
  for (const auto& s : r.sharpening) {
    out += "  beta " + format_number(s.beta) + ": reject " + std::to_string(s.counts[0]) + ", recourse " +
           std::to_string(s.counts[1]) + ", accept " + std::to_string(s.counts[2]) + "\n";
  }
  const auto flag = [](const german::GroupSummary& g, std::string_view name) {
    for (const auto& f : g.flags) {
      if (f.name == name) return f.mean;
    }
    return 0.0;
  };
  const double fu = flag(r.summary.unprofitable, "foreign_worker");
  const double fp = flag(r.summary.profitable, "foreign_worker");
  out += "\nnote: foreign_worker is 1 for code A201 (\"yes\"), giving means " + format_number(fu, 4) + " / " +
         format_number(fp, 4) + " (unprofitable / profitable). Reference summaries showing 0.01 / 0.05 match the\n"
         "complementary share (code A202): " + format_number(1.0 - fu, 4) + " / " + format_number(1.0 - fp, 4) + ".\n";
  return out;
}

/// Throws NonConvergenceError unless the fitted model reached its tolerance.
inline void require_converged(const PipelineResult& r, const RunConfig& cfg) {
  if (!r.model.info.converged) {
    throw NonConvergenceError("train: logit did not converge within " + std::to_string(cfg.train.max_iterations) +
                              " iterations (gradient norm " + format_number(r.model.info.gradient_norm) + ")");
  }
}

/// ingest -> summarize -> split -> train -> predict -> classify -> sharpen.
/// A non-converged fit still produces every output; callers decide via
/// require_converged().
inline PipelineResult run_pipeline(std::string_view raw_text, const RunConfig& cfg) {
  cfg.validate();
  PipelineResult r;
  const auto raw = run_stage("ingest", [&] { return german::parse_german(raw_text); });
  r.summary = run_stage("summarize", [&] { return german::summarize(raw); });
  const EncodedSplit enc = run_stage("split", [&] { return split_and_encode(raw, cfg.train); });
  r.train_size = enc.train.size();
  r.test_size = enc.test.size();
  r.model = run_stage("train", [&] { return logit::train_logit(enc.train, cfg.train, enc.spec.column_names()); });
  run_stage("predict", [&] {
    for (const auto& rec : enc.test) {
      r.test_probabilities.push_back(logit::predict_proba(r.model, rec).value());
      r.test_labels.push_back(rec.label);
    }
    r.test_accuracy = logit::accuracy(r.model, enc.test);
    std::size_t pos = 0;
    for (int y : r.test_labels) pos += y > 0;
    const double share = static_cast<double>(pos) / static_cast<double>(std::max<std::size_t>(r.test_labels.size(), 1));
    r.majority_rate = std::max(share, 1.0 - share);
    r.calibration = logit::calibration_report(r.test_probabilities, r.test_labels, cfg.calibration_bins);
    return 0;
  });

  run_stage("classify", [&] {
    ClassifyOptions opts;
    opts.params = cfg.params();
    opts.bins = cfg.bins;
    r.regions = classify(r.test_probabilities, opts);
    r.decision_band = cfg.decision_band();
    for (double beta : cfg.sharpen_betas) {
      const auto sharpened = logit::sharpen(r.test_probabilities, beta);
      SharpeningStep step{beta, {}};
      for (double p : sharpened) {
        const RegionLabel l = band_rule(p, r.decision_band);
        ++step.counts[l == RegionLabel::Reject ? 0 : l == RegionLabel::Recourse ? 1 : 2];
      }
      r.sharpening.push_back(step);
    }
    return 0;
  });

  Outputs& files = r.files;
  files.push_back({"summary_stats.csv", summary_csv(r.summary)});
  files.push_back({"model.txt", logit::save_model(r.model)});
  {
    io::CsvWriter csv({"index", "probability", "label"});
    for (std::size_t i = 0; i < r.test_probabilities.size(); ++i) {
      csv.row({std::to_string(i), format_number(r.test_probabilities[i]), std::to_string(r.test_labels[i])});
    }
    files.push_back({"test_probabilities.csv", csv.str()});
  }
  files.push_back({"calibration.csv", calibration_csv(r.calibration)});
  {
    std::vector<RegionLabel> none(r.test_probabilities.size(), RegionLabel::Accept);
    const RegionHistogram h = build_region_histogram(r.test_probabilities, none, cfg.bins);
    io::CsvWriter csv({"bin_lower", "bin_upper", "count"});
    svg::Series series{"applicants", std::string(svg::kBlue), {}};
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      csv.row({format_number(h.edges[b]), format_number(h.edges[b + 1]), std::to_string(h.bin_total(b))});
      series.counts.push_back(h.bin_total(b));
    }
    files.push_back({"histogram.csv", csv.str()});
    files.push_back({"histogram.svg", svg::histograms({{"Predicted probabilities (test set)", h.edges, {series}, {}}},
                                                      "predicted probability of being profitable")});
  }
  for (auto& f : classify_outputs(r.regions, "actions")) files.push_back(std::move(f));
  {
    io::CsvWriter csv({"transform", "beta", "band_lower", "band_upper", "reject", "recourse", "accept"});
    std::vector<svg::HistogramPanel> panels;
    for (const auto& s : r.sharpening) {
      csv.row({"logit_temperature", format_number(s.beta),
               r.decision_band.empty ? "" : format_number(r.decision_band.lower),
               r.decision_band.empty ? "" : format_number(r.decision_band.upper), std::to_string(s.counts[0]),
               std::to_string(s.counts[1]), std::to_string(s.counts[2])});
      const auto sharpened = logit::sharpen(r.test_probabilities, s.beta);
      std::vector<RegionLabel> labels;
      for (double p : sharpened) labels.push_back(band_rule(p, r.decision_band));
      const RegionHistogram h = build_region_histogram(sharpened, labels, cfg.bins);
      panels.push_back({"beta = " + format_number(s.beta) + ": recourse for " + std::to_string(s.counts[1]) +
                            " applicants",
                        h.edges, region_series(h), region_markers(monopoly_regions(r.decision_band))});
    }
    files.push_back({"sharpening.csv", csv.str()});
    files.push_back({"sharpening.svg", svg::histograms(panels, "sharpened probability (logit temperature)")});
  }
  files.push_back({"pipeline_report.txt", pipeline_report_text(r, cfg)});

  return r;
}

}  // namespace recourse::report
