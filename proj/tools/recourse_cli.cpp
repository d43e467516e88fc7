// Command-line front end: dataset ingest/summary, the end-to-end pipeline,
// parameter sweeps, population classification, the two decision-maker game
// and the Monte Carlo check.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error, 3 non-convergence.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "recourse/config.hpp"
#include "recourse/error.hpp"
#include "recourse/io.hpp"
#include "recourse/report.hpp"

namespace {

using namespace recourse;
namespace fs = std::filesystem;

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::string format = "both";
};

RunConfig load_config(const GlobalOptions& g) {
  RunConfig cfg;
  if (!g.config_path.empty()) cfg = parse_config(io::read_file(g.config_path));
  if (g.seed) cfg.train.seed = *g.seed;
  cfg.validate();
  return cfg;
}

void emit(const GlobalOptions& g, const report::Outputs& outs) {
  for (const auto& path : report::write_outputs(g.out_dir, outs, report::parse_format(g.format))) {
    std::cout << "wrote " << path.string() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision-maker incentives to offer algorithmic recourse"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "key=value configuration file");
  app.add_option("--seed", g.seed, "override the configured RNG seed");
  app.add_option("--out-dir", g.out_dir, "output directory")->capture_default_str();
  app.add_option("--format", g.format, "which figure/data files to write")
      ->check(CLI::IsMember({"csv", "svg", "both"}))
      ->capture_default_str();

  std::string data_path = "data/german.data";

  auto* ingest = app.add_subcommand("ingest", "parse and encode the German Credit file");
  ingest->add_option("--data", data_path, "raw german.data file")->capture_default_str();

  auto* summarize = app.add_subcommand("summarize", "group-wise summary statistics");
  summarize->add_option("--data", data_path, "raw german.data file")->capture_default_str();

  auto* pipeline = app.add_subcommand("pipeline", "ingest, train, predict, classify and sharpen");
  pipeline->add_option("--data", data_path, "raw german.data file")->capture_default_str();

  std::optional<double> u_opt;
  std::optional<double> m_opt;
  auto add_params = [&](CLI::App* sub) {
    sub->add_option("--u", u_opt, "continuation probability (default from config)");
    sub->add_option("--m", m_opt, "ease of manipulation (default from config)");
  };

  std::string sweep_mode = "band_magnitude";
  double u_min = 0.0, u_max = 1.0, m_min = 0.0, m_max = 1.0;
  std::optional<std::size_t> u_steps, m_steps;
  auto* sweep = app.add_subcommand("sweep", "evaluate a quantity over a (u, m) grid");
  sweep->add_option("--mode", sweep_mode)
      ->check(CLI::IsMember({"band_magnitude", "accept_to_recourse", "competition_thresholds"}))
      ->capture_default_str();
  sweep->add_option("--u-min", u_min)->capture_default_str();
  sweep->add_option("--u-max", u_max)->capture_default_str();
  sweep->add_option("--u-steps", u_steps, "default: grid_steps from config");
  sweep->add_option("--m-min", m_min)->capture_default_str();
  sweep->add_option("--m-max", m_max)->capture_default_str();
  sweep->add_option("--m-steps", m_steps, "default: grid_steps from config");

  std::string prob_path;
  std::optional<std::size_t> bins;
  bool competition = false;
  std::string band_text;
  auto* classify = app.add_subcommand("classify", "assign actions to a file of probabilities");
  classify->add_option("--probabilities", prob_path, "CSV with a 'probability' column")->required();
  add_params(classify);
  classify->add_option("--bins", bins, "histogram bins (default from config)");
  classify->add_flag("--competition", competition, "use the two decision-maker equilibrium regions");
  classify->add_option("--band", band_text, "fixed recourse band 'lower,upper' instead of the (u, m) policy");

  double p_value = 0.6;
  auto* game = app.add_subcommand("game", "payoff matrix and equilibria of the two decision-maker game");
  game->add_option("--p", p_value, "probability the applicant is profitable")->capture_default_str();
  add_params(game);

  std::string p_list = "0.1,0.4,0.9";
  std::optional<std::uint64_t> draws;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo check of the payoff formulas and policy");
  simulate->add_option("--p", p_list, "comma-separated probabilities")->capture_default_str();
  add_params(simulate);
  simulate->add_option("--draws", draws, "draws per action (default from config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg = load_config(g);
    if (u_opt) cfg.u = *u_opt;
    if (m_opt) cfg.m = *m_opt;
    if (bins) cfg.bins = *bins;
    if (draws) cfg.draws = *draws;
    cfg.validate();

    if (*ingest) {
      emit(g, report::cmd_ingest(io::read_file(data_path), cfg));
    } else if (*summarize) {
      emit(g, report::cmd_summarize(io::read_file(data_path)));
    } else if (*pipeline) {
      const std::string raw = io::read_file(data_path);
      const auto result = report::run_pipeline(raw, cfg);
      emit(g, result.files);
      std::cout << report::pipeline_report_text(result, cfg);
      report::require_converged(result, cfg);
    } else if (*sweep) {
      const auto mode = report::parse_sweep_mode(sweep_mode);
      emit(g, report::cmd_sweep(mode, report::axis(u_min, u_max, u_steps.value_or(cfg.grid_steps)),
                                report::axis(m_min, m_max, m_steps.value_or(cfg.grid_steps))));
    } else if (*classify) {
      report::ClassifyOptions opts;
      opts.params = cfg.params();
      opts.bins = cfg.bins;
      opts.competition = competition;
      if (!band_text.empty()) {
        const auto v = io::parse_double_list(band_text, "--band");
        if (v.size() != 2 || !(v[0] < v[1])) throw ValidationError("--band needs 'lower,upper' with lower < upper");
        opts.fixed_band = Band::open(v[0], v[1]);
      }
      const auto ps = report::read_probabilities(io::read_file(prob_path));
      const auto result = report::classify(ps, opts);
      emit(g, report::classify_outputs(result));
      std::cout << "reject " << result.histogram.total(RegionLabel::Reject) << ", recourse "
                << result.histogram.total(RegionLabel::Recourse) << ", accept "
                << result.histogram.total(RegionLabel::Accept) << ", boundary "
                << result.histogram.total(RegionLabel::Boundary) << ", accept->recourse " << result.accept_to_recourse
                << "\n";
    } else if (*game) {
      const auto outs = report::cmd_game(Probability(p_value), cfg.params());
      emit(g, outs);
      std::cout << report::find_output(outs, "game.txt").content;
    } else if (*simulate) {
      std::vector<Probability> ps;
      for (double p : io::parse_double_list(p_list, "--p")) ps.emplace_back(p);
      emit(g, report::cmd_simulate(ps, cfg.params(), cfg.draws, cfg.train.seed));
    }
  } catch (const recourse::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
