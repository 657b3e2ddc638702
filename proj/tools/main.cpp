// Command-line front end: experiment drivers plus single-shot fit, rademacher
// and adversarial utilities. Every run writes its CSV/JSON outputs and a
// manifest.json with the fully resolved configuration into --out.

#include "wtn/adversarial.hpp"
#include "wtn/bench.hpp"
#include "wtn/complexity.hpp"
#include "wtn/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using wtn::io::Json;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::string config;
};

Json load_config(const Globals& g) { return g.config.empty() ? Json::object() : wtn::io::read_json_file(g.config); }

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  wtn::require(out.good(), "cannot write " + path.string());
  return out;
}

void write_manifest(const Globals& g, const std::string& command, const Json& config, const std::vector<std::string>& outputs,
                    const Json& results = Json::object()) {
  Json doc{{"command", command}, {"config", config}, {"outputs", outputs}};
  if (g.seed) doc["seed"] = *g.seed;
  if (!results.empty()) doc["results"] = results;
  wtn::io::write_json_file(fs::path(g.out) / "manifest.json", doc);
}

template <typename Config>
void write_reports(const Globals& g, const std::string& command, const Config& cfg,
                   const std::vector<wtn::ExperimentReport>& reports, const std::string& file) {
  auto out = open_output(fs::path(g.out) / file);
  wtn::write_reports_csv(out, reports);
  write_manifest(g, command, cfg.to_json(), {file});
  wtn::write_reports_csv(std::cout, reports);
}

wtn::LossSpec loss_from_name(const std::string& name) {
  switch (wtn::loss_kind_from_string(name)) {
    case wtn::LossKind::Squared: return wtn::LossSpec::squared();
    case wtn::LossKind::Absolute: return wtn::LossSpec::absolute();
    case wtn::LossKind::ClippedAbsolute: return wtn::LossSpec::clipped_absolute();
  }
  return wtn::LossSpec::squared();
}

std::vector<wtn::Weighting> parse_weightings(const std::vector<std::string>& names) {
  std::vector<wtn::Weighting> out;
  for (const auto& n : names) out.push_back(wtn::weighting_from_string(n));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted trace-norm matrix completion experiments"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Base seed")->check(CLI::NonNegativeNumber);
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--config", g.config, "JSON file overriding the experiment configuration")->check(CLI::ExistingFile);
  app.fallthrough();

  // simulate samplecomplexity / excesserror
  auto* simulate = app.add_subcommand("simulate", "Uniform-sampling simulations with a rank-2 signal");
  simulate->require_subcommand(1);
  auto* sc = simulate->add_subcommand("samplecomplexity", "Samples needed to reach a target reconstruction error");
  std::vector<wtn::Index> sc_ns;
  std::optional<int> sc_seeds;
  std::optional<double> sc_target;
  std::vector<std::string> sc_weightings;
  sc->add_option("--n", sc_ns, "Matrix sizes");
  sc->add_option("--seeds", sc_seeds, "Repetitions per probe");
  sc->add_option("--target", sc_target, "Target mean squared error");
  sc->add_option("--weightings", sc_weightings, "uniform and/or smoothed_empirical");

  auto* ee = simulate->add_subcommand("excesserror", "Reconstruction error over sample sizes and noise levels");
  std::optional<wtn::Index> ee_n;
  std::optional<int> ee_seeds;
  std::vector<double> ee_nu;
  std::vector<std::size_t> ee_s;
  std::vector<std::string> ee_weightings;
  ee->add_option("--n", ee_n, "Matrix size");
  ee->add_option("--seeds", ee_seeds, "Repetitions per grid point");
  ee->add_option("--nu", ee_nu, "Noise levels");
  ee->add_option("--s", ee_s, "Sample sizes");
  ee->add_option("--weightings", ee_weightings, "uniform and/or smoothed_empirical");

  // sweep smoothing
  auto* sweep = app.add_subcommand("sweep", "Parameter sweeps");
  sweep->require_subcommand(1);
  auto* sm = sweep->add_subcommand("smoothing", "Test RMSE of rank-k SGD fits across smoothing levels");
  std::optional<std::string> sm_family;
  std::optional<int> sm_seeds;
  std::vector<double> sm_alpha;
  std::vector<wtn::Index> sm_k;
  sm->add_option("--family", sm_family, "block_nonproduct or uniform");
  sm->add_option("--seeds", sm_seeds, "Repetitions");
  sm->add_option("--alpha", sm_alpha, "Smoothing levels");
  sm->add_option("--k", sm_k, "Rank caps");

  // transductive
  auto* td = app.add_subcommand("transductive", "ERM on a random half of a fixed pool, evaluated on the other half");
  std::optional<wtn::Index> td_n;
  std::optional<std::size_t> td_half;
  std::optional<int> td_splits;
  std::optional<std::string> td_loss;
  bool td_swap = false;
  td->add_option("--n", td_n, "Matrix size");
  td->add_option("--half", td_half, "Train (and test) size; the pool holds twice this");
  td->add_option("--splits", td_splits, "Random splits");
  td->add_option("--loss", td_loss, "squared, absolute or clipped_absolute");
  td->add_flag("--swap", td_swap, "Train on the test half instead");

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a model to a sample CSV under given weights");
  std::string fit_samples, fit_weights, fit_solver = "minnorm", fit_loss = "squared";
  double fit_lambda = 0.0, fit_eps = 0.0, fit_r = 1.0;
  wtn::Index fit_rank = 10;
  int fit_iters = 0;
  fit->add_option("--samples", fit_samples, "SampleSet CSV (t,i,j,value)")->required()->check(CLI::ExistingFile);
  fit->add_option("--weights", fit_weights, "MarginalWeights JSON")->required()->check(CLI::ExistingFile);
  fit->add_option("--solver", fit_solver, "proximal, sgd, minnorm or erm")
      ->check(CLI::IsMember({"proximal", "sgd", "minnorm", "erm"}))
      ->capture_default_str();
  fit->add_option("--loss", fit_loss, "Loss for sgd and erm")->capture_default_str();
  fit->add_option("--lambda", fit_lambda, "Regularization weight (proximal, sgd)")->capture_default_str();
  fit->add_option("--eps", fit_eps, "Training-loss ceiling (minnorm)")->capture_default_str();
  fit->add_option("--r", fit_r, "Norm budget r, radius sqrt(r) (erm)")->capture_default_str();
  fit->add_option("--rank", fit_rank, "Rank cap (sgd)")->capture_default_str();
  fit->add_option("--iters", fit_iters, "Iterations or epochs (0 keeps the solver default)");

  // rademacher
  auto* rad = app.add_subcommand("rademacher", "Monte-Carlo Rademacher complexity and bound quantities");
  std::string rad_dist;
  std::vector<std::size_t> rad_s;
  double rad_r = 1.0, rad_alpha = 1.0;
  int rad_draws = wtn::kDefaultSignDraws;
  rad->add_option("--dist", rad_dist, "Distribution JSON")->required()->check(CLI::ExistingFile);
  rad->add_option("--s", rad_s, "Sample sizes")->required();
  rad->add_option("--r", rad_r, "Norm budget r")->capture_default_str();
  rad->add_option("--draws", rad_draws, "Sign draws")->capture_default_str();
  rad->add_option("--alpha", rad_alpha, "Smoothing of the true marginals used as weights")->capture_default_str();

  // adversarial
  auto* adv = app.add_subcommand("adversarial", "Expected loss of the constructed ERM on the degenerate examples");
  int adv_example = 1, adv_trials = 200;
  wtn::Index adv_n = 60;
  std::size_t adv_s = 1800;
  adv->add_option("--example", adv_example, "1 or 2")->check(CLI::IsMember({1, 2}))->capture_default_str();
  adv->add_option("--n", adv_n, "Matrix size")->capture_default_str();
  adv->add_option("--s", adv_s, "Sample size")->capture_default_str();
  adv->add_option("--trials", adv_trials, "Trials")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(g.out);
    const Json file_cfg = load_config(g);

    if (sc->parsed()) {
      auto cfg = wtn::SampleComplexityConfig::from_json(file_cfg);
      if (!sc_ns.empty()) cfg.ns = sc_ns;
      if (sc_seeds) cfg.seeds = *sc_seeds;
      if (sc_target) cfg.target_error = *sc_target;
      if (!sc_weightings.empty()) cfg.weightings = parse_weightings(sc_weightings);
      if (g.seed) cfg.base_seed = *g.seed;
      cfg = wtn::SampleComplexityConfig::from_json(cfg.to_json(), cfg);
      write_reports(g, "simulate samplecomplexity", cfg, wtn::run_sample_complexity(cfg), "samplecomplexity.csv");
    } else if (ee->parsed()) {
      auto cfg = wtn::ExcessErrorConfig::from_json(file_cfg);
      if (ee_n) cfg.n = *ee_n;
      if (ee_seeds) cfg.seeds = *ee_seeds;
      if (!ee_nu.empty()) cfg.nu_grid = ee_nu;
      if (!ee_s.empty()) cfg.s_grid = ee_s;
      if (!ee_weightings.empty()) cfg.weightings = parse_weightings(ee_weightings);
      if (g.seed) cfg.base_seed = *g.seed;
      cfg = wtn::ExcessErrorConfig::from_json(cfg.to_json(), cfg);
      write_reports(g, "simulate excesserror", cfg, wtn::run_excess_error(cfg), "excesserror.csv");
    } else if (sm->parsed()) {
      auto cfg = wtn::SmoothingSweepConfig::from_json(file_cfg);
      Json cli;
      if (sm_family) cli["family"] = *sm_family;
      if (sm_seeds) cli["seeds"] = *sm_seeds;
      if (!sm_alpha.empty()) cli["alpha_grid"] = sm_alpha;
      if (!sm_k.empty()) cli["k_grid"] = sm_k;
      if (g.seed) cli["base_seed"] = *g.seed;
      cfg = wtn::SmoothingSweepConfig::from_json(cli, cfg);
      write_reports(g, "sweep smoothing", cfg, wtn::run_smoothing_sweep(cfg), "smoothing.csv");
    } else if (td->parsed()) {
      auto cfg = wtn::TransductiveConfig::from_json(file_cfg);
      Json cli;
      if (td_n) cli["n"] = *td_n;
      if (td_half) cli["half"] = *td_half;
      if (td_splits) cli["splits"] = *td_splits;
      if (td_loss) cli["loss"] = *td_loss;
      if (td_swap) cli["swap_roles"] = true;
      if (g.seed) cli["base_seed"] = *g.seed;
      cfg = wtn::TransductiveConfig::from_json(cli, cfg);
      write_reports(g, "transductive", cfg, std::vector{wtn::run_transductive(cfg)}, "transductive.csv");
    } else if (fit->parsed()) {
      const wtn::MarginalWeights w = wtn::io::weights_from_json(wtn::io::read_json_file(fit_weights));
      std::ifstream in(fit_samples);
      const wtn::SampleSet set = wtn::io::read_sample_csv(in, w.rows(), w.cols());
      const wtn::LossSpec loss = loss_from_name(fit_loss);
      const std::uint64_t seed = g.seed.value_or(0);
      Json results;
      std::optional<wtn::CompletionModel> model;
      if (fit_solver == "proximal") {
        wtn::SolverConfig cfg;
        cfg.lambda = fit_lambda;
        if (fit_iters > 0) cfg.max_iters = fit_iters;
        auto f = wtn::fit_proximal(set, w, loss, cfg);
        results = {{"training_loss", f.training_loss}, {"weighted_norm", f.weighted_norm},
                   {"iterations", f.iterations}, {"converged", f.converged}};
        model = std::move(f.model);
      } else if (fit_solver == "sgd") {
        auto cfg = wtn::SolverConfig::sgd(fit_rank, fit_lambda, seed);
        if (fit_iters > 0) cfg.max_iters = fit_iters;
        auto f = wtn::fit_factored_sgd(set, w, loss, cfg);
        results = {{"objective", f.objective.back()}, {"training_loss", wtn::empirical_loss(f.model, set, loss)}};
        model = std::move(f.model);
      } else if (fit_solver == "minnorm") {
        wtn::MinNormOptions opts;
        if (fit_iters > 0) opts.max_iters = fit_iters;
        auto f = wtn::min_norm_fit(set, w, fit_eps, opts);
        results = {{"training_loss", f.training_loss}, {"weighted_norm", f.norm}, {"lambda", f.lambda},
                   {"feasible", f.feasible}, {"solves", f.solves}};
        model = std::move(f.model);
      } else {
        wtn::SolverConfig cfg;
        if (fit_iters > 0) cfg.max_iters = fit_iters;
        auto f = wtn::erm_in_ball(set, w, {fit_r}, loss, cfg);
        results = {{"training_loss", f.training_loss}, {"weighted_norm", f.weighted_norm}};
        model = std::move(f.model);
      }
      wtn::io::write_json_file(fs::path(g.out) / "model.json", wtn::io::to_json(*model));
      const Json config{{"samples", fit_samples}, {"weights", fit_weights}, {"solver", fit_solver},
                        {"loss", fit_loss},       {"lambda", fit_lambda},   {"eps", fit_eps},
                        {"r", fit_r},             {"rank", fit_rank},       {"iters", fit_iters}};
      write_manifest(g, "fit", config, {"model.json"}, results);
      std::cout << results.dump(2) << '\n';
    } else if (rad->parsed()) {
      const wtn::JointDistribution dist = wtn::io::distribution_from_json(wtn::io::read_json_file(rad_dist));
      const wtn::MarginalWeights w = wtn::smooth(wtn::true_marginals(dist), {rad_alpha});
      const std::uint64_t seed = g.seed.value_or(0);
      auto out = open_output(fs::path(g.out) / "rademacher.csv");
      out << "s,mean,std_error,R_value,sigma_sq,predicted_rate\n" << std::setprecision(12);
      for (std::size_t k = 0; k < rad_s.size(); ++k) {
        wtn::Rng rng = wtn::make_rng(wtn::derive_seed(seed, 2 * k));
        const auto cells = wtn::sample_indexes(dist, rad_s[k], rng);
        const auto est = wtn::estimate_rademacher(cells, w, {rad_r}, rad_draws, wtn::derive_seed(seed, 2 * k + 1));
        const auto diag = wtn::bound_diagnostics(dist, w, rad_s[k], {rad_r});
        out << rad_s[k] << ',' << est.mean << ',' << est.std_error << ',' << diag.R_value << ',' << diag.sigma_sq
            << ',' << diag.predicted_rate << '\n';
      }
      const Json config{{"dist", rad_dist}, {"s", rad_s}, {"r", rad_r}, {"draws", rad_draws}, {"alpha", rad_alpha}};
      write_manifest(g, "rademacher", config, {"rademacher.csv"});
    } else if (adv->parsed()) {
      const std::uint64_t seed = g.seed.value_or(0);
      wtn::TrialSummary summary;
      double closed_form = 0.0, bound = 0.0;
      if (adv_example == 1) {
        const auto inst = wtn::build_example1(adv_n, adv_s, wtn::derive_seed(seed, 0));
        summary = wtn::run_example1_trials(inst, adv_trials, wtn::derive_seed(seed, 1));
        closed_form = wtn::example1_expected_loss(inst);
        bound = wtn::example1_lower_bound(adv_n, adv_s);
      } else {
        const auto inst = wtn::build_example2(adv_n, adv_s);
        summary = wtn::run_example2_trials(inst, adv_trials, wtn::derive_seed(seed, 1));
        closed_form = wtn::example2_expected_loss(adv_s);
        bound = wtn::kExample2LowerBound;
      }
      auto out = open_output(fs::path(g.out) / "adversarial.csv");
      out << "trial,Lp,std_error,closed_form,paper_bound\n" << std::setprecision(12);
      for (std::size_t t = 0; t < summary.losses.size(); ++t) out << t << ',' << summary.losses[t] << ",,,\n";
      out << "summary," << summary.mean << ',' << summary.std_error << ',' << closed_form << ',' << bound << '\n';
      const Json config{{"example", adv_example}, {"n", adv_n}, {"s", adv_s}, {"trials", adv_trials}};
      const Json results{{"mean", summary.mean}, {"std_error", summary.std_error}, {"closed_form", closed_form},
                         {"paper_bound", bound}};
      write_manifest(g, "adversarial", config, {"adversarial.csv"}, results);
      std::cout << results.dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
