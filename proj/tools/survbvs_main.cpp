// Command-line front end for the survbvs shared library.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "survbvs.h"

namespace {

using json = nlohmann::ordered_json;

struct CommonOpts {
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = library default (env var / hardware)
  std::string out;
};

struct DataOpts {
  std::string path;
  std::string time_col = "time";
  std::string status_col = "status";
  std::string fixed_cols;
  bool standardize = false;
};

struct PriorOpts {
  std::string family = "pimom";
  double r = 1.0;
  double tau = 0.0;  // 0 = tune
  double a = 1.0;
  double b = 0.0;  // 0 = default p - a
  double alpha = 0.8;
  int tune_reps = 200;
};

struct SearchOpts {
  std::string temps = "3:1:10";
  int iters = 30;
  int d = 0;
  int chains = 4;
  double occam_w = 0.01;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--threads", o.threads,
                  "worker threads (default: SURVBVS_THREADS or hardware)");
  cmd->add_option("--out", o.out, "output file (default: stdout)");
}

void add_data(CLI::App* cmd, DataOpts& o) {
  cmd->add_option("data", o.path, "CSV/TSV input file")->required();
  cmd->add_option("--time-col", o.time_col, "time column name");
  cmd->add_option("--status-col", o.status_col, "status column name (0/1)");
  cmd->add_option("--fixed-cols", o.fixed_cols,
                  "comma list of always-included columns");
  cmd->add_flag("--standardize", o.standardize,
                "center/scale non-fixed covariates");
}

void add_prior(CLI::App* cmd, PriorOpts& o) {
  cmd->add_option("--prior", o.family, "coefficient prior: pimom|pmom");
  cmd->add_option("--r", o.r, "prior tail/order parameter");
  cmd->add_option("--tau", o.tau, "prior scale; omit to tune");
  cmd->add_option("--a", o.a, "beta-binomial a");
  cmd->add_option("--b", o.b, "beta-binomial b (default p-a)");
  cmd->add_option("--alpha", o.alpha, "prior-mode bound for tau tuning");
  cmd->add_option("--tune-reps", o.tune_reps, "null-simulation replicates");
}

void add_search(CLI::App* cmd, SearchOpts& o) {
  cmd->add_option("--temps", o.temps, "annealing schedule hi:lo:count");
  cmd->add_option("--iters", o.iters, "iterations per temperature");
  cmd->add_option("--d", o.d, "screening-set size (0 = 2*ceil(log p))");
  cmd->add_option("--chains", o.chains, "independent search chains");
  cmd->add_option("--occam-w", o.occam_w, "Occam's-window fraction");
}

json config_json(const CommonOpts& c, const PriorOpts* pr, const SearchOpts* se) {
  json cfg;
  cfg["seed"] = c.seed;
  if (c.threads > 0) cfg["threads"] = c.threads;
  if (pr) {
    cfg["prior"] = {{"family", pr->family}, {"r", pr->r}};
    if (pr->tau > 0.0) cfg["prior"]["tau"] = pr->tau;
    cfg["modelprior"] = {{"a", pr->a}};
    if (pr->b > 0.0) cfg["modelprior"]["b"] = pr->b;
    cfg["tune"] = {{"alpha", pr->alpha}, {"reps", pr->tune_reps}};
  }
  if (se) {
    double hi = 3, lo = 1;
    int nt = 10;
    if (std::sscanf(se->temps.c_str(), "%lf:%lf:%d", &hi, &lo, &nt) != 3) {
      throw CLI::ValidationError("--temps", "expected hi:lo:count");
    }
    cfg["search"] = {{"temps_hi", hi},
                     {"temps_lo", lo},
                     {"n_temps", nt},
                     {"iters", se->iters},
                     {"d", se->d},
                     {"chains", se->chains}};
    cfg["occam_w"] = se->occam_w;
  }
  return cfg;
}

int write_output(const std::string& content, const std::string& path) {
  if (path.empty()) {
    std::cout << content;
    return 0;
  }
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    return 2;
  }
  out << content;
  return 0;
}

struct DatasetHandle {
  survbvs_dataset* ds = nullptr;
  ~DatasetHandle() { survbvs_dataset_free(ds); }
};

int load_dataset(const DataOpts& d, DatasetHandle& h) {
  const int rc = survbvs_dataset_read_csv(
      d.path.c_str(), d.time_col.c_str(), d.status_col.c_str(),
      d.fixed_cols.empty() ? nullptr : d.fixed_cols.c_str(),
      d.standardize ? 1 : 0, &h.ds);
  if (rc != SURVBVS_OK) {
    std::cerr << "error: " << survbvs_last_error() << "\n";
  }
  return rc;
}

struct ReportString {
  char* s = nullptr;
  ~ReportString() { survbvs_free_string(s); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"survbvs: Bayesian variable selection for survival data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", survbvs_version());

  CommonOpts common;
  DataOpts data;
  PriorOpts prior;
  SearchOpts search;

  auto* sel = app.add_subcommand("select", "run variable selection");
  add_data(sel, data);
  add_prior(sel, prior);
  add_search(sel, search);
  add_common(sel, common);
  int top_models = 50;
  sel->add_option("--top-models", top_models, "models to list in the report");

  auto* tune = app.add_subcommand("tune", "select the prior scale tau");
  add_data(tune, data);
  add_common(tune, common);
  double tune_alpha = 0.8;
  int tune_reps = 200;
  double tune_r = 1.0;
  tune->add_option("--alpha", tune_alpha, "prior-mode bound");
  tune->add_option("--reps", tune_reps, "null-simulation replicates");
  tune->add_option("--r", tune_r, "prior tail parameter");

  auto* sim = app.add_subcommand("simulate", "run a simulation study");
  add_prior(sim, prior);
  add_search(sim, search);
  add_common(sim, common);
  int sim_case = 1, sim_reps = 10, sim_n = 400, sim_p = 1000;
  sim->add_option("--case", sim_case, "design preset (1-5)");
  sim->add_option("--reps", sim_reps, "replicates");
  sim->add_option("--n", sim_n, "observations per replicate");
  sim->add_option("--p", sim_p, "covariates per replicate");

  auto* eval = app.add_subcommand("evaluate", "cross-validated AUC(t)");
  add_data(eval, data);
  add_prior(eval, prior);
  add_search(eval, search);
  add_common(eval, common);
  int folds = 5;
  std::string t_grid, eval_mode = "bma", g_weight = "survival";
  eval->add_option("--folds", folds, "cross-validation folds");
  eval->add_option("--t-grid", t_grid, "AUC time grid lo:hi:count");
  eval->add_option("--mode", eval_mode, "bma|hppm");
  eval->add_option("--g-weight", g_weight,
                   "KM weighting: survival|censoring");

  auto* pred = app.add_subcommand("predict", "per-subject survival curves");
  add_data(pred, data);
  add_prior(pred, prior);
  add_search(pred, search);
  add_common(pred, common);
  std::string pred_mode = "hppm", subjects_csv;
  pred->add_option("--mode", pred_mode, "hppm|bma");
  pred->add_option("--subjects", subjects_csv,
                   "CSV of subject rows (default: training rows)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sel->parsed()) {
      DatasetHandle h;
      if (int rc = load_dataset(data, h)) return rc;
      json cfg = config_json(common, &prior, &search);
      cfg["report"] = {{"top_models", top_models}};
      ReportString rep;
      const auto start = std::chrono::steady_clock::now();
      const int rc = survbvs_select(h.ds, cfg.dump().c_str(), &rep.s);
      if (rc != SURVBVS_OK) {
        std::cerr << "error: " << survbvs_last_error() << "\n";
        return rc;
      }
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
              .count();
      json doc = json::parse(rep.s);
      doc["wall_time_seconds"] = secs;  // excluded from rerun comparisons
      return write_output(doc.dump(2) + "\n", common.out);
    }

    if (tune->parsed()) {
      DatasetHandle h;
      if (int rc = load_dataset(data, h)) return rc;
      json cfg = config_json(common, nullptr, nullptr);
      cfg["tune"] = {{"alpha", tune_alpha}, {"reps", tune_reps}};
      cfg["prior"] = {{"r", tune_r}};
      ReportString rep;
      const int rc = survbvs_tune(h.ds, cfg.dump().c_str(), &rep.s);
      if (rc != SURVBVS_OK) {
        std::cerr << "error: " << survbvs_last_error() << "\n";
        return rc;
      }
      return write_output(rep.s, common.out);
    }

    if (sim->parsed()) {
      json cfg = config_json(common, &prior, &search);
      cfg["simulate"] = {
          {"case", sim_case}, {"reps", sim_reps}, {"n", sim_n}, {"p", sim_p}};
      ReportString rep;
      const int rc = survbvs_simulate(cfg.dump().c_str(), &rep.s);
      if (rc != SURVBVS_OK) {
        std::cerr << "error: " << survbvs_last_error() << "\n";
        return rc;
      }
      return write_output(rep.s, common.out);
    }

    if (eval->parsed()) {
      DatasetHandle h;
      if (int rc = load_dataset(data, h)) return rc;
      json cfg = config_json(common, &prior, &search);
      cfg["evaluate"] = {{"folds", folds}, {"mode", eval_mode},
                         {"g_weight", g_weight}};
      if (!t_grid.empty()) cfg["evaluate"]["t_grid"] = t_grid;
      ReportString rep;
      const int rc = survbvs_evaluate(h.ds, cfg.dump().c_str(), &rep.s);
      if (rc != SURVBVS_OK) {
        std::cerr << "error: " << survbvs_last_error() << "\n";
        return rc;
      }
      return write_output(rep.s, common.out);
    }

    if (pred->parsed()) {
      DatasetHandle h;
      if (int rc = load_dataset(data, h)) return rc;
      json cfg = config_json(common, &prior, &search);
      cfg["predict"] = {{"mode", pred_mode}};
      if (!subjects_csv.empty()) cfg["predict"]["subjects_csv"] = subjects_csv;
      ReportString rep;
      const int rc = survbvs_predict(h.ds, cfg.dump().c_str(), &rep.s);
      if (rc != SURVBVS_OK) {
        std::cerr << "error: " << survbvs_last_error() << "\n";
        return rc;
      }
      return write_output(rep.s, common.out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
