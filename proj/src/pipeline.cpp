#include "bvs/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "bvs/predict.hpp"
#include "bvs/rng.hpp"
#include "bvs/simgen.hpp"
#include "bvs/threads.hpp"

namespace bvs {

using json = nlohmann::ordered_json;

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL * (salt + 1));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

json parse_config(const std::string& config_json) {
  if (config_json.empty()) return json::object();
  json cfg = json::parse(config_json);
  if (!cfg.is_object()) throw std::invalid_argument("config must be a JSON object");
  return cfg;
}

template <typename T>
T get_or(const json& cfg, const char* key, T fallback) {
  if (!cfg.contains(key) || cfg.at(key).is_null()) return fallback;
  return cfg.at(key).get<T>();
}

const json kEmpty = json::object();

const json& section(const json& cfg, const char* key) {
  if (cfg.contains(key) && cfg.at(key).is_object()) return cfg.at(key);
  return kEmpty;
}

PriorSpec parse_prior(const json& cfg) {
  const json& pr = section(cfg, "prior");
  const json& mp = section(cfg, "modelprior");
  PriorSpec prior;
  prior.family = prior_family_from_string(
      get_or<std::string>(pr, "family", "pimom"));
  prior.r = get_or<double>(pr, "r", 1.0);
  prior.tau = get_or<double>(pr, "tau", 0.0);  // <= 0 means tune
  prior.a = get_or<double>(mp, "a", 1.0);
  prior.b = get_or<double>(mp, "b", -1.0);
  return prior;
}

SearchConfig parse_search(const json& cfg, std::uint64_t seed, int threads) {
  const json& sc = section(cfg, "search");
  SearchConfig search;
  const double hi = get_or<double>(sc, "temps_hi", 3.0);
  const double lo = get_or<double>(sc, "temps_lo", 1.0);
  const int nt = get_or<int>(sc, "n_temps", 10);
  if (nt < 1) throw std::invalid_argument("search.n_temps must be >= 1");
  search.temperatures.resize(nt);
  for (int i = 0; i < nt; ++i) {
    search.temperatures[i] = nt == 1 ? lo : hi - (hi - lo) * i / (nt - 1);
  }
  search.iters_per_temp = get_or<int>(sc, "iters", 30);
  search.d = get_or<int>(sc, "d", 0);
  search.chains = get_or<int>(sc, "chains", 4);
  search.seed = seed;
  search.threads = threads;
  return search;
}

// canonical echo of the effective configuration
json effective_config(const json& cfg, const PriorSpec& prior,
                      const SearchConfig& search, std::uint64_t seed) {
  json out;
  out["seed"] = seed;
  out["prior"] = {{"family", to_string(prior.family)},
                  {"r", prior.r},
                  {"tau", prior.tau > 0.0 ? json(prior.tau) : json()}};
  out["modelprior"] = {{"a", prior.a},
                       {"b", prior.b > 0.0 ? json(prior.b) : json()}};
  const json& tn = section(cfg, "tune");
  out["tune"] = {{"alpha", get_or<double>(tn, "alpha", 0.8)},
                 {"reps", get_or<int>(tn, "reps", 200)}};
  out["search"] = {{"temps", search.temperatures},
                   {"iters", search.iters_per_temp},
                   {"d", search.d},
                   {"chains", search.chains}};
  out["occam_w"] = get_or<double>(cfg, "occam_w", 0.01);
  return out;
}

std::vector<double> parse_grid(const std::string& spec) {
  // "lo:hi:count"
  double lo, hi;
  int count;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &lo, &hi, &count) != 3 ||
      count < 1 || hi < lo) {
    throw std::invalid_argument("bad grid spec: " + spec + " (want lo:hi:count)");
  }
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) {
    g[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  }
  return g;
}

SurvivalDataset subset_rows(const SurvivalDataset& ds,
                            const std::vector<int>& rows) {
  Eigen::VectorXd times(rows.size());
  Eigen::VectorXi status(rows.size());
  Eigen::MatrixXd design(rows.size(), ds.p());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    times(i) = ds.times(rows[i]);
    status(i) = ds.status(rows[i]);
    design.row(i) = ds.design.row(rows[i]);
  }
  return make_dataset(std::move(times), std::move(status), std::move(design),
                      ds.column_names, ds.fixed_columns);
}

std::string csv_header(std::uint64_t seed, const std::string& hash) {
  std::ostringstream os;
  os << "# survbvs " << kVersion << "\n";
  os << "# seed: " << seed << "\n";
  os << "# config_hash: " << hash << "\n";
  return os.str();
}

}  // namespace

std::string config_hash(const std::string& config_json) {
  const std::string canon = parse_config(config_json).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SelectOutcome run_select(const SurvivalDataset& dataset,
                         const std::string& config_json) {
  const json cfg = parse_config(config_json);
  const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", 0);
  const int threads = get_or<int>(cfg, "threads", default_threads());

  SelectOutcome out;
  out.prior = parse_prior(cfg);
  out.search = parse_search(cfg, seed, threads);

  if (out.prior.tau <= 0.0) {
    const json& tn = section(cfg, "tune");
    const double alpha = get_or<double>(tn, "alpha", 0.8);
    const int reps = get_or<int>(tn, "reps", 200);
    out.tau_info = select_tau(dataset, alpha, out.prior.r, reps,
                              mix_seed(seed, 0xA1FA), threads);
    out.prior.tau = out.tau_info->tau;
  }
  out.tau_used = out.prior.tau;
  out.prior.validate();

  out.pool = run_search(dataset, out.prior, out.search);
  out.summaries = summarize(out.pool, dataset,
                            get_or<double>(cfg, "occam_w", 0.01));
  return out;
}

std::string select_report_json(const SurvivalDataset& dataset,
                               const std::string& config_json) {
  const json cfg = parse_config(config_json);
  const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", 0);
  const SelectOutcome res = run_select(dataset, config_json);
  const int top_n = get_or<int>(section(cfg, "report"), "top_models", 50);

  json doc;
  doc["meta"] = {{"tool", "survbvs"},
                 {"version", kVersion},
                 {"seed", seed},
                 {"config_hash", config_hash(config_json)},
                 {"config", effective_config(cfg, res.prior, res.search, seed)},
                 {"warnings", dataset.warnings}};
  doc["data"] = {{"n", dataset.n()},
                 {"p", dataset.p()},
                 {"events", dataset.n_events()},
                 {"censoring_rate", dataset.censoring_fraction()}};
  std::vector<std::string> fixed_names;
  for (int c : dataset.fixed_columns) fixed_names.push_back(dataset.column_names[c]);
  doc["data"]["fixed_columns"] = fixed_names;

  json tau = {{"value", res.tau_used},
              {"source", res.tau_info ? "tuned" : "config"}};
  if (res.tau_info) {
    tau["tau1"] = res.tau_info->tau1;
    tau["threshold"] = res.tau_info->threshold;
    tau["null_mean"] = res.tau_info->null_mean;
    tau["null_sd"] = res.tau_info->null_sd;
    tau["grid_exhausted"] = res.tau_info->grid_exhausted;
  }
  doc["tau"] = tau;

  auto model_names = [&](const ModelId& m) {
    std::vector<std::string> names;
    for (int c : m.indices()) names.push_back(dataset.column_names[c]);
    return names;
  };
  auto indices_1based = [](const ModelId& m) {
    std::vector<int> v;
    for (int c : m.indices()) v.push_back(c + 1);
    return v;
  };

  const auto& sums = res.summaries;
  const auto& hppm_entry = res.pool.entries.at(sums.hppm);
  json hppm = {{"columns", model_names(sums.hppm)},
               {"indices", indices_1based(sums.hppm)},
               {"posterior_probability", sums.hppm_posterior},
               {"log_score", sums.hppm_log_score},
               {"log_marginal", hppm_entry.scored.log_marginal}};
  json map_coef = json::object();
  {
    int i = 0;
    for (int c : sums.hppm.indices()) {
      map_coef[dataset.column_names[c]] = hppm_entry.scored.beta_map(i++);
    }
  }
  hppm["map_coefficients"] = map_coef;
  doc["hppm"] = hppm;

  doc["mpm"] = {{"columns", model_names(sums.mpm)},
                {"indices", indices_1based(sums.mpm)}};
  doc["columns"] = dataset.column_names;
  doc["inclusion_probabilities"] = sums.inclusion_probs;

  json occam = json::array();
  for (const auto& [m, w] : sums.occam) {
    occam.push_back({{"indices", indices_1based(m)}, {"weight", w}});
  }
  doc["occam_window"] = occam;

  json top = json::array();
  for (const auto& [m, prob] : sums.ranked) {
    if (static_cast<int>(top.size()) >= top_n) break;
    top.push_back({{"indices", indices_1based(m)},
                   {"posterior_probability", prob},
                   {"log_score", res.pool.entries.at(m).scored.log_score}});
  }
  doc["top_models"] = top;
  doc["pool"] = {{"models_visited", res.pool.size()}};
  return doc.dump(2) + "\n";
}

std::string tune_report_csv(const SurvivalDataset& dataset,
                            const std::string& config_json) {
  const json cfg = parse_config(config_json);
  const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", 0);
  const int threads = get_or<int>(cfg, "threads", default_threads());
  const json& tn = section(cfg, "tune");
  const double alpha = get_or<double>(tn, "alpha", 0.8);
  const int reps = get_or<int>(tn, "reps", 200);
  const double r = get_or<double>(section(cfg, "prior"), "r", 1.0);

  const TauSelection sel =
      select_tau(dataset, alpha, r, reps, mix_seed(seed, 0xA1FA), threads);

  std::ostringstream os;
  os << csv_header(seed, config_hash(config_json));
  os << "# alpha: " << fmt(alpha) << "\n";
  os << "# tau: " << fmt(sel.tau) << "\n";
  os << "# tau1: " << fmt(sel.tau1) << "\n";
  os << "# threshold: " << fmt(sel.threshold) << "\n";
  os << "# null_mean: " << fmt(sel.null_mean) << "\n";
  os << "# null_sd: " << fmt(sel.null_sd) << "\n";
  os << "# dropped_fits: " << sel.dropped << "\n";
  if (sel.grid_exhausted) {
    os << "# warning: overlap threshold not reached on the tau grid\n";
  }
  os << "tau,overlap\n";
  for (std::size_t i = 0; i < sel.grid.size(); ++i) {
    os << fmt(sel.grid[i]) << "," << fmt(sel.grid_overlap[i]) << "\n";
  }
  return os.str();
}

std::string simulate_report_csv(const std::string& config_json) {
  const json cfg = parse_config(config_json);
  const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", 0);
  const int threads = get_or<int>(cfg, "threads", default_threads());
  const json& sim_cfg = section(cfg, "simulate");
  const int case_id = get_or<int>(sim_cfg, "case", 1);
  const int reps = get_or<int>(sim_cfg, "reps", 10);
  const int n = get_or<int>(sim_cfg, "n", 400);
  const int p = get_or<int>(sim_cfg, "p", 1000);
  if (reps < 1) throw std::invalid_argument("simulate.reps must be >= 1");

  const SimCase sim = sim_case(case_id);

  // per-replicate select config: same prior/search settings, threads pinned
  // to 1 so the replicate loop is the only parallel level
  json rep_cfg = cfg;
  rep_cfg.erase("simulate");
  rep_cfg["threads"] = 1;

  struct RepRow {
    SelectionMetrics metrics;
    double censoring = 0.0;
    double tau = 0.0;
    ModelId selected;
  };
  std::vector<RepRow> rows(reps);

  parallel_for(reps, threads, [&](int rep) {
    SimReplicate data = gen_replicate(sim, n, p, seed, rep);
    json c = rep_cfg;
    c["seed"] = mix_seed(seed, 1000 + rep);
    const SelectOutcome sel = run_select(data.dataset, c.dump());

    Eigen::VectorXd beta_hat = Eigen::VectorXd::Zero(p);
    const auto& best = sel.pool.entries.at(sel.summaries.hppm).scored;
    int bi = 0;
    for (int col : best.model.indices()) beta_hat(col) = best.beta_map(bi++);

    rows[rep].metrics = compute_metrics(sel.summaries.hppm, data.truth,
                                        beta_hat, data.beta_true);
    rows[rep].censoring = data.censoring_rate;
    rows[rep].tau = sel.tau_used;
    rows[rep].selected = sel.summaries.hppm;
  });

  std::vector<SelectionMetrics> metrics;
  for (const auto& r : rows) metrics.push_back(r.metrics);
  const MetricsAggregate agg = aggregate_metrics(metrics);

  std::ostringstream os;
  os << csv_header(seed, config_hash(config_json));
  os << "# case: " << case_id << " n: " << n << " p: " << p
     << " reps: " << reps << "\n";
  os << "rep,censoring_rate,tau,model_size,tp,fp,exact,l1,sqerr,selected\n";
  for (int i = 0; i < reps; ++i) {
    const auto& r = rows[i];
    os << i + 1 << "," << fmt(r.censoring) << "," << fmt(r.tau) << ","
       << r.metrics.model_size << "," << r.metrics.tp << "," << r.metrics.fp
       << "," << (r.metrics.exact ? 1 : 0) << "," << fmt(r.metrics.l1) << ","
       << fmt(r.metrics.sqerr) << ",";
    const auto& idx = r.selected.indices();
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (j) os << ";";
      os << idx[j] + 1;
    }
    os << "\n";
  }
  os << "# aggregate: MMS " << fmt(agg.mms) << " (se " << fmt(agg.se_mms)
     << ") MTP " << fmt(agg.mtp) << " (se " << fmt(agg.se_mtp) << ") MFP "
     << fmt(agg.mfp) << " (se " << fmt(agg.se_mfp) << ") MSE " << fmt(agg.mse)
     << " (se " << fmt(agg.se_mse) << ") MeanL1 " << fmt(agg.mean_l1)
     << " (se " << fmt(agg.se_l1) << ") TMP " << fmt(agg.tmp) << "\n";
  return os.str();
}

namespace {

Eigen::MatrixXd read_subjects_csv(const std::string& path,
                                  const SurvivalDataset& train) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open subjects file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw ValidationError("empty subjects file");
  const char delim = header.find('\t') != std::string::npos ? '\t' : ',';

  std::vector<std::string> names;
  {
    std::stringstream ss(header);
    std::string f;
    while (std::getline(ss, f, delim)) {
      while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
      names.push_back(f);
    }
  }
  std::vector<int> source(train.p(), -1);
  for (int c = 0; c < train.p(); ++c) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (names[j] == train.column_names[c]) {
        source[c] = static_cast<int>(j);
        break;
      }
    }
    if (source[c] < 0) {
      throw ValidationError("subjects file missing column '" +
                            train.column_names[c] + "'");
    }
  }

  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string f;
    std::vector<double> vals;
    while (std::getline(ss, f, delim)) {
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (end == f.c_str()) {
        throw ValidationError("subjects row " + std::to_string(lineno) +
                              ": non-numeric value '" + f + "'");
      }
      vals.push_back(v);
    }
    if (vals.size() != names.size()) {
      throw ValidationError("subjects row " + std::to_string(lineno) +
                            ": field count mismatch");
    }
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw ValidationError("subjects file has no rows");

  Eigen::MatrixXd out(rows.size(), train.p());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int c = 0; c < train.p(); ++c) out(i, c) = rows[i][source[c]];
  }
  return out;
}

}  // namespace

std::string evaluate_report_csv(const SurvivalDataset& dataset,
                                const std::string& config_json) {
  const json cfg = parse_config(config_json);
  const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", 0);
  const int threads = get_or<int>(cfg, "threads", default_threads());
  const json& ev = section(cfg, "evaluate");
  const int folds = get_or<int>(ev, "folds", 5);
  const std::string mode = get_or<std::string>(ev, "mode", "bma");
  const std::string g_weight = get_or<std::string>(ev, "g_weight", "survival");
  if (mode != "bma" && mode != "hppm") {
    throw std::invalid_argument("evaluate.mode must be 'bma' or 'hppm'");
  }
  if (g_weight != "survival" && g_weight != "censoring") {
    throw std::invalid_argument("evaluate.g_weight must be 'survival' or 'censoring'");
  }
  const std::string grid_spec = get_or<std::string>(ev, "t_grid", "");
  std::vector<double> t_grid;
  if (!grid_spec.empty()) {
    t_grid = parse_grid(grid_spec);
  } else {
    // default: 20 points spanning the inner 80% of observed times
    const double lo = dataset.times(dataset.n() / 10);
    const double hi = dataset.times(dataset.n() - 1 - dataset.n() / 10);
    t_grid = parse_grid(fmt(lo) + ":" + fmt(hi) + ":20");
  }

  const CvFolds cv = cv_folds(dataset, folds, mix_seed(seed, 0xF01D));

  json fold_cfg = cfg;
  fold_cfg.erase("evaluate");
  fold_cfg["threads"] = 1;

  std::vector<std::vector<double>> auc(folds);
  parallel_for(folds, threads, [&](int fold) {
    std::vector<int> train_rows, test_rows;
    for (int i = 0; i < dataset.n(); ++i) {
      (cv.assignment[i] == fold ? test_rows : train_rows).push_back(i);
    }
    const SurvivalDataset train = subset_rows(dataset, train_rows);
    const SurvivalDataset test = subset_rows(dataset, test_rows);

    json c = fold_cfg;
    c["seed"] = mix_seed(seed, 2000 + fold);
    const SelectOutcome sel = run_select(train, c.dump());

    std::vector<std::pair<ScoredModel, double>> models;
    if (mode == "hppm") {
      models.emplace_back(sel.pool.entries.at(sel.summaries.hppm).scored, 1.0);
    } else {
      for (const auto& [m, w] : sel.summaries.occam) {
        models.emplace_back(sel.pool.entries.at(m).scored, w);
      }
    }

    AucInput in;
    in.test_times = test.times;
    in.test_status = test.status;
    for (const auto& [sm, w] : models) {
      in.weights.push_back(w);
      Eigen::VectorXd marker = Eigen::VectorXd::Zero(test.n());
      int bi = 0;
      for (int col : sm.model.indices()) {
        marker += test.design.col(col) * sm.beta_map(bi++);
      }
      in.markers.push_back(std::move(marker));
    }

    Eigen::VectorXi g_status = train.status;
    if (g_weight == "censoring") {
      for (int i = 0; i < g_status.size(); ++i) g_status(i) = 1 - g_status(i);
    }
    const StepFunction G = kaplan_meier(train.times, g_status);
    std::vector<double> train_times(train.times.data(),
                                    train.times.data() + train.n());
    in.g_at_test_times.resize(test.n());
    for (int i = 0; i < test.n(); ++i) {
      in.g_at_test_times(i) = g_interpolate(G, train_times, test.times(i));
    }

    auc[fold] = auc_curve(t_grid, in);
  });

  std::ostringstream os;
  os << csv_header(seed, config_hash(config_json));
  os << "# folds: " << folds << " mode: " << mode << " g_weight: " << g_weight
     << "\n";
  os << "t";
  for (int f = 0; f < folds; ++f) os << ",fold" << f + 1;
  os << ",mean\n";
  for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
    os << fmt(t_grid[ti]);
    double sum = 0.0;
    int count = 0;
    for (int f = 0; f < folds; ++f) {
      const double v = auc[f][ti];
      os << ",";
      if (std::isnan(v)) {
        os << "NA";
      } else {
        os << fmt(v);
        sum += v;
        ++count;
      }
    }
    os << "," << (count > 0 ? fmt(sum / count) : "NA") << "\n";
  }
  return os.str();
}

std::string predict_report_csv(const SurvivalDataset& dataset,
                               const std::string& config_json) {
  const json cfg = parse_config(config_json);
  const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", 0);
  const json& pd = section(cfg, "predict");
  const std::string mode = get_or<std::string>(pd, "mode", "hppm");
  if (mode != "bma" && mode != "hppm") {
    throw std::invalid_argument("predict.mode must be 'bma' or 'hppm'");
  }

  json sel_cfg = cfg;
  sel_cfg.erase("predict");
  const SelectOutcome sel = run_select(dataset, sel_cfg.dump());

  std::vector<std::pair<ScoredModel, double>> models;
  if (mode == "hppm") {
    models.emplace_back(sel.pool.entries.at(sel.summaries.hppm).scored, 1.0);
  } else {
    for (const auto& [m, w] : sel.summaries.occam) {
      models.emplace_back(sel.pool.entries.at(m).scored, w);
    }
  }

  Eigen::MatrixXd subjects;
  const std::string subjects_csv = get_or<std::string>(pd, "subjects_csv", "");
  if (!subjects_csv.empty()) {
    subjects = read_subjects_csv(subjects_csv, dataset);
  } else {
    subjects = dataset.design;
  }

  const std::vector<StepFunction> curves =
      survival_curves(dataset, models, subjects);

  std::ostringstream os;
  os << csv_header(seed, config_hash(config_json));
  os << "# mode: " << mode << " subjects: " << curves.size() << "\n";
  os << "time";
  for (std::size_t s = 0; s < curves.size(); ++s) os << ",subject" << s + 1;
  os << "\n";
  os << fmt(0.0);
  for (std::size_t s = 0; s < curves.size(); ++s) os << "," << fmt(1.0);
  os << "\n";
  if (!curves.empty()) {
    for (std::size_t ki = 0; ki < curves[0].knots.size(); ++ki) {
      os << fmt(curves[0].knots[ki]);
      for (const auto& c : curves) os << "," << fmt(c.values[ki]);
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace bvs
