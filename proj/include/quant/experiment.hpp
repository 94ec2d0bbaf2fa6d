#pragma once

// Experiment runner: fits every requested method once per class, estimates
// each test set, scores the estimates and aggregates them by training-set
// prevalence bin and by drift quartile. Also the tpr/fpr invariance study
// comparing cross-validated rates with rates measured on test sets.

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "quant/core.hpp"
#include "quant/dataset_io.hpp"
#include "quant/eval.hpp"
#include "quant/quantifiers.hpp"
#include "quant/report.hpp"

namespace quant {

struct TestSet {
  std::string id;
  LabeledDataset data;
};

/// One binary class: a training set and the test sets to quantify.
struct ClassTask {
  std::string class_id;
  LabeledDataset train;
  std::vector<TestSet> tests;
};

struct RunOptions {
  std::vector<Method> methods;
  QuantifierConfig quantifier;
  // Smoothing for KLD and RAE; unset means 1 / (2 |Te|) per test set.
  std::optional<double> fixed_epsilon;
  double significance = 0.001;
};

struct ExperimentConfig {
  std::string class_id;  // defaults to the training file name
  std::string train_path;
  std::vector<std::string> test_paths;
  std::vector<Method> methods;
  int folds = 50;
  double c_regularization = 1.0;
  std::optional<double> epsilon;
  std::uint64_t seed = 0;
  std::string output_path;
  report::Format output_format = report::Format::Tsv;
  unsigned threads = 0;
};

namespace detail {

inline double epsilon_for(const RunOptions& opt, std::size_t test_size) {
  return opt.fixed_epsilon ? *opt.fixed_epsilon : 1.0 / (2.0 * static_cast<double>(test_size));
}

inline void summarize(report::QuantifierReport& rep, const std::vector<Method>& methods, double alpha) {
  // group name -> row indices
  std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
  auto add_group = [&](std::string name, auto pred) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < rep.rows.size(); ++i)
      if (pred(rep.rows[i])) idx.push_back(i);
    if (!idx.empty()) groups.emplace_back(std::move(name), std::move(idx));
  };
  add_group("ALL", [](const report::Row&) { return true; });
  for (auto b : {eval::PrevalenceBin::VLP, eval::PrevalenceBin::LP, eval::PrevalenceBin::HP,
                 eval::PrevalenceBin::VHP})
    add_group(std::string(eval::to_string(b)), [b](const report::Row& r) { return r.prevalence_bin == b; });
  for (auto q : {eval::DriftQuartile::VLD, eval::DriftQuartile::LD, eval::DriftQuartile::HD,
                 eval::DriftQuartile::VHD})
    add_group(std::string(eval::to_string(q)), [q](const report::Row& r) { return r.drift_quartile == q; });

  for (const auto& [name, idx] : groups) {
    // per method: (class, test set) -> kld, for pairing
    std::map<Method, std::map<std::pair<std::string, std::string>, double>> by_method;
    for (Method m : methods) {
      std::vector<double> kld, ae, rae, bias;
      for (auto i : idx) {
        const auto& r = rep.rows[i];
        if (r.method != m) continue;
        kld.push_back(r.kld);
        ae.push_back(r.ae);
        rae.push_back(r.rae);
        bias.push_back(r.bias);
        by_method[m][{r.class_id, r.test_set}] = r.kld;
      }
      if (kld.empty()) continue;
      rep.summaries.push_back({name, m, kld.size(), eval::macroaverage(kld), eval::variance(kld),
                               eval::macroaverage(ae), eval::macroaverage(rae), eval::macroaverage(bias)});
    }
    for (std::size_t a = 0; a < methods.size(); ++a) {
      for (std::size_t b = a + 1; b < methods.size(); ++b) {
        const auto ia = by_method.find(methods[a]);
        const auto ib = by_method.find(methods[b]);
        if (ia == by_method.end() || ib == by_method.end()) continue;
        std::vector<double> xa, xb;
        for (const auto& [key, v] : ia->second)
          if (auto it = ib->second.find(key); it != ib->second.end()) {
            xa.push_back(v);
            xb.push_back(it->second);
          }
        if (xa.size() < 2) continue;
        const double p = eval::paired_t_test(xa, xb);
        rep.tests.push_back({name, methods[a], methods[b], xa.size(), p, p < alpha});
      }
    }
  }
}

}  // namespace detail

inline report::QuantifierReport run_experiment(std::span<const ClassTask> tasks, const RunOptions& opt) {
  if (opt.methods.empty()) throw error("no methods requested");
  if (tasks.empty()) throw error("no classes to evaluate");
  report::QuantifierReport rep;

  // drift quartiles rank every (class, test set) pair
  struct PairRef {
    std::size_t task, test;
  };
  std::vector<PairRef> refs;
  std::vector<eval::PrevalencePair> pairs;
  std::size_t max_test_size = 0;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (tasks[t].tests.empty()) throw error("class " + tasks[t].class_id + " has no test sets");
    const auto train_prev = prevalence(tasks[t].train.labels());
    for (std::size_t k = 0; k < tasks[t].tests.size(); ++k) {
      refs.push_back({t, k});
      pairs.push_back({train_prev, prevalence(tasks[t].tests[k].data.labels())});
      max_test_size = std::max(max_test_size, tasks[t].tests[k].data.size());
    }
  }
  std::map<std::pair<std::size_t, std::size_t>, eval::DriftQuartile> quartile_of;
  if (pairs.size() >= 4) {
    // one smoothing constant for the whole ranking, taken from the largest test set
    const eval::KldConfig cfg(opt.fixed_epsilon.value_or(1.0 / (2.0 * static_cast<double>(max_test_size))));
    const auto q = eval::drift_quartiles(pairs, cfg);
    for (std::size_t i = 0; i < refs.size(); ++i) quartile_of[{refs[i].task, refs[i].test}] = q[i];
  }

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const auto& task = tasks[t];
    const auto train_prev = prevalence(task.train.labels());
    const auto bin = eval::prevalence_bin(train_prev);

    // The classifier and its cross-validation fail independently: CC only
    // needs the former.
    std::optional<LinearModel> model;
    std::optional<svm::CvEstimates> cv;
    std::string model_error, cv_error;
    const bool any_baseline = std::any_of(opt.methods.begin(), opt.methods.end(),
                                          [](Method m) { return m != Method::SVM_KLD; });
    const bool any_cv = std::any_of(opt.methods.begin(), opt.methods.end(), needs_cv);
    if (any_baseline) {
      try {
        model = svm::train(task.train, opt.quantifier.train);
      } catch (const std::exception& e) {
        model_error = e.what();
      }
    }
    if (model && any_cv) {
      try {
        cv = svm::cv_estimates(task.train, opt.quantifier.train);
      } catch (const std::exception& e) {
        cv_error = e.what();
      }
    }
    for (Method m : opt.methods) {
      std::optional<Quantifier> q;
      try {
        if (m == Method::SVM_KLD)
          q = Quantifier::fit(m, task.train, opt.quantifier);
        else if (!model)
          throw error(model_error);
        else if (needs_cv(m) && !cv)
          throw error(cv_error);
        else
          q = Quantifier::from_baseline(m, BaselineFit{*model, cv}, opt.quantifier);
      } catch (const std::exception& e) {
        rep.failures.push_back({task.class_id, m, e.what()});
        continue;
      }
      for (std::size_t k = 0; k < task.tests.size(); ++k) {
        const auto& ts = task.tests[k];
        const auto xs = ts.data.vectors();
        Estimate est;
        try {
          est = q->estimate(xs);
        } catch (const std::exception& e) {
          rep.failures.push_back({task.class_id, m, ts.id + ": " + e.what()});
          continue;
        }
        const auto truth = prevalence(ts.data.labels());
        const double eps = detail::epsilon_for(opt, ts.data.size());
        report::Row row;
        row.class_id = task.class_id;
        row.test_set = ts.id;
        row.method = m;
        row.test_size = ts.data.size();
        row.true_prev = truth.value();
        row.est_prev = est.prevalence.value();
        row.kld = eval::kld(truth, est.prevalence, eval::KldConfig(eps));
        row.ae = eval::absolute_error(truth, est.prevalence);
        row.rae = eval::relative_absolute_error(truth, est.prevalence, eps);
        row.bias = eval::bias(truth, est.prevalence);
        row.prevalence_bin = bin;
        if (auto it = quartile_of.find({t, k}); it != quartile_of.end()) row.drift_quartile = it->second;
        row.degenerate = est.degenerate;
        rep.rows.push_back(std::move(row));
      }
    }
  }
  detail::summarize(rep, opt.methods, opt.significance);
  return rep;
}

inline std::string default_class_id(const std::string& train_path) {
  const auto slash = train_path.find_last_of('/');
  return slash == std::string::npos ? train_path : train_path.substr(slash + 1);
}

inline RunOptions run_options_for(const ExperimentConfig& cfg) {
  RunOptions opt;
  opt.methods = cfg.methods;
  opt.quantifier.train.folds = cfg.folds;
  opt.quantifier.train.seed = cfg.seed;
  opt.quantifier.train.c_regularization = cfg.c_regularization;
  opt.quantifier.train.threads = cfg.threads;
  opt.fixed_epsilon = cfg.epsilon;
  return opt;
}

/// Loads the files named by the configuration and runs the grid.
inline report::QuantifierReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.methods.empty()) throw error("no methods requested");
  if (cfg.test_paths.empty()) throw error("no test sets given");
  if (cfg.epsilon && !(*cfg.epsilon > 0.0)) throw error("epsilon must be positive");
  ClassTask task{cfg.class_id.empty() ? default_class_id(cfg.train_path) : cfg.class_id,
                 io::load_dataset(cfg.train_path), {}};
  for (const auto& p : cfg.test_paths) task.tests.push_back({p, io::load_dataset(p)});
  return run_experiment(std::span<const ClassTask>(&task, 1), run_options_for(cfg));
}

// ---------------------------------------------------------------------------
// tpr / fpr invariance study

struct InvarianceRow {
  std::string dataset;
  double tpr_train = 0.0;  // cross-validated, averaged over classes
  double tpr_test = 0.0;   // measured, averaged over test sets
  std::optional<double> tpr_relative;  // (test - train) / train
  double fpr_train = 0.0;
  double fpr_test = 0.0;
  std::optional<double> fpr_relative;
  std::size_t tpr_test_sets = 0;  // test sets where the rate was defined
  std::size_t fpr_test_sets = 0;
};

inline InvarianceRow invariance_study(std::span<const ClassTask> tasks, const svm::TrainConfig& cfg,
                                      std::string dataset_name = "dataset") {
  if (tasks.empty()) throw error("invariance study: no classes");
  InvarianceRow row;
  row.dataset = std::move(dataset_name);
  double tpr_tr = 0, fpr_tr = 0, tpr_te = 0, fpr_te = 0;
  for (const auto& task : tasks) {
    const auto base = fit_baseline(task.train, cfg);
    tpr_tr += base.cv->tpr;
    fpr_tr += base.cv->fpr;
    for (const auto& ts : task.tests) {
      const auto xs = ts.data.vectors();
      std::vector<Label> pred;
      pred.reserve(xs.size());
      for (const auto& x : xs) pred.push_back(base.model.predict(x));
      const auto t = contingency(ts.data.labels(), pred);
      if (t.gold_positives() > 0) {
        tpr_te += static_cast<double>(t.tp) / static_cast<double>(t.gold_positives());
        ++row.tpr_test_sets;
      }
      if (t.gold_negatives() > 0) {
        fpr_te += static_cast<double>(t.fp) / static_cast<double>(t.gold_negatives());
        ++row.fpr_test_sets;
      }
    }
  }
  const auto nc = static_cast<double>(tasks.size());
  row.tpr_train = tpr_tr / nc;
  row.fpr_train = fpr_tr / nc;
  if (row.tpr_test_sets) row.tpr_test = tpr_te / static_cast<double>(row.tpr_test_sets);
  if (row.fpr_test_sets) row.fpr_test = fpr_te / static_cast<double>(row.fpr_test_sets);
  if (row.tpr_train > 0 && row.tpr_test_sets) row.tpr_relative = (row.tpr_test - row.tpr_train) / row.tpr_train;
  if (row.fpr_train > 0 && row.fpr_test_sets) row.fpr_relative = (row.fpr_test - row.fpr_train) / row.fpr_train;
  return row;
}

inline constexpr const char* kInvarianceHeader =
    "dataset\tavg(tpr_Tr)\tavg(tpr_Te)\trel_%_diff\tavg(fpr_Tr)\tavg(fpr_Te)\trel_%_diff";

inline std::string format_percent(const std::optional<double>& rel) {
  if (!rel) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.2f%%", 100.0 * *rel);
  return buf;
}

inline void write_invariance_tsv(std::ostream& out, std::span<const InvarianceRow> rows) {
  out << kInvarianceHeader << '\n';
  for (const auto& r : rows)
    out << r.dataset << '\t' << report::format_real(r.tpr_train) << '\t' << report::format_real(r.tpr_test)
        << '\t' << format_percent(r.tpr_relative) << '\t' << report::format_real(r.fpr_train) << '\t'
        << report::format_real(r.fpr_test) << '\t' << format_percent(r.fpr_relative) << '\n';
}

inline void write_invariance_json(std::ostream& out, std::span<const InvarianceRow> rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["dataset"] = r.dataset;
    j["avg_tpr_train"] = r.tpr_train;
    j["avg_tpr_test"] = r.tpr_test;
    j["tpr_relative_diff"] = r.tpr_relative ? nlohmann::ordered_json(*r.tpr_relative) : nlohmann::ordered_json();
    j["avg_fpr_train"] = r.fpr_train;
    j["avg_fpr_test"] = r.fpr_test;
    j["fpr_relative_diff"] = r.fpr_relative ? nlohmann::ordered_json(*r.fpr_relative) : nlohmann::ordered_json();
    j["tpr_test_sets"] = r.tpr_test_sets;
    j["fpr_test_sets"] = r.fpr_test_sets;
    arr.push_back(std::move(j));
  }
  out << arr.dump(2) << '\n';
}

}  // namespace quant
