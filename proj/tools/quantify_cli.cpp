// Command-line front end: fit, quantify, experiment, invariance.
// Exit status: 0 success, 1 configuration error, 2 data error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "quant/quant.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kDataError = 2;

std::vector<quant::Method> parse_methods(const std::string& list) {
  std::vector<quant::Method> out;
  if (list == "all") return {quant::kAllMethods.begin(), quant::kAllMethods.end()};
  std::stringstream ss(list);
  for (std::string name; std::getline(ss, name, ',');) {
    if (name.empty()) continue;
    const auto m = quant::parse_method(name);
    if (!m) throw quant::error("unknown method '" + name + "'");
    if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
  }
  if (out.empty()) throw quant::error("no methods given");
  return out;
}

quant::report::Format parse_format(const std::string& f) {
  if (f == "tsv") return quant::report::Format::Tsv;
  if (f == "json") return quant::report::Format::Json;
  throw quant::error("unknown format '" + f + "'");
}

// Runs fn with the output stream named by path, or stdout when empty.
template <class Fn>
void with_output(const std::string& path, Fn fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw quant::data_error("cannot write " + path);
  fn(out);
}

quant::LabeledDataset load_training(const std::string& path) {
  auto data = quant::io::load_dataset(path);
  if (data.count(quant::Label::Positive) == 0 || data.count(quant::Label::Negative) == 0)
    throw quant::data_error(path + ": training set must contain both classes");
  return data;
}

struct Options {
  std::string train;
  std::vector<std::string> tests;
  std::string methods = "all";
  int folds = 50;
  std::optional<double> epsilon;
  std::uint64_t seed = 0;
  double c = 1.0;
  std::string format = "tsv";
  std::string out;
  std::string model;
  std::string name;
  unsigned threads = 0;
};

quant::svm::TrainConfig train_config(const Options& o) {
  if (o.folds < 2) throw quant::error("--folds must be at least 2");
  if (!(o.c > 0.0)) throw quant::error("--c must be positive");
  quant::svm::TrainConfig cfg;
  cfg.folds = o.folds;
  cfg.seed = o.seed;
  cfg.c_regularization = o.c;
  cfg.threads = o.threads;
  return cfg;
}

void cmd_fit(const Options& o) {
  const auto methods = parse_methods(o.methods);
  quant::QuantifierConfig qc;
  qc.train = train_config(o);
  const auto train = load_training(o.train);

  const bool any_baseline =
      std::any_of(methods.begin(), methods.end(), [](auto m) { return m != quant::Method::SVM_KLD; });
  const bool any_cv = std::any_of(methods.begin(), methods.end(), quant::needs_cv);
  std::optional<quant::BaselineFit> base;
  if (any_baseline) base = quant::fit_baseline(train, qc.train, any_cv);

  std::vector<quant::Quantifier> qs;
  for (auto m : methods)
    qs.push_back(m == quant::Method::SVM_KLD ? quant::Quantifier::fit(m, train, qc)
                                             : quant::Quantifier::from_baseline(m, *base, qc));
  with_output(o.out, [&](std::ostream& out) { quant::io::write_bundle(out, qs); });
}

void cmd_quantify(const Options& o) {
  const auto fmt = parse_format(o.format);
  const auto qs = quant::io::load_bundle(o.model);
  std::vector<std::pair<std::string, quant::LabeledDataset>> tests;
  for (const auto& p : o.tests) tests.emplace_back(p, quant::io::load_dataset(p));

  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  std::ostringstream tsv;
  tsv << "test_set\tmethod\ttest_size\test_prev\tdegenerate\n";
  for (const auto& [id, data] : tests) {
    const auto xs = data.vectors();
    for (const auto& q : qs) {
      const auto e = q.estimate(xs);
      tsv << id << '\t' << quant::to_string(q.method()) << '\t' << data.size() << '\t'
          << quant::report::format_real(e.prevalence.value()) << '\t' << (e.degenerate ? 1 : 0) << '\n';
      nlohmann::ordered_json j;
      j["test_set"] = id;
      j["method"] = quant::to_string(q.method());
      j["test_size"] = data.size();
      j["est_prev"] = e.prevalence.value();
      j["degenerate"] = e.degenerate;
      rows.push_back(std::move(j));
    }
  }
  with_output(o.out, [&](std::ostream& out) {
    if (fmt == quant::report::Format::Tsv)
      out << tsv.str();
    else
      out << rows.dump(2) << '\n';
  });
}

void cmd_experiment(const Options& o) {
  quant::ExperimentConfig cfg;
  cfg.class_id = o.name;
  cfg.train_path = o.train;
  cfg.test_paths = o.tests;
  cfg.methods = parse_methods(o.methods);
  cfg.folds = o.folds;
  cfg.c_regularization = o.c;
  cfg.epsilon = o.epsilon;
  cfg.seed = o.seed;
  cfg.output_path = o.out;
  cfg.output_format = parse_format(o.format);
  cfg.threads = o.threads;
  train_config(o);  // validates folds and C
  if (cfg.epsilon && !(*cfg.epsilon > 0.0)) throw quant::error("--epsilon must be positive");
  load_training(cfg.train_path);
  const auto rep = quant::run_experiment(cfg);
  with_output(o.out, [&](std::ostream& out) { quant::report::emit_report(out, rep, cfg.output_format); });
  for (const auto& f : rep.failures)
    std::cerr << "warning: " << f.class_id << " " << quant::to_string(f.method) << ": " << f.message << '\n';
}

void cmd_invariance(const Options& o) {
  const auto fmt = parse_format(o.format);
  const auto cfg = train_config(o);
  quant::ClassTask task{o.train, load_training(o.train), {}};
  for (const auto& p : o.tests) task.tests.push_back({p, quant::io::load_dataset(p)});
  const auto name = o.name.empty() ? quant::default_class_id(o.train) : o.name;
  const std::vector<quant::InvarianceRow> rows{
      quant::invariance_study(std::span<const quant::ClassTask>(&task, 1), cfg, name)};
  with_output(o.out, [&](std::ostream& out) {
    if (fmt == quant::report::Format::Tsv)
      quant::write_invariance_tsv(out, rows);
    else
      quant::write_invariance_json(out, rows);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supervised prevalence estimation"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--folds", o.folds, "Cross-validation folds")->capture_default_str();
    sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    sub->add_option("--c", o.c, "Per-example regularization constant C")->capture_default_str();
    sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
    sub->add_option("--out", o.out, "Output file (default stdout)");
  };

  auto* fit = app.add_subcommand("fit", "Fit quantifiers and save them as a bundle");
  fit->add_option("--train", o.train, "Training set")->required();
  fit->add_option("--methods", o.methods, "Comma-separated methods or 'all'")->capture_default_str();
  add_common(fit);

  auto* quantify = app.add_subcommand("quantify", "Estimate prevalence with a saved bundle");
  quantify->add_option("--model", o.model, "Bundle written by fit")->required();
  quantify->add_option("--test", o.tests, "Test set (repeatable)")->required();
  quantify->add_option("--format", o.format, "tsv or json")->capture_default_str();
  quantify->add_option("--out", o.out, "Output file (default stdout)");

  auto* experiment = app.add_subcommand("experiment", "Fit, estimate and score a method grid");
  experiment->add_option("--train", o.train, "Training set")->required();
  experiment->add_option("--test", o.tests, "Test set (repeatable)")->required();
  experiment->add_option("--methods", o.methods, "Comma-separated methods or 'all'")->capture_default_str();
  experiment->add_option("--epsilon", o.epsilon, "Fixed smoothing constant (default 1/(2|Te|))");
  experiment->add_option("--format", o.format, "tsv or json")->capture_default_str();
  experiment->add_option("--class-id", o.name, "Class name in the report (default train file name)");
  add_common(experiment);

  auto* invariance = app.add_subcommand("invariance", "Compare cross-validated and test-set tpr/fpr");
  invariance->add_option("--train", o.train, "Training set")->required();
  invariance->add_option("--test", o.tests, "Test set (repeatable)")->required();
  invariance->add_option("--format", o.format, "tsv or json")->capture_default_str();
  invariance->add_option("--name", o.name, "Dataset name in the table");
  add_common(invariance);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (fit->parsed()) cmd_fit(o);
    if (quantify->parsed()) cmd_quantify(o);
    if (experiment->parsed()) cmd_experiment(o);
    if (invariance->parsed()) cmd_invariance(o);
  } catch (const quant::data_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return 0;
}
