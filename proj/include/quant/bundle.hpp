#pragma once

// Fitted quantifiers saved as JSON so that `fit` and `quantify` can run as
// separate steps. A bundle holds one entry per method; baselines sharing a
// classifier repeat its weights. Doubles are written with enough digits to
// read back exactly.

#include <nlohmann/json.hpp>

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "quant/quantifiers.hpp"

namespace quant::io {

namespace detail {

inline nlohmann::json model_to_json(const LinearModel& m) {
  return {{"weights", m.weights}, {"intercept", m.intercept}};
}

inline LinearModel model_from_json(const nlohmann::json& j) {
  LinearModel m;
  m.weights = j.at("weights").get<std::vector<double>>();
  m.intercept = j.at("intercept").get<double>();
  return m;
}

inline nlohmann::json cv_to_json(const svm::CvEstimates& cv) {
  return {{"tpr", cv.tpr},
          {"fpr", cv.fpr},
          {"expected_tpr", cv.expected_tpr},
          {"expected_fpr", cv.expected_fpr},
          {"calibrator", {{"slope", cv.calibrator.slope}, {"intercept", cv.calibrator.intercept}}},
          {"folds_used", cv.folds_used},
          {"folds_reduced", cv.folds_reduced},
          {"pos_scores", cv.pos_scores},
          {"neg_scores", cv.neg_scores}};
}

inline svm::CvEstimates cv_from_json(const nlohmann::json& j) {
  svm::CvEstimates cv;
  cv.tpr = j.at("tpr").get<double>();
  cv.fpr = j.at("fpr").get<double>();
  cv.expected_tpr = j.at("expected_tpr").get<double>();
  cv.expected_fpr = j.at("expected_fpr").get<double>();
  cv.calibrator.slope = j.at("calibrator").at("slope").get<double>();
  cv.calibrator.intercept = j.at("calibrator").at("intercept").get<double>();
  cv.folds_used = j.at("folds_used").get<int>();
  cv.folds_reduced = j.at("folds_reduced").get<bool>();
  cv.pos_scores = j.at("pos_scores").get<std::vector<double>>();
  cv.neg_scores = j.at("neg_scores").get<std::vector<double>>();
  return cv;
}

}  // namespace detail

inline void write_bundle(std::ostream& out, const std::vector<Quantifier>& qs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& q : qs) {
    nlohmann::json j;
    j["method"] = to_string(q.method());
    j["grid_step"] = q.config().mixture.grid_step;
    j["model"] = detail::model_to_json(q.model());
    if (q.cv()) j["cv"] = detail::cv_to_json(*q.cv());
    arr.push_back(std::move(j));
  }
  out << nlohmann::json{{"quantifiers", std::move(arr)}}.dump() << '\n';
}

inline std::vector<Quantifier> read_bundle(std::istream& in, const std::string& source = "<bundle>") {
  std::vector<Quantifier> qs;
  try {
    const auto doc = nlohmann::json::parse(in);
    for (const auto& j : doc.at("quantifiers")) {
      const auto name = j.at("method").get<std::string>();
      const auto m = parse_method(name);
      if (!m) throw data_error(source + ": unknown method " + name);
      QuantifierConfig cfg;
      cfg.mixture.grid_step = j.at("grid_step").get<double>();
      std::optional<svm::CvEstimates> cv;
      if (j.contains("cv")) cv = detail::cv_from_json(j.at("cv"));
      qs.push_back(Quantifier::restore(*m, detail::model_from_json(j.at("model")), std::move(cv), cfg));
    }
  } catch (const nlohmann::json::exception& e) {
    throw data_error(source + ": " + e.what());
  } catch (const data_error&) {
    throw;
  } catch (const error& e) {
    throw data_error(source + ": " + e.what());
  }
  return qs;
}

inline void save_bundle(const std::string& path, const std::vector<Quantifier>& qs) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path);
  write_bundle(out, qs);
}

inline std::vector<Quantifier> load_bundle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path);
  return read_bundle(in, path);
}

}  // namespace quant::io
