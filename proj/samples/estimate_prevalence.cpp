// Trains a few quantifiers on a synthetic imbalanced task and estimates the
// positive prevalence of test sets drawn at other prevalences.

#include <cstdio>

#include "quant/quant.hpp"
#include "quant/synthetic.hpp"

int main() {
  const quant::synthetic::Generator gen({.dim = 20, .separation = 0.45, .noise = 1.0, .seed = 7});
  const auto train = gen.sample(1000, 0.08, 1);

  quant::QuantifierConfig cfg;
  cfg.train.folds = 10;
  const auto base = quant::fit_baseline(train, cfg.train);

  std::vector<quant::Quantifier> qs;
  for (auto m : {quant::Method::CC, quant::Method::ACC, quant::Method::PACC, quant::Method::MM_KS})
    qs.push_back(quant::Quantifier::from_baseline(m, base, cfg));
  qs.push_back(quant::Quantifier::fit(quant::Method::SVM_KLD, train, cfg));

  std::printf("%-8s", "true");
  for (const auto& q : qs) std::printf("%10s", std::string(quant::to_string(q.method())).c_str());
  std::printf("\n");
  for (double p : {0.02, 0.08, 0.20}) {
    const auto test = gen.sample(2000, p, 100 + static_cast<unsigned>(p * 100));
    const auto xs = test.vectors();
    std::printf("%-8.3f", p);
    for (const auto& q : qs) std::printf("%10.4f", q.estimate(xs).prevalence.value());
    std::printf("\n");
  }
}
