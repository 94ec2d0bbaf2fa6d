#pragma once

// Synthetic binary tasks with Gaussian class-conditional features, for
// benchmarks and tests. Prevalence drift changes only the class mix, which
// leaves p(x|y) fixed; `positive_shift` moves the positive class-conditional
// to simulate drift in p(x|y) as well.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "quant/core.hpp"

namespace quant::synthetic {

struct GaussianTask {
  std::size_t dim = 20;
  double separation = 1.0;  // distance between the class means
  double noise = 0.5;       // per-coordinate std. deviation, scaled by 1/sqrt(dim)
  std::uint64_t seed = 1;   // fixes the direction of the class means
};

class Generator {
 public:
  explicit Generator(GaussianTask task) : task_(task), direction_(task.dim) {
    std::mt19937_64 rng(task.seed);
    std::normal_distribution<double> z(0.0, 1.0);
    double norm = 0.0;
    for (auto& v : direction_) {
      v = z(rng);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (auto& v : direction_) v /= norm;
  }

  const GaussianTask& task() const noexcept { return task_; }

  /// n examples with exactly round(prevalence * n) positives, in shuffled
  /// order. positive_shift scales the offset of the positive mean (1 = no
  /// change in p(x|y); smaller values move positives toward negatives).
  LabeledDataset sample(std::size_t n, double prevalence, std::uint64_t seed,
                        double positive_shift = 1.0) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, task_.noise / std::sqrt(static_cast<double>(task_.dim)));
    const auto n_pos = static_cast<std::size_t>(std::llround(prevalence * static_cast<double>(n)));
    std::vector<Label> labels(n, Label::Negative);
    for (std::size_t i = 0; i < n_pos && i < n; ++i) labels[i] = Label::Positive;
    std::shuffle(labels.begin(), labels.end(), rng);

    std::vector<Example> out;
    out.reserve(n);
    for (auto y : labels) {
      const double offset = y == Label::Positive ? 0.5 * task_.separation * positive_shift
                                                 : -0.5 * task_.separation;
      std::vector<SparseEntry> entries;
      entries.reserve(task_.dim);
      for (std::size_t d = 0; d < task_.dim; ++d)
        entries.push_back({static_cast<std::uint32_t>(d), offset * direction_[d] + z(rng)});
      out.push_back({SparseVector(std::move(entries)), y});
    }
    return LabeledDataset(std::move(out), task_.dim);
  }

 private:
  GaussianTask task_;
  std::vector<double> direction_;
};

}  // namespace quant::synthetic
