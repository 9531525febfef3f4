#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace affectlab::learn {

struct FoldResult {
  std::string name;
  std::size_t n_test = 0;
  double accuracy = 0.0;  // percent
  double macro_f1 = 0.0;
};

struct EvalReport {
  int classes = 0;
  double accuracy = 0.0;  // percent, pooled over all predictions
  double macro_f1 = 0.0;
  Eigen::MatrixXi confusion;  // rows = truth, cols = prediction
  std::vector<FoldResult> per_fold;
  // Spread over folds/resamples; zero for single-fold reports.
  double accuracy_std = 0.0;
  double macro_f1_std = 0.0;
};

// Per-class F1 that is undefined (no true and no predicted members) counts
// as 0 in the macro mean.
EvalReport metrics(const std::vector<int>& preds, const std::vector<int>& truth, int classes);
double macro_f1(const Eigen::MatrixXi& confusion);

}  // namespace affectlab::learn
