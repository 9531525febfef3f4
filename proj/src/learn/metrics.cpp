#include "affectlab/learn/metrics.hpp"

#include "affectlab/core/error.hpp"

namespace affectlab::learn {

double macro_f1(const Eigen::MatrixXi& confusion) {
  const Eigen::Index k = confusion.rows();
  double sum = 0.0;
  for (Eigen::Index c = 0; c < k; ++c) {
    const double tp = confusion(c, c);
    const double fn = confusion.row(c).sum() - tp;
    const double fp = confusion.col(c).sum() - tp;
    const double denom = 2.0 * tp + fp + fn;
    if (denom > 0) sum += 2.0 * tp / denom;
  }
  return sum / static_cast<double>(k);
}

EvalReport metrics(const std::vector<int>& preds, const std::vector<int>& truth, int classes) {
  if (preds.empty()) throw Error("metrics: empty input");
  if (preds.size() != truth.size()) throw Error("metrics: prediction/truth length mismatch");
  if (classes < 2) throw Error("metrics: need at least 2 classes");
  EvalReport r;
  r.classes = classes;
  r.confusion = Eigen::MatrixXi::Zero(classes, classes);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] < 0 || preds[i] >= classes || truth[i] < 0 || truth[i] >= classes)
      throw Error("metrics: label out of range");
    ++r.confusion(truth[i], preds[i]);
  }
  r.accuracy = 100.0 * r.confusion.trace() / static_cast<double>(preds.size());
  r.macro_f1 = macro_f1(r.confusion);
  return r;
}

}  // namespace affectlab::learn
