#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

namespace affectlab::learn {

struct ElmConfig {
  int hidden = 500;
  double ridge = 1e-3;
  std::uint64_t seed = 0;
};

// Single hidden layer, sigmoid activation, random fixed input weights in
// [-1, 1], output weights by ridge least squares on one-hot targets.
struct ElmModel {
  Eigen::MatrixXd input_weights;   // H x d
  Eigen::VectorXd biases;          // H
  Eigen::MatrixXd output_weights;  // H x classes

  int classes() const { return static_cast<int>(output_weights.cols()); }
  int hidden() const { return static_cast<int>(input_weights.rows()); }

  Eigen::MatrixXd hidden_activations(const Eigen::MatrixXd& X) const;  // n x H
  Eigen::VectorXd scores(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd scores(const Eigen::MatrixXd& X) const;
  // argmax, ties to the lowest class index.
  int predict(const Eigen::VectorXd& x) const;
  std::vector<int> predict(const Eigen::MatrixXd& X) const;
};

struct ElmPrediction {
  int label;
  Eigen::VectorXd scores;
};

// labels in [0, classes). At least two distinct labels must be present.
ElmModel elm_train(const Eigen::MatrixXd& X, const std::vector<int>& labels, int classes, const ElmConfig& cfg);
ElmPrediction elm_predict(const ElmModel& m, const Eigen::VectorXd& x);

int argmax_lowest(const Eigen::VectorXd& v);

// Picks the hidden size from `grid` by accuracy on a seeded 80/20 holdout
// of the training set (ties to the smaller size). Falls back to cfg.hidden
// when the holdout cannot contain two classes.
int elm_select_hidden(const Eigen::MatrixXd& X, const std::vector<int>& labels, int classes, const ElmConfig& cfg,
                      const std::vector<int>& grid);

void save_elm(const ElmModel& m, const std::filesystem::path& path);
ElmModel load_elm(const std::filesystem::path& path);

}  // namespace affectlab::learn
