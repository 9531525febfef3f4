#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

namespace affectlab::learn {

// A sequence is a [features x timesteps] matrix.
using Sequence = Eigen::MatrixXd;

struct LstmConfig {
  std::vector<int> layers{200, 100};
  double learning_rate = 0.01;
  double momentum = 0.9;
  int epochs = 300;
  int batch_size = 16;
  double clip_norm = 5.0;
  // Early stopping on a seeded validation split; patience <= 0 or a zero
  // fraction disables it.
  int patience = 30;
  double validation_fraction = 0.1;
  std::uint64_t seed = 0;
};

// Stacked LSTM (gates i, f, g, o), softmax head on the top layer's last
// hidden state. All weights live in one flat vector so the optimizer and
// the gradient check see a single parameter space.
class LstmModel {
 public:
  LstmModel() = default;
  LstmModel(int input_dim, std::vector<int> layers, int classes, std::uint64_t seed);

  int input_dim() const { return input_dim_; }
  int classes() const { return classes_; }
  const std::vector<int>& layers() const { return layers_; }

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  // Class probabilities for one sequence.
  Eigen::VectorXd probabilities(const Sequence& seq) const;
  int predict(const Sequence& seq) const;

  // Mean cross-entropy over the batch. If grad is non-null it receives
  // d(loss)/d(params). All sequences must share one length.
  double loss(const std::vector<const Sequence*>& batch, const std::vector<int>& labels,
              Eigen::VectorXd* grad = nullptr) const;

 private:
  struct Offsets {
    Eigen::Index W, U, b;
  };
  Eigen::Index layer_in(std::size_t l) const;
  void build_offsets();

  int input_dim_ = 0;
  int classes_ = 0;
  std::vector<int> layers_;
  std::vector<Offsets> off_;
  Eigen::Index head_V_ = 0, head_c_ = 0;
  Eigen::VectorXd params_;
};

struct LstmTrainResult {
  LstmModel model;
  std::vector<double> train_loss;
  std::vector<double> val_loss;  // empty without a validation split
  int best_epoch = 0;
};

// labels in [0, classes). Ragged lengths and non-finite losses throw.
LstmTrainResult lstm_train(const std::vector<Sequence>& sequences, const std::vector<int>& labels, int classes,
                           const LstmConfig& cfg);

void write_loss_curve(const std::filesystem::path& path, const LstmTrainResult& r);

void save_lstm(const LstmModel& m, const std::filesystem::path& path);
LstmModel load_lstm(const std::filesystem::path& path);

}  // namespace affectlab::learn
