#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace epigraph::nn {

double relu(double x);
double sigmoid(double z);

/// Fully connected ReLU network with a single sigmoid output.
/// weights[l] is fan_out x fan_in and maps layer l to layer l + 1.
struct Network {
  std::vector<int> layers;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  int input_size() const { return layers.front(); }
  /// Throws ShapeError when weights/biases do not chain with `layers`.
  void check_shapes() const;
  /// Sigmoid output for one input vector.
  double predict(const Eigen::VectorXd& x) const;
};

using TrainedModel = Network;

/// At least one hidden layer, all sizes positive, one output unit.
void validate_architecture(const std::vector<int>& layers);

enum class InitMode { Constant09, SeededUniform };

struct TrainConfig {
  int iterations = 2000;
  double learning_rate = 0.01;
  InitMode init = InitMode::SeededUniform;
  std::uint64_t seed = 42;
  double split_ratio = 0.8;
};

void validate(const TrainConfig& cfg);

std::string_view to_string(InitMode m);
InitMode parse_init_mode(std::string_view s);

/// Constant09: every weight 0.9. SeededUniform: U[-s, s] with
/// s = sqrt(6 / (fan_in + fan_out)). Biases start at zero in both modes.
Network init_network(const std::vector<int>& layers, const TrainConfig& cfg);

/// Pre-activations and activations of every layer; activations[0] is the input.
struct ForwardPass {
  std::vector<Eigen::VectorXd> pre;
  std::vector<Eigen::VectorXd> activations;

  double output() const { return activations.back()(0); }
  double logit() const { return pre.back()(0); }
};

ForwardPass forward(const Network& net, const Eigen::VectorXd& x);

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Binary cross-entropy of a sigmoid output given its logit; stable for large |z|.
double bce_from_logit(double z, double target);

/// Exact gradients of the binary cross-entropy of one sample.
Gradients backward(const Network& net, const ForwardPass& pass, double target);

/// Mean cost and mean gradients over a batch; samples are the columns of x.
struct BatchEvaluation {
  double cost = 0;
  Gradients gradients;
};
BatchEvaluation batch_gradients(const Network& net, const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& targets);

struct Example {
  std::string id;
  Eigen::VectorXd x;
  int label = 0;  // 1 = valid character
};

using Dataset = std::vector<Example>;

struct DatasetSplit {
  Dataset train;
  Dataset test;
  std::vector<std::string> warnings;
};

/// Deterministic shuffled split with |train| = round(ratio * N), kept in [1, N - 1].
DatasetSplit split_dataset(const Dataset& ds, double ratio, std::uint64_t seed);

struct TrainingReport {
  std::vector<double> cost_per_iteration;
  double train_accuracy = 0;
  std::optional<double> test_accuracy;
};

struct TrainResult {
  TrainedModel model;
  TrainingReport report;
};

/// Full-batch gradient descent. Records the mean cost before every update.
/// Throws DivergenceError when the cost stops being finite.
TrainResult train(Network net, const Dataset& train_set, const TrainConfig& cfg,
                  const Dataset& test_set = {});

struct Evaluation {
  double accuracy = 0;
  int true_positive = 0;
  int true_negative = 0;
  int false_positive = 0;
  int false_negative = 0;
  int total() const { return true_positive + true_negative + false_positive + false_negative; }
};

inline constexpr double kDecisionThreshold = 0.5;

Evaluation evaluate(const TrainedModel& model, const Dataset& ds);

std::string model_json(const TrainedModel& model);
TrainedModel parse_model_json(std::string_view text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

/// "iteration,cost"
void write_curve_csv(std::ostream& out, const TrainingReport& report);

}  // namespace epigraph::nn
