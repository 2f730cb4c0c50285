#include "epigraph/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "epigraph/error.hpp"
#include "json.hpp"

namespace epigraph::nn {

namespace {

constexpr int kModelFormat = 1;

Eigen::MatrixXd relu_gate(const Eigen::MatrixXd& pre) {
  return (pre.array() > 0.0).cast<double>().matrix();
}

void require_both_classes(const Dataset& ds, std::string_view what) {
  bool pos = false, neg = false;
  for (const Example& e : ds) (e.label ? pos : neg) = true;
  if (!pos || !neg) throw ConfigError(fmt::format("{} must contain both classes", what));
}

Eigen::MatrixXd stack_inputs(const Dataset& ds, int input_size) {
  Eigen::MatrixXd x(input_size, static_cast<Eigen::Index>(ds.size()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds[i].x.size() != input_size) {
      throw ShapeError(fmt::format("example '{}' has {} features, network expects {}", ds[i].id,
                                   ds[i].x.size(), input_size));
    }
    x.col(static_cast<Eigen::Index>(i)) = ds[i].x;
  }
  return x;
}

}  // namespace

double relu(double x) { return std::isnan(x) || x > 0 ? x : 0.0; }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double bce_from_logit(double z, double target) {
  // -[t log s(z) + (1 - t) log(1 - s(z))] = max(z, 0) - z t + log(1 + e^{-|z|})
  return std::max(z, 0.0) - z * target + std::log1p(std::exp(-std::abs(z)));
}

void validate_architecture(const std::vector<int>& layers) {
  if (layers.size() < 3) {
    throw ConfigError(fmt::format("architecture needs input, hidden and output layers; got {} layers",
                                  layers.size()));
  }
  for (int n : layers) {
    if (n < 1) throw ConfigError("layer sizes must be positive");
  }
  if (layers.back() != 1) {
    throw ConfigError(fmt::format("output layer must have 1 unit, got {}", layers.back()));
  }
}

void Network::check_shapes() const {
  validate_architecture(layers);
  const std::size_t n = layers.size() - 1;
  if (weights.size() != n || biases.size() != n) {
    throw ShapeError(fmt::format("{} layers need {} weight matrices and bias vectors, got {} and {}",
                                 layers.size(), n, weights.size(), biases.size()));
  }
  for (std::size_t l = 0; l < n; ++l) {
    if (weights[l].rows() != layers[l + 1] || weights[l].cols() != layers[l]) {
      throw ShapeError(fmt::format("weight matrix {} is {}x{}, expected {}x{}", l, weights[l].rows(),
                                   weights[l].cols(), layers[l + 1], layers[l]));
    }
    if (biases[l].size() != layers[l + 1]) {
      throw ShapeError(fmt::format("bias vector {} has {} entries, expected {}", l, biases[l].size(),
                                   layers[l + 1]));
    }
  }
}

double Network::predict(const Eigen::VectorXd& x) const { return forward(*this, x).output(); }

void validate(const TrainConfig& cfg) {
  if (cfg.iterations < 1) throw ConfigError("iterations must be >= 1");
  if (!(cfg.learning_rate >= 0) || !std::isfinite(cfg.learning_rate)) {
    throw ConfigError("learning_rate must be finite and non-negative");
  }
  if (!(cfg.split_ratio > 0 && cfg.split_ratio < 1)) {
    throw ConfigError(fmt::format("split_ratio must be in (0, 1), got {}", cfg.split_ratio));
  }
}

std::string_view to_string(InitMode m) {
  return m == InitMode::Constant09 ? "constant_0_9" : "seeded_uniform";
}

InitMode parse_init_mode(std::string_view s) {
  if (s == "constant_0_9") return InitMode::Constant09;
  if (s == "seeded_uniform") return InitMode::SeededUniform;
  throw ConfigError(fmt::format("unknown init mode '{}' (constant_0_9 or seeded_uniform)", s));
}

Network init_network(const std::vector<int>& layers, const TrainConfig& cfg) {
  validate_architecture(layers);
  Network net;
  net.layers = layers;
  std::mt19937_64 rng(cfg.seed);
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    const int fan_in = layers[l], fan_out = layers[l + 1];
    Eigen::MatrixXd w(fan_out, fan_in);
    if (cfg.init == InitMode::Constant09) {
      w.setConstant(0.9);
    } else {
      const double s = std::sqrt(6.0 / (fan_in + fan_out));
      std::uniform_real_distribution<double> u(-s, s);
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = u(rng);
      }
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return net;
}

ForwardPass forward(const Network& net, const Eigen::VectorXd& x) {
  net.check_shapes();
  if (x.size() != net.input_size()) {
    throw ShapeError(fmt::format("input has {} values, network expects {}", x.size(),
                                 net.input_size()));
  }
  ForwardPass pass;
  pass.activations.push_back(x);
  const std::size_t n = net.weights.size();
  for (std::size_t l = 0; l < n; ++l) {
    Eigen::VectorXd z = net.weights[l] * pass.activations.back() + net.biases[l];
    Eigen::VectorXd a = (l + 1 == n) ? Eigen::VectorXd::Constant(1, sigmoid(z(0)))
                                     : Eigen::VectorXd(z.unaryExpr(&relu));
    pass.pre.push_back(std::move(z));
    pass.activations.push_back(std::move(a));
  }
  return pass;
}

Gradients backward(const Network& net, const ForwardPass& pass, double target) {
  net.check_shapes();
  const std::size_t n = net.weights.size();
  if (pass.pre.size() != n || pass.activations.size() != n + 1) {
    throw ShapeError("forward pass does not match the network depth");
  }
  Gradients g;
  g.weights.resize(n);
  g.biases.resize(n);
  // dL/dz at the sigmoid output of binary cross-entropy.
  Eigen::VectorXd delta = Eigen::VectorXd::Constant(1, pass.output() - target);
  for (std::size_t l = n; l-- > 0;) {
    g.weights[l] = delta * pass.activations[l].transpose();
    g.biases[l] = delta;
    if (l > 0) {
      Eigen::VectorXd back = net.weights[l].transpose() * delta;
      delta = back.cwiseProduct(relu_gate(pass.pre[l - 1]));
    }
  }
  return g;
}

BatchEvaluation batch_gradients(const Network& net, const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& targets) {
  net.check_shapes();
  if (x.rows() != net.input_size()) {
    throw ShapeError(fmt::format("batch has {} features, network expects {}", x.rows(),
                                 net.input_size()));
  }
  if (x.cols() != targets.size() || x.cols() == 0) {
    throw ShapeError(fmt::format("batch has {} samples but {} targets", x.cols(), targets.size()));
  }
  const std::size_t n = net.weights.size();
  const double count = static_cast<double>(x.cols());

  std::vector<Eigen::MatrixXd> pre(n), act(n + 1);
  act[0] = x;
  for (std::size_t l = 0; l < n; ++l) {
    pre[l] = (net.weights[l] * act[l]).colwise() + net.biases[l];
    act[l + 1] = (l + 1 == n) ? Eigen::MatrixXd(pre[l].unaryExpr(&sigmoid))
                              : Eigen::MatrixXd(pre[l].unaryExpr(&relu));
  }

  BatchEvaluation out;
  for (Eigen::Index i = 0; i < x.cols(); ++i) out.cost += bce_from_logit(pre[n - 1](0, i), targets(i));
  out.cost /= count;

  out.gradients.weights.resize(n);
  out.gradients.biases.resize(n);
  Eigen::MatrixXd delta = (act[n] - targets.transpose()) / count;
  for (std::size_t l = n; l-- > 0;) {
    out.gradients.weights[l] = delta * act[l].transpose();
    out.gradients.biases[l] = delta.rowwise().sum();
    if (l > 0) delta = (net.weights[l].transpose() * delta).cwiseProduct(relu_gate(pre[l - 1]));
  }
  return out;
}

DatasetSplit split_dataset(const Dataset& ds, double ratio, std::uint64_t seed) {
  if (ds.size() < 2) throw ConfigError(fmt::format("cannot split {} samples; need at least 2", ds.size()));
  if (!(ratio > 0 && ratio < 1)) throw ConfigError("split ratio must be in (0, 1)");
  require_both_classes(ds, "dataset");

  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n = static_cast<long>(ds.size());
  const long n_train = std::clamp(std::lround(ratio * static_cast<double>(n)), 1L, n - 1);
  DatasetSplit split;
  for (long i = 0; i < n; ++i) (i < n_train ? split.train : split.test).push_back(ds[order[i]]);

  auto warn_if_single_class = [&](const Dataset& part, std::string_view name) {
    bool pos = false, neg = false;
    for (const Example& e : part) (e.label ? pos : neg) = true;
    if (!pos || !neg) split.warnings.push_back(fmt::format("{} split holds only one class", name));
  };
  warn_if_single_class(split.train, "train");
  warn_if_single_class(split.test, "test");
  return split;
}

Evaluation evaluate(const TrainedModel& model, const Dataset& ds) {
  if (ds.empty()) throw ConfigError("cannot evaluate on an empty dataset");
  Evaluation ev;
  for (const Example& e : ds) {
    const bool valid = model.predict(e.x) >= kDecisionThreshold;
    if (valid && e.label) ++ev.true_positive;
    else if (!valid && !e.label) ++ev.true_negative;
    else if (valid) ++ev.false_positive;
    else ++ev.false_negative;
  }
  ev.accuracy = static_cast<double>(ev.true_positive + ev.true_negative) / ev.total();
  return ev;
}

TrainResult train(Network net, const Dataset& train_set, const TrainConfig& cfg,
                  const Dataset& test_set) {
  validate(cfg);
  net.check_shapes();
  if (train_set.empty()) throw ConfigError("training set is empty");
  require_both_classes(train_set, "training set");

  const Eigen::MatrixXd x = stack_inputs(train_set, net.input_size());
  Eigen::VectorXd y(static_cast<Eigen::Index>(train_set.size()));
  for (std::size_t i = 0; i < train_set.size(); ++i) y(static_cast<Eigen::Index>(i)) = train_set[i].label;

  TrainResult result;
  result.report.cost_per_iteration.reserve(static_cast<std::size_t>(cfg.iterations));
  for (int it = 0; it < cfg.iterations; ++it) {
    BatchEvaluation step = batch_gradients(net, x, y);
    if (!std::isfinite(step.cost)) {
      throw DivergenceError(fmt::format("divergence: cost became {} at iteration {}", step.cost, it),
                            it);
    }
    result.report.cost_per_iteration.push_back(step.cost);
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      net.weights[l] -= cfg.learning_rate * step.gradients.weights[l];
      net.biases[l] -= cfg.learning_rate * step.gradients.biases[l];
    }
  }
  result.report.train_accuracy = evaluate(net, train_set).accuracy;
  if (!test_set.empty()) result.report.test_accuracy = evaluate(net, test_set).accuracy;
  result.model = std::move(net);
  return result;
}

std::string model_json(const TrainedModel& model) {
  model.check_shapes();
  auto join = [](auto&& values) {
    std::string s;
    for (double v : values) s += (s.empty() ? "" : ",") + fmt::format("{:.17g}", v);
    return s;
  };
  std::string layers;
  for (int n : model.layers) layers += (layers.empty() ? "" : ",") + std::to_string(n);

  std::string out = fmt::format("{{\"format\":{},\"layers\":[{}],\"weights\":[", kModelFormat, layers);
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    const Eigen::MatrixXd& w = model.weights[l];
    std::vector<double> row_major;
    row_major.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) row_major.push_back(w(r, c));
    }
    out += (l ? ",[" : "[") + join(row_major) + "]";
  }
  out += "],\"biases\":[";
  for (std::size_t l = 0; l < model.biases.size(); ++l) {
    const Eigen::VectorXd& b = model.biases[l];
    out += (l ? ",[" : "[") + join(std::vector<double>(b.data(), b.data() + b.size())) + "]";
  }
  out += "]}\n";
  return out;
}

TrainedModel parse_model_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  }
  TrainedModel m;
  try {
    const int format = j.at("format").get<int>();
    if (format != kModelFormat) {
      throw VersionError(fmt::format("model format {} is not supported (this build reads format {})",
                                     format, kModelFormat));
    }
    m.layers = j.at("layers").get<std::vector<int>>();
    validate_architecture(m.layers);
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (weights.size() + 1 != m.layers.size() || biases.size() + 1 != m.layers.size()) {
      throw FormatError("model file: weights/biases do not match the layer list");
    }
    for (std::size_t l = 0; l + 1 < m.layers.size(); ++l) {
      const auto flat = weights[l].get<std::vector<double>>();
      const int rows = m.layers[l + 1], cols = m.layers[l];
      if (flat.size() != static_cast<std::size_t>(rows) * cols) {
        throw FormatError(fmt::format("model file: weight array {} has {} values, expected {}", l,
                                      flat.size(), static_cast<std::size_t>(rows) * cols));
      }
      Eigen::MatrixXd w(rows, cols);
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) w(r, c) = flat[static_cast<std::size_t>(r) * cols + c];
      }
      m.weights.push_back(std::move(w));
      const auto b = biases[l].get<std::vector<double>>();
      if (b.size() != static_cast<std::size_t>(rows)) {
        throw FormatError(fmt::format("model file: bias array {} has {} values, expected {}", l,
                                      b.size(), rows));
      }
      m.biases.push_back(Eigen::Map<const Eigen::VectorXd>(b.data(), rows));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  }
  m.check_shapes();
  return m;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out << model_json(model);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model_json(ss.str());
}

void write_curve_csv(std::ostream& out, const TrainingReport& report) {
  out << "iteration,cost\n";
  for (std::size_t i = 0; i < report.cost_per_iteration.size(); ++i) {
    out << fmt::format("{},{:.17g}\n", i, report.cost_per_iteration[i]);
  }
}

}  // namespace epigraph::nn
