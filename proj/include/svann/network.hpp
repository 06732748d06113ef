// Dense feed-forward scalar networks built on the autodiff tape, plus a
// plain SGD trainer. Two evaluation routes exist on purpose: predict() is a
// direct Eigen evaluation for bulk inference, and build_network_graph()
// emits the same computation as a tape subgraph so gradients are available
// for every weight and input. The two routes agree exactly and the tests
// hold them to that.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "svann/autodiff.hpp"
#include "svann/random.hpp"

namespace svann::nn {

enum class Activation : std::uint8_t { sigmoid, tanh, linear };

inline const char* activation_name(Activation a) {
  switch (a) {
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::linear: return "linear";
  }
  return "?";
}

inline Activation activation_from_name(const std::string& name) {
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  if (name == "linear") return Activation::linear;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

struct Architecture {
  std::vector<int> layer_sizes;          // input .. output
  std::vector<Activation> activations;   // one per non-input layer

  void validate() const {
    if (layer_sizes.size() < 2)
      throw std::invalid_argument("architecture needs at least 2 layers");
    for (int s : layer_sizes)
      if (s < 1) throw std::invalid_argument("layer sizes must be positive");
    if (activations.size() != layer_sizes.size() - 1)
      throw std::invalid_argument("need one activation per non-input layer");
  }
  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  bool operator==(const Architecture&) const = default;
};

/// Convenience: hidden layers all `hidden_act`, linear-or-given output.
inline Architecture make_architecture(std::vector<int> sizes, Activation hidden_act,
                                      Activation output_act) {
  Architecture arch;
  arch.layer_sizes = std::move(sizes);
  for (std::size_t i = 0; i + 2 < arch.layer_sizes.size(); ++i)
    arch.activations.push_back(hidden_act);
  arch.activations.push_back(output_act);
  arch.validate();
  return arch;
}

struct Network {
  Architecture arch;
  std::vector<Eigen::MatrixXd> weights;  // per layer, (out x in)
  std::vector<Eigen::VectorXd> biases;   // per layer, empty when use_bias off
  bool use_bias = false;
  std::uint64_t seed = 0;

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
    for (const auto& b : biases) n += static_cast<std::size_t>(b.size());
    return n;
  }
};

struct InitScheme {
  enum class Kind { constant, uniform } kind = Kind::constant;
  double value = 0.5;  // constant
  double lo = -0.5, hi = 0.5;

  static InitScheme constant(double c) { return {Kind::constant, c, 0, 0}; }
  static InitScheme uniform(double lo, double hi) {
    if (lo >= hi) throw std::invalid_argument("uniform init needs lo < hi");
    return {Kind::uniform, 0, lo, hi};
  }
};

/// Seeded deterministic initialization. Draw order is fixed: layer by
/// layer, weights row-major (out, then in), then that layer's bias.
inline Network init_network(const Architecture& arch, const InitScheme& scheme,
                            std::uint64_t seed, bool use_bias = false) {
  arch.validate();
  Network net;
  net.arch = arch;
  net.use_bias = use_bias;
  net.seed = seed;
  SplitMix64 rng(seed);
  auto draw = [&]() {
    return scheme.kind == InitScheme::Kind::constant ? scheme.value
                                                     : rng.next_double(scheme.lo, scheme.hi);
  };
  for (std::size_t l = 0; l + 1 < arch.layer_sizes.size(); ++l) {
    const int in = arch.layer_sizes[l];
    const int out = arch.layer_sizes[l + 1];
    Eigen::MatrixXd w(out, in);
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) w(r, c) = draw();
    net.weights.push_back(std::move(w));
    if (use_bias) {
      Eigen::VectorXd b(out);
      for (int r = 0; r < out; ++r) b(r) = draw();
      net.biases.push_back(std::move(b));
    }
  }
  return net;
}

/// Direct numeric forward pass.
inline Eigen::VectorXd predict(const Network& net, const Eigen::VectorXd& input) {
  if (input.size() != net.arch.input_size())
    throw std::invalid_argument("predict: input length does not match architecture");
  Eigen::VectorXd a = input;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    Eigen::VectorXd z = net.weights[l] * a;
    if (net.use_bias) z += net.biases[l];
    switch (net.arch.activations[l]) {
      case Activation::sigmoid:
        a = z.unaryExpr([](double v) { return ad::sigmoid(v); });
        break;
      case Activation::tanh:
        a = z.array().tanh().matrix();
        break;
      case Activation::linear:
        a = std::move(z);
        break;
    }
  }
  return a;
}

// ---------------------------------------------------------------------------
// Tape route
// ---------------------------------------------------------------------------

/// Handles into a network subgraph on a tape. Weight (and bias) nodes are
/// tape inputs, so one graph serves a whole training run: assign new weight
/// values, re-run forward, read gradients from backward.
struct NetworkGraph {
  std::vector<ad::NodeId> inputs;
  std::vector<std::vector<ad::NodeId>> weight_nodes;  // per layer, row-major (out, in)
  std::vector<std::vector<ad::NodeId>> bias_nodes;
  std::vector<ad::NodeId> outputs;
};

/// Declare weight/bias input nodes for `net` on the tape, assigned from the
/// network's current values.
inline NetworkGraph declare_parameters(ad::Tape& tape, const Network& net) {
  NetworkGraph g;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    std::vector<ad::NodeId> wl;
    for (Eigen::Index r = 0; r < net.weights[l].rows(); ++r)
      for (Eigen::Index c = 0; c < net.weights[l].cols(); ++c)
        wl.push_back(tape.input(net.weights[l](r, c)));
    g.weight_nodes.push_back(std::move(wl));
    if (net.use_bias) {
      std::vector<ad::NodeId> bl;
      for (Eigen::Index r = 0; r < net.biases[l].size(); ++r)
        bl.push_back(tape.input(net.biases[l](r)));
      g.bias_nodes.push_back(std::move(bl));
    }
  }
  return g;
}

/// Append one forward pass over existing parameter nodes for the given
/// input nodes; returns the output layer's nodes.
inline std::vector<ad::NodeId> append_forward(ad::Tape& tape, const Network& net,
                                              const NetworkGraph& params,
                                              std::span<const ad::NodeId> input_nodes) {
  if (static_cast<int>(input_nodes.size()) != net.arch.input_size())
    throw std::invalid_argument("append_forward: input arity mismatch");
  std::vector<ad::NodeId> a(input_nodes.begin(), input_nodes.end());
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const Eigen::Index out = net.weights[l].rows();
    const Eigen::Index in = net.weights[l].cols();
    std::vector<ad::NodeId> next(out);
    for (Eigen::Index r = 0; r < out; ++r) {
      ad::NodeId z = tape.mul(params.weight_nodes[l][static_cast<std::size_t>(r * in)], a[0]);
      for (Eigen::Index c = 1; c < in; ++c)
        z = tape.add(z, tape.mul(params.weight_nodes[l][static_cast<std::size_t>(r * in + c)],
                                 a[static_cast<std::size_t>(c)]));
      if (net.use_bias) z = tape.add(z, params.bias_nodes[l][static_cast<std::size_t>(r)]);
      switch (net.arch.activations[l]) {
        case Activation::sigmoid: next[r] = tape.sigmoid(z); break;
        case Activation::tanh: next[r] = tape.tanh(z); break;
        case Activation::linear: next[r] = z; break;
      }
    }
    a = std::move(next);
  }
  return a;
}

/// Whole-network subgraph: fresh feature input nodes (assigned from
/// `input`, when given) plus parameter nodes.
inline NetworkGraph build_network_graph(ad::Tape& tape, const Network& net,
                                        std::span<const double> input = {}) {
  if (!input.empty() && static_cast<int>(input.size()) != net.arch.input_size())
    throw std::invalid_argument("build_network_graph: input length mismatch");
  NetworkGraph g = declare_parameters(tape, net);
  for (int i = 0; i < net.arch.input_size(); ++i)
    g.inputs.push_back(input.empty() ? tape.input() : tape.input(input[static_cast<std::size_t>(i)]));
  g.outputs = append_forward(tape, net, g, g.inputs);
  return g;
}

/// forward_network: tape-subgraph evaluation of `net` at `input`.
inline std::vector<double> forward_network(const Network& net, std::span<const double> input,
                                           ad::Tape& tape_out, NetworkGraph& graph_out) {
  graph_out = build_network_graph(tape_out, net, input);
  tape_out.forward();
  std::vector<double> values;
  for (ad::NodeId id : graph_out.outputs) values.push_back(tape_out.value(id));
  return values;
}

inline std::vector<double> forward_network(const Network& net, std::span<const double> input) {
  ad::Tape tape;
  NetworkGraph graph;
  return forward_network(net, input, tape, graph);
}

/// Copy current network weights into the graph's parameter nodes.
inline void assign_parameters(ad::Tape& tape, const NetworkGraph& g, const Network& net) {
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const auto& w = net.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        tape.set_input(g.weight_nodes[l][static_cast<std::size_t>(r * w.cols() + c)], w(r, c));
    if (net.use_bias)
      for (Eigen::Index r = 0; r < net.biases[l].size(); ++r)
        tape.set_input(g.bias_nodes[l][static_cast<std::size_t>(r)], net.biases[l](r));
  }
}

/// Gradient-descent step over the network's parameters from a backward
/// record; returns the squared norm of the applied gradient.
inline double apply_gradient_step(Network& net, const NetworkGraph& g,
                                  const ad::GradientRecord& grads, double learning_rate,
                                  double scale = 1.0) {
  double norm_sq = 0.0;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    auto& w = net.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        const double gval =
            grads.at(g.weight_nodes[l][static_cast<std::size_t>(r * w.cols() + c)]) * scale;
        norm_sq += gval * gval;
        w(r, c) -= learning_rate * gval;
      }
    if (net.use_bias)
      for (Eigen::Index r = 0; r < net.biases[l].size(); ++r) {
        const double gval = grads.at(g.bias_nodes[l][static_cast<std::size_t>(r)]) * scale;
        norm_sq += gval * gval;
        net.biases[l](r) -= learning_rate * gval;
      }
  }
  return norm_sq;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

enum class Loss : std::uint8_t { mse, binary_cross_entropy };

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 1;
  int batch_size = 0;  // 0 = full batch
  Loss loss = Loss::mse;
  std::uint64_t seed = 0;
};

struct Dataset {
  Eigen::MatrixXd features;  // n x d
  Eigen::VectorXd labels;    // n
};

struct TrainResult {
  Network net;
  std::vector<double> loss_history;  // mean batch loss per epoch
};

namespace detail {

/// Mean per-sample loss over a batch of B replicas sharing one parameter
/// set. Feature and label nodes are tape inputs, re-assigned per batch.
struct BatchLossGraph {
  ad::Tape tape;
  NetworkGraph params;
  std::vector<std::vector<ad::NodeId>> feature_nodes;  // [B][d]
  std::vector<ad::NodeId> label_nodes;                 // [B]
  ad::NodeId loss;
};

inline BatchLossGraph build_batch_loss(const Network& net, int batch, Loss loss_kind) {
  BatchLossGraph g;
  g.params = declare_parameters(g.tape, net);
  const int d = net.arch.input_size();
  std::vector<ad::NodeId> terms;
  // log arguments are clamped away from zero by an epsilon offset
  const ad::NodeId eps = g.tape.constant(1e-12);
  const ad::NodeId one = g.tape.constant(1.0);
  for (int s = 0; s < batch; ++s) {
    std::vector<ad::NodeId> x(static_cast<std::size_t>(d));
    for (auto& id : x) id = g.tape.input(0.0);
    const ad::NodeId y = g.tape.input(0.0);
    const std::vector<ad::NodeId> out = append_forward(g.tape, net, g.params, x);
    const ad::NodeId p = out[0];
    ad::NodeId term;
    if (loss_kind == Loss::mse) {
      const ad::NodeId diff = g.tape.sub(p, y);
      term = g.tape.mul(diff, diff);
    } else {
      // -[y log(p + eps) + (1 - y) log(1 - p + eps)]
      const ad::NodeId log_p = g.tape.log(g.tape.add(p, eps));
      const ad::NodeId log_q = g.tape.log(g.tape.add(g.tape.sub(one, p), eps));
      term = g.tape.neg(
          g.tape.add(g.tape.mul(y, log_p), g.tape.mul(g.tape.sub(one, y), log_q)));
    }
    terms.push_back(term);
    g.feature_nodes.push_back(std::move(x));
    g.label_nodes.push_back(y);
  }
  g.loss = g.tape.div(g.tape.sum(terms), g.tape.constant(static_cast<double>(batch)));
  return g;
}

}  // namespace detail

/// Mini-batch (or full-batch) gradient descent via tape backward passes.
/// Shuffling is seeded; when the final batch of an epoch comes up short it
/// wraps around to the front of that epoch's shuffled order, keeping one
/// fixed loss graph. A non-finite loss aborts with a diagnostic.
inline TrainResult train(Network net, const Dataset& data, const TrainConfig& config) {
  const auto n = static_cast<std::size_t>(data.features.rows());
  if (n == 0) throw std::invalid_argument("train: dataset is empty");
  if (data.features.cols() != net.arch.input_size())
    throw std::invalid_argument("train: feature width does not match network input size");
  if (data.labels.size() != data.features.rows())
    throw std::invalid_argument("train: labels length does not match feature rows");
  if (config.learning_rate < 0) throw std::invalid_argument("train: negative learning rate");
  if (config.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (net.arch.output_size() != 1)
    throw std::invalid_argument("train: trainer expects a single output unit");

  const std::size_t batch =
      config.batch_size <= 0 ? n : std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), n);
  detail::BatchLossGraph g = detail::build_batch_loss(net, static_cast<int>(batch), config.loss);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  SplitMix64 rng(derive_seed(config.seed, "train/shuffle"));

  TrainResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order, rng);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += batch, ++batches) {
      for (std::size_t s = 0; s < batch; ++s) {
        const std::size_t row = order[(start + s) % n];
        for (Eigen::Index c = 0; c < data.features.cols(); ++c)
          g.tape.set_input(g.feature_nodes[s][static_cast<std::size_t>(c)],
                           data.features(static_cast<Eigen::Index>(row), c));
        g.tape.set_input(g.label_nodes[s], data.labels(static_cast<Eigen::Index>(row)));
      }
      assign_parameters(g.tape, g.params, net);
      g.tape.forward();
      const double loss_value = g.tape.value(g.loss);
      if (!std::isfinite(loss_value))
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 ", batch " + std::to_string(batches));
      epoch_loss += loss_value;
      const ad::GradientRecord grads = g.tape.backward(g.loss);
      apply_gradient_step(net, g.params, grads, config.learning_rate);
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(batches));
  }
  result.net = std::move(net);
  return result;
}

/// Custom-tape training: full-batch gradient descent on an arbitrary loss
/// node built over declare_parameters() handles (PDE residual losses take
/// this route). The tape's non-parameter inputs must already be assigned.
inline TrainResult train_on_tape(Network net, ad::Tape& tape, const NetworkGraph& params,
                                 ad::NodeId loss, double learning_rate, int epochs) {
  if (learning_rate < 0) throw std::invalid_argument("train_on_tape: negative learning rate");
  TrainResult result;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    assign_parameters(tape, params, net);
    tape.forward();
    const double value = tape.value(loss);
    if (!std::isfinite(value))
      throw std::runtime_error("train_on_tape: non-finite loss at epoch " +
                               std::to_string(epoch));
    result.loss_history.push_back(value);
    apply_gradient_step(net, params, tape.backward(loss), learning_rate);
  }
  result.net = std::move(net);
  return result;
}

// ---------------------------------------------------------------------------
// JSON serialization:
// {"arch":[..],"activations":[..],"weights":[[..]..],"biases":[[..]..],"seed":..}
// Weights are flattened row-major (out, in) per layer; "biases" is present
// only when the network uses them.
// ---------------------------------------------------------------------------

inline nlohmann::json network_to_json(const Network& net) {
  nlohmann::json doc;
  doc["arch"] = net.arch.layer_sizes;
  auto acts = nlohmann::json::array();
  for (Activation a : net.arch.activations) acts.push_back(activation_name(a));
  doc["activations"] = acts;
  auto weights = nlohmann::json::array();
  for (const auto& w : net.weights) {
    auto layer = nlohmann::json::array();
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) layer.push_back(w(r, c));
    weights.push_back(layer);
  }
  doc["weights"] = weights;
  if (net.use_bias) {
    auto biases = nlohmann::json::array();
    for (const auto& b : net.biases) {
      auto layer = nlohmann::json::array();
      for (Eigen::Index r = 0; r < b.size(); ++r) layer.push_back(b(r));
      biases.push_back(layer);
    }
    doc["biases"] = biases;
  }
  doc["seed"] = net.seed;
  return doc;
}

inline Network network_from_json(const nlohmann::json& doc) {
  Network net;
  net.arch.layer_sizes = doc.at("arch").get<std::vector<int>>();
  for (const auto& name : doc.at("activations"))
    net.arch.activations.push_back(activation_from_name(name.get<std::string>()));
  net.arch.validate();
  net.seed = doc.value("seed", std::uint64_t{0});
  net.use_bias = doc.contains("biases");
  const auto& weights = doc.at("weights");
  for (std::size_t l = 0; l + 1 < net.arch.layer_sizes.size(); ++l) {
    const int in = net.arch.layer_sizes[l];
    const int out = net.arch.layer_sizes[l + 1];
    const auto flat = weights.at(l).get<std::vector<double>>();
    if (flat.size() != static_cast<std::size_t>(in) * static_cast<std::size_t>(out))
      throw std::invalid_argument("network JSON: weight count mismatch in layer " +
                                  std::to_string(l));
    Eigen::MatrixXd w(out, in);
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c)
        w(r, c) = flat[static_cast<std::size_t>(r) * static_cast<std::size_t>(in) +
                       static_cast<std::size_t>(c)];
    net.weights.push_back(std::move(w));
    if (net.use_bias) {
      const auto bias_flat = doc.at("biases").at(l).get<std::vector<double>>();
      if (bias_flat.size() != static_cast<std::size_t>(out))
        throw std::invalid_argument("network JSON: bias count mismatch in layer " +
                                    std::to_string(l));
      net.biases.push_back(Eigen::Map<const Eigen::VectorXd>(bias_flat.data(), out));
    }
  }
  return net;
}

inline void save_network(const Network& net, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  f << network_to_json(net).dump(2) << "\n";
}

inline Network load_network(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open network file '" + path.string() + "'");
  nlohmann::json doc;
  f >> doc;
  return network_from_json(doc);
}

}  // namespace svann::nn
