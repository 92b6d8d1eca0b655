#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "scrabble_lab/core.hpp"
#include "scrabble_lab/rng.hpp"

namespace scrabble_lab {

enum class Activation { Tanh, Relu };

inline std::string activation_name(Activation a) { return a == Activation::Tanh ? "tanh" : "relu"; }

inline Activation activation_from_name(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  throw ConfigError("unknown activation '" + name + "'");
}

/// Fully connected network with a scalar linear output. Inputs pass through a
/// fixed affine normalization (x - shift) * scale before the first layer.
struct Mlp {
  Activation activation = Activation::Tanh;
  std::vector<Eigen::MatrixXd> weights;  // layer l maps width[l] -> width[l+1]
  std::vector<Eigen::VectorXd> biases;
  Eigen::VectorXd input_shift;
  Eigen::VectorXd input_scale;

  /// Per-layer activations recorded by forward() for backprop.
  struct Tape {
    std::vector<Eigen::VectorXd> pre;
    std::vector<Eigen::VectorXd> post;
  };

  int input_dim() const { return weights.empty() ? 0 : static_cast<int>(weights.front().cols()); }
  int hidden_layers() const { return static_cast<int>(weights.size()) - 1; }

  /// Glorot-uniform weights, zero biases, identity normalization.
  static Mlp random(int input_dim, const std::vector<int>& hidden, Activation act, Rng& rng) {
    if (input_dim < 1) throw std::invalid_argument("mlp input dimension must be positive");
    if (hidden.empty() || hidden.size() > 2) throw std::invalid_argument("mlp needs 1 or 2 hidden layers");
    Mlp net;
    net.activation = act;
    std::vector<int> widths{input_dim};
    for (int h : hidden) {
      if (h < 1) throw std::invalid_argument("hidden width must be positive");
      widths.push_back(h);
    }
    widths.push_back(1);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      const double limit = std::sqrt(6.0 / (widths[l] + widths[l + 1]));
      Eigen::MatrixXd w(widths[l + 1], widths[l]);
      for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = (2.0 * uniform01(rng) - 1.0) * limit;
      net.weights.push_back(std::move(w));
      net.biases.push_back(Eigen::VectorXd::Zero(widths[l + 1]));
    }
    net.input_shift = Eigen::VectorXd::Zero(input_dim);
    net.input_scale = Eigen::VectorXd::Ones(input_dim);
    return net;
  }

  double forward(const Eigen::VectorXd& x) const {
    Tape tape;
    return forward(x, tape);
  }

  double forward(const Eigen::VectorXd& x, Tape& tape) const {
    if (x.size() != input_dim())
      throw std::invalid_argument("mlp expects " + std::to_string(input_dim()) + " inputs, got " +
                                  std::to_string(x.size()));
    tape.pre.clear();
    tape.post.clear();
    Eigen::VectorXd a = normalize(x);
    tape.post.push_back(a);
    for (std::size_t l = 0; l < weights.size(); ++l) {
      Eigen::VectorXd z = weights[l] * a + biases[l];
      tape.pre.push_back(z);
      a = l + 1 < weights.size() ? activate(z) : z;
      tape.post.push_back(a);
    }
    return a(0);
  }

  /// Adds d(out)/d(params) * upstream into grad, which must have this shape.
  void backward(const Tape& tape, double upstream, Mlp& grad) const {
    Eigen::VectorXd delta = Eigen::VectorXd::Constant(1, upstream);
    for (std::size_t l = weights.size(); l-- > 0;) {
      grad.weights[l].noalias() += delta * tape.post[l].transpose();
      grad.biases[l] += delta;
      if (l == 0) break;
      delta = (weights[l].transpose() * delta).cwiseProduct(activate_derivative(tape.pre[l - 1]));
    }
  }

  /// Same shapes, all parameters zero.
  Mlp zeros_like() const {
    Mlp z = *this;
    for (auto& w : z.weights) w.setZero();
    for (auto& b : z.biases) b.setZero();
    return z;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
    return n;
  }

  /// Trainable parameters in a fixed order: per layer, weights (column-major) then biases.
  std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (std::size_t l = 0; l < weights.size(); ++l) {
      out.insert(out.end(), weights[l].data(), weights[l].data() + weights[l].size());
      out.insert(out.end(), biases[l].data(), biases[l].data() + biases[l].size());
    }
    return out;
  }

  void unflatten(const std::vector<double>& p) {
    if (p.size() != parameter_count()) throw std::invalid_argument("parameter vector has the wrong length");
    std::size_t k = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      for (Eigen::Index i = 0; i < weights[l].size(); ++i) weights[l].data()[i] = p[k++];
      for (Eigen::Index i = 0; i < biases[l].size(); ++i) biases[l](i) = p[k++];
    }
  }

  bool all_finite() const {
    for (std::size_t l = 0; l < weights.size(); ++l)
      if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
    return true;
  }

 private:
  Eigen::VectorXd normalize(const Eigen::VectorXd& x) const {
    return (x - input_shift).cwiseProduct(input_scale);
  }

  Eigen::VectorXd activate(const Eigen::VectorXd& z) const {
    if (activation == Activation::Tanh) return z.array().tanh().matrix();
    return z.cwiseMax(0.0);
  }

  Eigen::VectorXd activate_derivative(const Eigen::VectorXd& z) const {
    if (activation == Activation::Tanh) return (1.0 - z.array().tanh().square()).matrix();
    return (z.array() > 0.0).cast<double>().matrix();
  }
};

inline nlohmann::json mlp_to_json(const Mlp& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < net.weights[l].rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(net.weights[l].cols()));
      for (Eigen::Index j = 0; j < net.weights[l].cols(); ++j) row[static_cast<std::size_t>(j)] = net.weights[l](i, j);
      rows.push_back(row);
    }
    layers.push_back({{"weights", rows}, {"bias", std::vector<double>(net.biases[l].data(), net.biases[l].data() + net.biases[l].size())}});
  }
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"activation", activation_name(net.activation)},
          {"layers", layers},
          {"input_shift", vec(net.input_shift)},
          {"input_scale", vec(net.input_scale)}};
}

inline Mlp mlp_from_json(const nlohmann::json& j, const std::string& path = "$") {
  auto fail = [&](const std::string& where, const std::string& what) { return ConfigError(path + where + ": " + what); };
  Mlp net;
  try {
    net.activation = activation_from_name(j.value("activation", std::string("tanh")));
  } catch (const ConfigError& e) {
    throw fail(".activation", e.what());
  }
  if (!j.contains("layers") || !j["layers"].is_array() || j["layers"].size() < 2 || j["layers"].size() > 3)
    throw fail(".layers", "expected 2 or 3 layers (1-2 hidden plus output)");
  Eigen::Index in = -1;
  for (std::size_t l = 0; l < j["layers"].size(); ++l) {
    const auto& layer = j["layers"][l];
    const std::string lp = ".layers[" + std::to_string(l) + "]";
    if (!layer.contains("weights") || !layer["weights"].is_array() || layer["weights"].empty())
      throw fail(lp + ".weights", "expected a non-empty matrix");
    const auto& rows = layer["weights"];
    const auto n_rows = static_cast<Eigen::Index>(rows.size());
    const auto n_cols = static_cast<Eigen::Index>(rows[0].size());
    if (in >= 0 && n_cols != in) throw fail(lp + ".weights", "column count does not match the previous layer");
    Eigen::MatrixXd w(n_rows, n_cols);
    for (Eigen::Index i = 0; i < n_rows; ++i) {
      const auto& row = rows[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n_cols) throw fail(lp + ".weights", "ragged matrix");
      for (Eigen::Index c = 0; c < n_cols; ++c) w(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    if (!layer.contains("bias") || layer["bias"].size() != rows.size()) throw fail(lp + ".bias", "length must match rows");
    Eigen::VectorXd b(n_rows);
    for (Eigen::Index i = 0; i < n_rows; ++i) b(i) = layer["bias"][static_cast<std::size_t>(i)].get<double>();
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
    in = n_rows;
  }
  if (net.weights.back().rows() != 1) throw fail(".layers", "output layer must have one unit");
  const auto dim = net.weights.front().cols();
  auto read_vec = [&](const char* key, double fill) {
    Eigen::VectorXd v = Eigen::VectorXd::Constant(dim, fill);
    if (!j.contains(key)) return v;
    if (!j[key].is_array() || static_cast<Eigen::Index>(j[key].size()) != dim)
      throw fail(std::string(".") + key, "length must equal the input dimension");
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = j[key][static_cast<std::size_t>(i)].get<double>();
    return v;
  };
  net.input_shift = read_vec("input_shift", 0.0);
  net.input_scale = read_vec("input_scale", 1.0);
  return net;
}

}  // namespace scrabble_lab
