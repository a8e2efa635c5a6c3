#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hsom/errors.hpp"
#include "hsom/rng.hpp"

namespace hsom {

enum class ErrorSign : std::uint8_t {
  DesiredMinusActual,  // w += beta * x * (d - y); error-reducing
  ActualMinusDesired,  // w += beta * x * (y - d)
};

struct LabelDistribution {
  std::vector<double> activations;  // cosine per label, in [-1, 1]
  std::size_t predicted{0};
};

// One cosine unit per action label, fed the flattened second-layer activity.
class SupervisedLayer {
 public:
  SupervisedLayer(std::vector<std::string> labels, std::size_t input_dim, double beta, std::uint64_t seed,
                  ErrorSign sign = ErrorSign::DesiredMinusActual)
      : labels_(std::move(labels)), dim_(input_dim), beta_(beta), sign_(sign) {
    validate();
    weights_.resize(labels_.size() * dim_);
    Rng rng(seed);
    for (double& w : weights_) w = rng.uniform();
  }

  SupervisedLayer(std::vector<std::string> labels, std::size_t input_dim, double beta, ErrorSign sign,
                  std::vector<double> weights)
      : labels_(std::move(labels)), dim_(input_dim), beta_(beta), sign_(sign), weights_(std::move(weights)) {
    validate();
    if (weights_.size() != labels_.size() * dim_) {
      throw Error(ErrorKind::DimensionMismatch, "supervised weight buffer has the wrong size");
    }
  }

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t num_labels() const { return labels_.size(); }
  std::size_t input_dim() const { return dim_; }
  double beta() const { return beta_; }
  ErrorSign sign() const { return sign_; }
  const std::vector<double>& weights() const { return weights_; }

  std::span<const double> weight(std::size_t label) const { return {weights_.data() + label * dim_, dim_}; }
  std::span<double> weight(std::size_t label) { return {weights_.data() + label * dim_, dim_}; }

  std::size_t label_index(const std::string& label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] == label) return i;
    }
    throw Error(ErrorKind::UnknownLabel, "label '" + label + "' is not known to the output layer");
  }

  bool operator==(const SupervisedLayer&) const = default;

 private:
  void validate() const {
    if (labels_.empty()) throw Error(ErrorKind::MissingLabel, "output layer needs at least one label");
    if (dim_ == 0) throw Error(ErrorKind::DimensionMismatch, "output layer input dimension must be positive");
    if (!(beta_ >= 0.0)) throw Error(ErrorKind::InvalidConfig, "beta must be non-negative");
  }

  std::vector<std::string> labels_;
  std::size_t dim_;
  double beta_;
  ErrorSign sign_;
  std::vector<double> weights_;
};

// y_c = x.w_c / (|x| |w_c|); predicted = argmax with ties to the lowest index.
inline LabelDistribution activate(const SupervisedLayer& layer, std::span<const double> x) {
  if (x.size() != layer.input_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "input has " + std::to_string(x.size()) + " values, layer expects " +
                                                  std::to_string(layer.input_dim()));
  }
  const double x_norm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
  if (x_norm == 0.0) throw Error(ErrorKind::ZeroVector, "input vector has zero norm");

  LabelDistribution out;
  out.activations.resize(layer.num_labels());
  for (std::size_t c = 0; c < layer.num_labels(); ++c) {
    const auto w = layer.weight(c);
    const double w_norm = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
    if (w_norm == 0.0) throw Error(ErrorKind::ZeroVector, "weight vector of label '" + layer.labels()[c] + "' is zero");
    const double y = std::inner_product(x.begin(), x.end(), w.begin(), 0.0) / (x_norm * w_norm);
    out.activations[c] = std::clamp(y, -1.0, 1.0);
    if (out.activations[c] > out.activations[out.predicted]) out.predicted = c;
  }
  return out;
}

// Delta rule with a one-hot desired activity.
inline void train_step(SupervisedLayer& layer, std::span<const double> x, std::size_t target) {
  if (target >= layer.num_labels()) throw Error(ErrorKind::UnknownLabel, "target index out of range");
  const LabelDistribution dist = activate(layer, x);
  for (std::size_t c = 0; c < layer.num_labels(); ++c) {
    const double desired = c == target ? 1.0 : 0.0;
    const double err = layer.sign() == ErrorSign::DesiredMinusActual ? desired - dist.activations[c]
                                                                     : dist.activations[c] - desired;
    const double rate = layer.beta() * err;
    if (rate == 0.0) continue;
    auto w = layer.weight(c);
    for (std::size_t l = 0; l < w.size(); ++l) w[l] += rate * x[l];
  }
}

inline void train_step(SupervisedLayer& layer, std::span<const double> x, const std::string& target_label) {
  train_step(layer, x, layer.label_index(target_label));
}

struct SupervisedSample {
  std::vector<double> input;
  std::size_t label{0};
};

// Sum over labels of (d - y)^2 for one sample.
inline double squared_error(const LabelDistribution& dist, std::size_t target) {
  double e = 0.0;
  for (std::size_t c = 0; c < dist.activations.size(); ++c) {
    const double d = (c == target ? 1.0 : 0.0) - dist.activations[c];
    e += d * d;
  }
  return e;
}

struct SupervisedTrainingResult {
  SupervisedLayer layer;
  std::vector<double> accuracy;  // after each epoch, on the training set
  std::vector<double> mean_error;
};

inline std::pair<double, double> score(const SupervisedLayer& layer, std::span<const SupervisedSample> data) {
  std::size_t hits = 0;
  double err = 0.0;
  for (const auto& s : data) {
    const auto dist = activate(layer, s.input);
    if (dist.predicted == s.label) ++hits;
    err += squared_error(dist, s.label);
  }
  const auto n = static_cast<double>(data.size());
  return {static_cast<double>(hits) / n, err / n};
}

inline SupervisedTrainingResult train(SupervisedLayer layer, std::span<const SupervisedSample> data,
                                      std::size_t epochs, std::uint64_t seed) {
  if (data.empty()) throw Error(ErrorKind::EmptyTrainingSet, "supervised training needs at least one sample");
  for (const auto& s : data) {
    if (s.label >= layer.num_labels()) throw Error(ErrorKind::UnknownLabel, "sample label out of range");
  }
  SupervisedTrainingResult result{std::move(layer), {}, {}};
  Rng rng(seed);
  std::vector<std::size_t> order(data.size());
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t idx : order) train_step(result.layer, data[idx].input, data[idx].label);
    const auto [acc, err] = score(result.layer, data);
    result.accuracy.push_back(acc);
    result.mean_error.push_back(err);
  }
  return result;
}

}  // namespace hsom
