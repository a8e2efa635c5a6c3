#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsom/config.hpp"
#include "hsom/errors.hpp"
#include "hsom/objects.hpp"
#include "hsom/skeleton.hpp"
#include "hsom/som.hpp"
#include "hsom/supervised.hpp"

namespace hsom {

struct SomLayerConfig {
  std::size_t rows{30};
  std::size_t cols{30};
  std::size_t epochs{1000};
  double activity_sigma{kDefaultActivitySigma};
  // Unset values fall back to TrainingSchedule::defaults.
  std::optional<double> alpha0{};
  std::optional<double> alpha_decay{};
  std::optional<double> sigma0{};
  std::optional<double> sigma_decay{};
  NeighborhoodForm form{NeighborhoodForm::Unsquared};

  TrainingSchedule schedule(std::size_t inputs_per_epoch) const {
    TrainingSchedule s = TrainingSchedule::defaults(rows, cols, epochs, inputs_per_epoch);
    if (alpha0) s.alpha0 = *alpha0;
    if (alpha_decay) s.alpha_decay = *alpha_decay;
    if (sigma0) s.nbhd_sigma0 = *sigma0;
    if (sigma_decay) s.nbhd_decay = *sigma_decay;
    s.form = form;
    return s;
  }

  bool operator==(const SomLayerConfig&) const = default;
};

struct PipelineConfig {
  BodyPart attention{default_body_part(BodyPartName::RightArm)};
  JointId hand{JointId::RightHand};
  SomLayerConfig layer1{.rows = 30, .cols = 30, .epochs = 1000};
  SomLayerConfig layer2{.rows = 35, .cols = 35, .epochs = 1000};
  bool dedup{true};
  double beta{0.1};
  std::size_t supervised_epochs{500};
  // Contrast used when the second-layer activity is fed to the output layer.
  double supervised_activity_sigma{1.0};
  ErrorSign error_sign{ErrorSign::DesiredMinusActual};
  ProximityAggregation aggregation{ProximityAggregation::Mean};
  std::vector<std::string> labels;  // canonical class order; empty = order of first appearance
  std::optional<std::uint64_t> seed;

  static PipelineConfig from_document(const ConfigDocument& doc);
  nlohmann::ordered_json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j);
};

namespace detail {

inline NeighborhoodForm parse_form(const std::string& s) {
  if (s == "unsquared") return NeighborhoodForm::Unsquared;
  if (s == "squared") return NeighborhoodForm::Squared;
  throw Error(ErrorKind::InvalidConfig, "neighbourhood form must be 'unsquared' or 'squared', got '" + s + "'");
}

inline const char* form_name(NeighborhoodForm f) { return f == NeighborhoodForm::Squared ? "squared" : "unsquared"; }

inline ErrorSign parse_sign(const std::string& s) {
  if (s == "desired_minus_actual") return ErrorSign::DesiredMinusActual;
  if (s == "actual_minus_desired") return ErrorSign::ActualMinusDesired;
  throw Error(ErrorKind::InvalidConfig,
              "error_sign must be 'desired_minus_actual' or 'actual_minus_desired', got '" + s + "'");
}

inline const char* sign_name(ErrorSign s) {
  return s == ErrorSign::ActualMinusDesired ? "actual_minus_desired" : "desired_minus_actual";
}

inline ProximityAggregation parse_aggregation(const std::string& s) {
  if (s == "mean") return ProximityAggregation::Mean;
  if (s == "min") return ProximityAggregation::Min;
  throw Error(ErrorKind::InvalidConfig, "aggregation must be 'mean' or 'min', got '" + s + "'");
}

inline const char* aggregation_name(ProximityAggregation a) { return a == ProximityAggregation::Min ? "min" : "mean"; }

inline std::size_t positive_size(std::optional<std::int64_t> v, std::size_t fallback, const std::string& what,
                                 bool allow_zero = false) {
  if (!v) return fallback;
  if (*v < 0 || (*v == 0 && !allow_zero)) throw Error(ErrorKind::InvalidConfig, what + " must be positive");
  return static_cast<std::size_t>(*v);
}

inline SomLayerConfig layer_from_document(const ConfigDocument& doc, const std::string& sec, SomLayerConfig base) {
  base.rows = positive_size(doc.get_int(sec, "rows"), base.rows, sec + ".rows");
  base.cols = positive_size(doc.get_int(sec, "cols"), base.cols, sec + ".cols");
  base.epochs = positive_size(doc.get_int(sec, "epochs"), base.epochs, sec + ".epochs", true);
  if (auto v = doc.get_double(sec, "activity_sigma")) base.activity_sigma = *v;
  if (auto v = doc.get_double(sec, "alpha0")) base.alpha0 = *v;
  if (auto v = doc.get_double(sec, "alpha_decay")) base.alpha_decay = *v;
  if (auto v = doc.get_double(sec, "sigma0")) base.sigma0 = *v;
  if (auto v = doc.get_double(sec, "sigma_decay")) base.sigma_decay = *v;
  if (auto v = doc.get_string(sec, "neighborhood")) base.form = parse_form(*v);
  if (!(base.activity_sigma > 0.0)) throw Error(ErrorKind::InvalidConfig, sec + ".activity_sigma must be positive");
  return base;
}

inline nlohmann::ordered_json layer_to_json(const SomLayerConfig& c) {
  nlohmann::ordered_json j;
  j["rows"] = c.rows;
  j["cols"] = c.cols;
  j["epochs"] = c.epochs;
  j["activity_sigma"] = c.activity_sigma;
  j["alpha0"] = c.alpha0 ? nlohmann::ordered_json(*c.alpha0) : nlohmann::ordered_json(nullptr);
  j["alpha_decay"] = c.alpha_decay ? nlohmann::ordered_json(*c.alpha_decay) : nlohmann::ordered_json(nullptr);
  j["sigma0"] = c.sigma0 ? nlohmann::ordered_json(*c.sigma0) : nlohmann::ordered_json(nullptr);
  j["sigma_decay"] = c.sigma_decay ? nlohmann::ordered_json(*c.sigma_decay) : nlohmann::ordered_json(nullptr);
  j["neighborhood"] = form_name(c.form);
  return j;
}

inline std::optional<double> opt_double(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

inline SomLayerConfig layer_from_json(const nlohmann::json& j) {
  SomLayerConfig c;
  c.rows = j.at("rows").get<std::size_t>();
  c.cols = j.at("cols").get<std::size_t>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.activity_sigma = j.at("activity_sigma").get<double>();
  c.alpha0 = opt_double(j, "alpha0");
  c.alpha_decay = opt_double(j, "alpha_decay");
  c.sigma0 = opt_double(j, "sigma0");
  c.sigma_decay = opt_double(j, "sigma_decay");
  c.form = parse_form(j.at("neighborhood").get<std::string>());
  return c;
}

inline JointId parse_joint(const std::string& name) {
  const auto id = joint_from_name(name);
  if (!id) throw Error(ErrorKind::InvalidConfig, "unknown joint '" + name + "'");
  return *id;
}

inline BodyPart parse_attention(const std::string& part_name, const std::optional<std::vector<std::string>>& members) {
  const auto part = body_part_from_name(part_name);
  if (!part) throw Error(ErrorKind::InvalidConfig, "unknown body part '" + part_name + "'");
  BodyPart bp = default_body_part(*part);
  if (members) {
    if (members->empty()) throw Error(ErrorKind::InvalidConfig, "attention member list is empty");
    bp.members.clear();
    for (const auto& m : *members) bp.members.push_back(parse_joint(m));
  }
  return bp;
}

}  // namespace detail

inline PipelineConfig PipelineConfig::from_document(const ConfigDocument& doc) {
  PipelineConfig c;
  const std::string part = doc.get_string("skeleton", "attention").value_or("RightArm");
  c.attention = detail::parse_attention(part, doc.get_string_list("skeleton", "members"));
  if (auto v = doc.get_string("objects", "hand_joint")) {
    c.hand = detail::parse_joint(*v);
  } else if (c.attention.name == BodyPartName::LeftArm) {
    c.hand = JointId::LeftHand;
  }
  if (auto v = doc.get_string("objects", "aggregation")) c.aggregation = detail::parse_aggregation(*v);
  c.layer1 = detail::layer_from_document(doc, "layer1", c.layer1);
  c.layer2 = detail::layer_from_document(doc, "layer2", c.layer2);
  if (auto v = doc.get_bool("encoder", "dedup")) c.dedup = *v;
  if (auto v = doc.get_double("supervised", "beta")) c.beta = *v;
  c.supervised_epochs = detail::positive_size(doc.get_int("supervised", "epochs"), c.supervised_epochs,
                                              "supervised.epochs", true);
  if (auto v = doc.get_double("supervised", "activity_sigma")) c.supervised_activity_sigma = *v;
  if (auto v = doc.get_string("supervised", "error_sign")) c.error_sign = detail::parse_sign(*v);
  if (auto v = doc.get_string_list("supervised", "labels")) c.labels = *v;
  if (auto v = doc.get_int("train", "seed")) c.seed = static_cast<std::uint64_t>(*v);
  if (!(c.beta >= 0.0)) throw Error(ErrorKind::InvalidConfig, "supervised.beta must be non-negative");
  if (!(c.supervised_activity_sigma > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "supervised.activity_sigma must be positive");
  }
  return c;
}

inline nlohmann::ordered_json PipelineConfig::to_json() const {
  nlohmann::ordered_json j;
  j["attention"] = body_part_name(attention.name);
  auto members = nlohmann::ordered_json::array();
  for (JointId id : attention.members) members.push_back(joint_name(id));
  j["attention_members"] = std::move(members);
  j["hand_joint"] = joint_name(hand);
  j["aggregation"] = detail::aggregation_name(aggregation);
  j["layer1"] = detail::layer_to_json(layer1);
  j["layer2"] = detail::layer_to_json(layer2);
  j["dedup"] = dedup;
  j["beta"] = beta;
  j["supervised_epochs"] = supervised_epochs;
  j["supervised_activity_sigma"] = supervised_activity_sigma;
  j["error_sign"] = detail::sign_name(error_sign);
  j["labels"] = labels;
  j["seed"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json(nullptr);
  return j;
}

inline PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  PipelineConfig c;
  c.attention = detail::parse_attention(j.at("attention").get<std::string>(),
                                        j.at("attention_members").get<std::vector<std::string>>());
  c.hand = detail::parse_joint(j.at("hand_joint").get<std::string>());
  c.aggregation = detail::parse_aggregation(j.at("aggregation").get<std::string>());
  c.layer1 = detail::layer_from_json(j.at("layer1"));
  c.layer2 = detail::layer_from_json(j.at("layer2"));
  c.dedup = j.at("dedup").get<bool>();
  c.beta = j.at("beta").get<double>();
  c.supervised_epochs = j.at("supervised_epochs").get<std::size_t>();
  c.supervised_activity_sigma = j.at("supervised_activity_sigma").get<double>();
  c.error_sign = detail::parse_sign(j.at("error_sign").get<std::string>());
  c.labels = j.at("labels").get<std::vector<std::string>>();
  if (j.contains("seed") && !j.at("seed").is_null()) c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace hsom
