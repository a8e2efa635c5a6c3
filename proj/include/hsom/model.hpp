#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hsom/errors.hpp"
#include "hsom/pipeline_config.hpp"
#include "hsom/skeleton.hpp"
#include "hsom/som.hpp"
#include "hsom/supervised.hpp"
#include "hsom/trajectory.hpp"

namespace hsom {

inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kModelFormatName = "hsom-recognizer";

struct RecognizerModel {
  PipelineConfig config;
  std::uint64_t seed{0};
  NormalizationBounds bounds;
  SomGrid layer1;
  EncoderModel encoder;
  SomGrid layer2;
  SupervisedLayer output;
  int format_version{kModelFormatVersion};

  const std::vector<std::string>& labels() const { return output.labels(); }

  // Cross-component shape invariants; throws ModelFormat when violated.
  void validate() const {
    const auto fail = [](const std::string& m) { throw Error(ErrorKind::ModelFormat, m); };
    if (bounds.lo.size() != 3 * config.attention.members.size()) fail("bounds do not match the attended body part");
    if (layer1.input_dim() != bounds.size()) fail("layer1 input dimension does not match the posture size");
    if (encoder.rows != layer1.rows() || encoder.cols != layer1.cols()) fail("encoder grid differs from layer1");
    if (layer2.input_dim() != encoder.output_dim()) fail("layer2 input dimension must equal 2*(n_max+1)");
    if (output.input_dim() != layer2.size()) fail("output layer input dimension must equal layer2 size");
  }
};

namespace detail {

inline nlohmann::ordered_json grid_to_json(const SomGrid& g) {
  nlohmann::ordered_json j;
  j["rows"] = g.rows();
  j["cols"] = g.cols();
  j["input_dim"] = g.input_dim();
  j["activity_sigma"] = g.activity_sigma();
  j["seed"] = g.seed();
  j["weights"] = g.weights();
  return j;
}

inline SomGrid grid_from_json(const nlohmann::json& j) {
  return SomGrid(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(), j.at("input_dim").get<std::size_t>(),
                 j.at("activity_sigma").get<double>(), j.at("seed").get<std::uint64_t>(),
                 j.at("weights").get<std::vector<double>>());
}

}  // namespace detail

// Single versioned JSON document. Doubles are written in shortest
// round-trip form, so save -> load reproduces every weight bit for bit.
inline nlohmann::ordered_json model_to_json(const RecognizerModel& m) {
  nlohmann::ordered_json j;
  j["format"] = kModelFormatName;
  j["format_version"] = m.format_version;
  j["seed"] = m.seed;
  j["config"] = m.config.to_json();
  j["bounds"] = {{"lo", m.bounds.lo}, {"hi", m.bounds.hi}};
  j["layer1"] = detail::grid_to_json(m.layer1);
  j["encoder"] = {{"n_max", m.encoder.n_max}, {"rows", m.encoder.rows}, {"cols", m.encoder.cols}};
  j["layer2"] = detail::grid_to_json(m.layer2);
  nlohmann::ordered_json out;
  out["labels"] = m.output.labels();
  out["input_dim"] = m.output.input_dim();
  out["beta"] = m.output.beta();
  out["error_sign"] = detail::sign_name(m.output.sign());
  out["weights"] = m.output.weights();
  j["output"] = std::move(out);
  return j;
}

inline RecognizerModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormatName) {
      throw Error(ErrorKind::ModelFormat, "not a recognizer model file");
    }
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(ErrorKind::ModelFormat, "unsupported model format version " + std::to_string(version));
    }
    const auto& out = j.at("output");
    RecognizerModel m{
        PipelineConfig::from_json(j.at("config")),
        j.at("seed").get<std::uint64_t>(),
        NormalizationBounds{j.at("bounds").at("lo").get<std::vector<double>>(),
                            j.at("bounds").at("hi").get<std::vector<double>>()},
        detail::grid_from_json(j.at("layer1")),
        EncoderModel{j.at("encoder").at("n_max").get<std::size_t>(), j.at("encoder").at("rows").get<std::size_t>(),
                     j.at("encoder").at("cols").get<std::size_t>()},
        detail::grid_from_json(j.at("layer2")),
        SupervisedLayer(out.at("labels").get<std::vector<std::string>>(), out.at("input_dim").get<std::size_t>(),
                        out.at("beta").get<double>(), detail::parse_sign(out.at("error_sign").get<std::string>()),
                        out.at("weights").get<std::vector<double>>()),
        version};
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ModelFormat, e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ModelFormat) throw;
    throw Error(ErrorKind::ModelFormat, e.what());
  }
}

inline void save_model(const RecognizerModel& m, std::ostream& out) { out << model_to_json(m).dump(1) << '\n'; }

inline void save_model(const RecognizerModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ModelFormat, "cannot write model file '" + path + "'");
  save_model(m, out);
}

inline RecognizerModel load_model(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ModelFormat, e.what());
  }
  return model_from_json(j);
}

inline RecognizerModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ModelFormat, "cannot open model file '" + path + "'");
  return load_model(in);
}

}  // namespace hsom
