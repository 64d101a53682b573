#include "rnf/checkpoint.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>

namespace rnf {

namespace {
constexpr int kFormatVersion = 1;
using Json = nlohmann::ordered_json;
}  // namespace

void save_checkpoint(const RnfModel& model, const std::optional<NormStats>& norm,
                     const std::filesystem::path& path) {
  Json doc;
  doc["format"] = "rnf-checkpoint";
  doc["version"] = kFormatVersion;
  doc["variant"] = variant_name(model.variant);
  doc["family"] = model.family == ObservationFamily::Gaussian ? "gaussian" : "bernoulli";
  doc["state_size"] = model.state_size;
  doc["input_dim"] = model.input_dim;
  doc["obs_dim"] = model.obs_dim;

  Json params = Json::array();
  for (ParamId id = 0; id < model.params.count(); ++id) {
    const Tensor& value = model.params.value(id);
    Json p;
    p["name"] = model.params.name(id);
    p["shape"] = value.shape();
    p["values"] = std::vector<double>(value.values().begin(), value.values().end());
    params.push_back(std::move(p));
  }
  doc["params"] = std::move(params);

  if (norm.has_value()) {
    Json n;
    n["method"] = norm_method_name(norm->method);
    n["offset"] = norm->offset;
    n["scale"] = norm->scale;
    n["ewm_halflife"] = norm->ewm_halflife;
    doc["normalization"] = std::move(n);
  } else {
    doc["normalization"] = nullptr;
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << doc.dump(2) << "\n";
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  Json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw std::runtime_error("checkpoint " + path.string() + ": invalid JSON: " + e.what());
  }

  if (doc.value("format", "") != "rnf-checkpoint") {
    throw std::runtime_error("checkpoint " + path.string() + ": not an rnf checkpoint");
  }
  if (doc.value("version", -1) != kFormatVersion) {
    throw std::runtime_error("checkpoint " + path.string() + ": unsupported format version " +
                             std::to_string(doc.value("version", -1)));
  }

  const Variant variant = variant_from_name(doc.at("variant").get<std::string>());
  const ObservationFamily family = doc.at("family").get<std::string>() == "bernoulli"
                                       ? ObservationFamily::Bernoulli
                                       : ObservationFamily::Gaussian;

  LoadedCheckpoint loaded;
  loaded.model = make_model(variant, doc.at("state_size").get<std::size_t>(),
                            doc.at("input_dim").get<std::size_t>(),
                            doc.at("obs_dim").get<std::size_t>(), 0, family);

  std::size_t restored = 0;
  for (const Json& p : doc.at("params")) {
    const auto name = p.at("name").get<std::string>();
    const auto id = loaded.model.params.find(name);
    if (!id.has_value()) {
      throw std::runtime_error("checkpoint " + path.string() + ": unexpected tensor '" + name + "'");
    }
    Tensor& dst = loaded.model.params.value(*id);
    const auto shape = p.at("shape").get<std::vector<std::size_t>>();
    auto values = p.at("values").get<std::vector<double>>();
    if (shape != dst.shape()) {
      throw std::runtime_error("checkpoint " + path.string() + ": tensor '" + name +
                               "' has shape " + shape_str(shape) + ", expected " +
                               shape_str(dst.shape()));
    }
    if (values.size() != dst.size()) {
      throw std::runtime_error("checkpoint " + path.string() + ": tensor '" + name +
                               "' holds " + std::to_string(values.size()) + " values, expected " +
                               std::to_string(dst.size()));
    }
    dst = Tensor(shape, std::move(values));
    ++restored;
  }
  if (restored != loaded.model.params.count()) {
    throw std::runtime_error("checkpoint " + path.string() + ": missing tensors (" +
                             std::to_string(restored) + " of " +
                             std::to_string(loaded.model.params.count()) + ")");
  }

  if (!doc.at("normalization").is_null()) {
    const Json& n = doc.at("normalization");
    NormStats stats;
    stats.method = norm_method_from_name(n.at("method").get<std::string>());
    stats.offset = n.at("offset").get<std::vector<double>>();
    stats.scale = n.at("scale").get<std::vector<double>>();
    stats.ewm_halflife = n.at("ewm_halflife").get<double>();
    loaded.norm = std::move(stats);
  }
  return loaded;
}

}  // namespace rnf
