#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "mlpcv/mlp.hpp"

namespace mlpcv {

namespace {

using nlohmann::json;

json layer_to_json(const Layer& layer) {
  return json{{"weights", layer.weights}, {"biases", layer.biases}};
}

Layer layer_from_json(const json& j, int out_dim, int in_dim, const char* what) {
  if (!j.is_object() || !j.contains("weights") || !j.contains("biases")) {
    throw SchemaError(std::string("model: ") + what + " layer must carry weights and biases");
  }
  const json& w = j.at("weights");
  const json& b = j.at("biases");
  if (!w.is_array() || !b.is_array()) {
    throw SchemaError(std::string("model: ") + what + " weights/biases must be arrays");
  }
  Layer layer;
  layer.out_dim = out_dim;
  layer.in_dim = in_dim;
  if (w.size() != static_cast<std::size_t>(out_dim) * in_dim ||
      b.size() != static_cast<std::size_t>(out_dim)) {
    throw SchemaError(std::string("model: ") + what + " layer has wrong element counts");
  }
  layer.weights.reserve(w.size());
  layer.biases.reserve(b.size());
  for (const json& v : w) {
    if (!v.is_number()) throw SchemaError("model: weight entries must be numbers");
    layer.weights.push_back(v.get<double>());
  }
  for (const json& v : b) {
    if (!v.is_number()) throw SchemaError("model: bias entries must be numbers");
    layer.biases.push_back(v.get<double>());
  }
  return layer;
}

int require_int(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    throw SchemaError(std::string("model: missing integer field '") + key + "'");
  }
  return j.at(key).get<int>();
}

}  // namespace

std::string save_model(const Mlp& mlp) {
  json doc;
  doc["activation"] =
      mlp.activation().kind == ActivationSpec::Kind::relu ? "relu" : "leaky_relu";
  doc["negative_slope"] = mlp.activation().negative_slope;
  doc["input_dim"] = mlp.input_dim();
  doc["cond_dim"] = mlp.cond_dim();
  json hidden = json::array();
  for (int l = 0; l < mlp.depth(); ++l) hidden.push_back(layer_to_json(mlp.hidden(l)));
  doc["hidden"] = std::move(hidden);
  doc["output"] = layer_to_json(mlp.output_layer());
  return doc.dump(2) + "\n";
}

Mlp load_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("model: not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("model: document must be an object");

  if (!doc.contains("activation") || !doc.at("activation").is_string()) {
    throw SchemaError("model: missing string field 'activation'");
  }
  const std::string act_name = doc.at("activation").get<std::string>();
  if (!doc.contains("negative_slope") || !doc.at("negative_slope").is_number()) {
    throw SchemaError("model: missing numeric field 'negative_slope'");
  }
  const double slope = doc.at("negative_slope").get<double>();
  ActivationSpec activation;
  if (act_name == "relu") {
    activation = ActivationSpec::relu();
    if (slope != 0.0) throw UnsupportedActivation("model: relu must have negative_slope 0");
  } else if (act_name == "leaky_relu") {
    if (!(slope > 0.0 && slope < 1.0)) {
      throw UnsupportedActivation("model: leaky_relu negative_slope must lie in (0,1)");
    }
    activation = ActivationSpec::leaky_relu(slope);
  } else {
    throw UnsupportedActivation("model: unknown activation '" + act_name + "'");
  }

  const int input_dim = require_int(doc, "input_dim");
  const int cond_dim = require_int(doc, "cond_dim");
  if (cond_dim < 0 || input_dim != 2 + cond_dim) {
    throw SchemaError("model: input_dim must equal 2 + cond_dim");
  }

  if (!doc.contains("hidden") || !doc.at("hidden").is_array() || doc.at("hidden").empty()) {
    throw SchemaError("model: missing non-empty array field 'hidden'");
  }
  const json& hidden_doc = doc.at("hidden");
  if (hidden_doc.size() > static_cast<std::size_t>(kMaxHiddenLayers)) {
    throw LayerBudgetExceeded("model: more than 8 hidden layers");
  }

  // Width comes from the first layer's bias count.
  if (!hidden_doc[0].is_object() || !hidden_doc[0].contains("biases") ||
      !hidden_doc[0].at("biases").is_array()) {
    throw SchemaError("model: first hidden layer must carry a bias array");
  }
  const int width = static_cast<int>(hidden_doc[0].at("biases").size());
  if (width < 1) throw SchemaError("model: hidden width must be positive");
  if (width > kMaskCapacity) throw MaskOverflow("model: hidden width above 64");

  std::vector<Layer> hidden;
  hidden.reserve(hidden_doc.size());
  for (std::size_t l = 0; l < hidden_doc.size(); ++l) {
    const int in_dim = (l == 0) ? input_dim : width;
    hidden.push_back(layer_from_json(hidden_doc[l], width, in_dim, "hidden"));
  }

  if (!doc.contains("output") || !doc.at("output").is_object()) {
    throw SchemaError("model: missing object field 'output'");
  }
  if (!doc.at("output").contains("biases") || !doc.at("output").at("biases").is_array()) {
    throw SchemaError("model: output layer must carry a bias array");
  }
  const int out_dim = static_cast<int>(doc.at("output").at("biases").size());
  if (out_dim < 1) throw SchemaError("model: output dimension must be positive");
  Layer output = layer_from_json(doc.at("output"), out_dim, width, "output");

  return Mlp(std::move(hidden), std::move(output), activation, cond_dim);
}

void save_model_file(const Mlp& mlp, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("model: cannot open " + path + " for writing");
  const std::string text = save_model(mlp);
  file.write(text.data(), static_cast<std::streamsize>(text.size()));
}

Mlp load_model_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error("model: cannot open " + path);
  std::ostringstream buf;
  buf << file.rdbuf();
  return load_model(buf.str());
}

}  // namespace mlpcv
