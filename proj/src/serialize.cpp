#include "mononet/serialize.hpp"

#include <nlohmann/json.hpp>

namespace mononet {

using nlohmann::json;

namespace {

const char* activation_name(ActivationKind k) {
  switch (k) {
    case ActivationKind::ReLU:
      return "relu";
    case ActivationKind::Exp:
      return "exp";
    case ActivationKind::Identity:
      return "identity";
  }
  return "?";
}

ActivationKind activation_from_name(const std::string& s) {
  if (s == "relu") return ActivationKind::ReLU;
  if (s == "exp") return ActivationKind::Exp;
  if (s == "identity") return ActivationKind::Identity;
  throw parse_error("unknown activation '" + s + "'");
}

json vector_to_json(const VectorR& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_decimal_string(v(i)));
  return a;
}

VectorR vector_from_json(const json& a) {
  if (!a.is_array()) throw parse_error("expected array of decimal strings");
  VectorR v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = from_decimal_string(a[i].get<std::string>());
  return v;
}

}  // namespace

std::string serialize(const ShallowExpSum& net) {
  json j;
  j["kind"] = "shallow_exp";
  j["d"] = net.d;
  j["precision_bits"] = net.precision_bits_used;
  json terms = json::array();
  for (const auto& t : net.terms) {
    terms.push_back({{"nu", to_decimal_string(t.nu)}, {"w", vector_to_json(t.w)}});
  }
  j["terms"] = std::move(terms);
  return j.dump(2);
}

std::string serialize(const LayeredNetwork& net) {
  json j;
  j["kind"] = "layered";
  j["d"] = net.d;
  j["precision_bits"] = precision_bits();
  // Hidden layers share one activation in this format; the output layer is
  // always identity and is stored as the last entry.
  ActivationKind hidden = net.layers.front().activation;
  j["activation"] = activation_name(hidden);
  json layers = json::array();
  for (const auto& l : net.layers) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c)
        row.push_back(to_decimal_string(l.weights(r, c)));
      rows.push_back(std::move(row));
    }
    layers.push_back({{"weights", std::move(rows)}, {"bias", vector_to_json(l.bias)}});
  }
  j["layers"] = std::move(layers);
  return j.dump(2);
}

std::string serialize(const NetworkValue& net) {
  return std::visit([](const auto& n) { return serialize(n); }, net);
}

NetworkValue deserialize(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw parse_error(std::string("invalid JSON: ") + e.what());
  }
  try {
    if (!j.contains("kind")) throw parse_error("missing 'kind' field");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "shallow_exp") {
      ShallowExpSum net;
      net.d = j.at("d").get<Eigen::Index>();
      net.precision_bits_used = j.value("precision_bits", 256u);
      for (const auto& t : j.at("terms")) {
        Real nu = from_decimal_string(t.at("nu").get<std::string>());
        VectorR w = vector_from_json(t.at("w"));
        if (w.size() != net.d) throw parse_error("term weight vector has wrong length");
        net.terms.push_back({std::move(nu), std::move(w)});
      }
      return net;
    }
    if (kind == "layered") {
      LayeredNetwork net;
      net.d = j.at("d").get<Eigen::Index>();
      ActivationKind hidden = activation_from_name(j.at("activation").get<std::string>());
      const auto& layers = j.at("layers");
      for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& jl = layers[i];
        const auto& rows = jl.at("weights");
        LayeredNetwork::Layer l;
        l.activation = (i + 1 == layers.size()) ? ActivationKind::Identity : hidden;
        l.bias = vector_from_json(jl.at("bias"));
        Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
        Eigen::Index nc = nr > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
        l.weights.resize(nr, nc);
        for (Eigen::Index r = 0; r < nr; ++r) {
          if (static_cast<Eigen::Index>(rows[r].size()) != nc)
            throw parse_error("ragged weight matrix in layer " + std::to_string(i));
          for (Eigen::Index c = 0; c < nc; ++c)
            l.weights(r, c) = from_decimal_string(rows[r][c].get<std::string>());
        }
        net.layers.push_back(std::move(l));
      }
      net.validate();
      return net;
    }
    throw parse_error("unknown kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw parse_error(std::string("malformed network document: ") + e.what());
  }
}

}  // namespace mononet
