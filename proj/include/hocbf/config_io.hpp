#ifndef HOCBF_CONFIG_IO_HPP
#define HOCBF_CONFIG_IO_HPP

#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "hocbf/errors.hpp"
#include "hocbf/sim.hpp"

namespace hocbf {

using nlohmann::json;

// =========================================================================
// Scenario configs are JSON documents checked against a small embedded
// schema (key set + type + required flag per block) before any values are
// interpreted.  Unknown keys are rejected so typos fail loudly instead of
// silently falling back to defaults.  The same schema ships with the repo
// as a document; a test pins the two together.
// =========================================================================

namespace schema_detail {

struct Field {
  const char* type;  // "number", "integer", "string", "array", "object"
  bool required;
};

using Block = std::map<std::string, Field>;

inline const Block& top_level() {
  static const Block block{
      {"name", {"string", false}},
      {"plant", {"object", false}},
      {"disturbance_channel", {"string", false}},
      {"controller", {"string", true}},
      {"barrier", {"object", false}},
      {"clf", {"object", false}},
      {"nominal", {"object", false}},
      {"tissf", {"object", false}},
      {"disturbance", {"object", false}},
      {"reference", {"string", false}},
      {"initial_state", {"array", false}},
      {"dt", {"number", true}},
      {"horizon", {"number", true}},
      {"seed", {"integer", false}},
  };
  return block;
}

inline const std::map<std::string, Block>& blocks() {
  static const std::map<std::string, Block> all{
      {"plant",
       {{"gravity", {"number", false}},
        {"length", {"number", false}},
        {"spring", {"number", false}},
        {"cart_mass", {"number", false}},
        {"pend_mass", {"number", false}},
        {"pivot", {"number", false}},
        {"spacing", {"number", false}}}},
      {"barrier",
       {{"theta_lower", {"array", true}},
        {"beta1", {"object", false}},
        {"beta2", {"object", false}}}},
      {"clf",
       {{"eta", {"object", false}},
        {"alpha1", {"object", false}},
        {"rho", {"number", false}}}},
      {"nominal", {{"k1", {"number", false}}, {"k2", {"number", false}}}},
      {"tissf",
       {{"epsilon0", {"number", false}},
        {"varsigma", {"number", false}},
        {"gamma", {"number", false}},
        {"form", {"string", false}}}},
      {"disturbance",
       {{"profile", {"string", true}},
        {"value", {"array", false}},
        {"frequency", {"number", false}},
        {"phase", {"number", false}}}},
      {"classk",
       {{"kind", {"string", true}},
        {"gain", {"number", true}},
        {"exponent", {"integer", false}}}},
  };
  return all;
}

inline bool type_matches(const json& v, const std::string& type) {
  if (type == "number") return v.is_number();
  if (type == "integer") return v.is_number_integer();
  if (type == "string") return v.is_string();
  if (type == "array") return v.is_array();
  if (type == "object") return v.is_object();
  return false;
}

inline void check_block(const json& obj, const Block& block,
                        const std::string& where) {
  if (!obj.is_object())
    throw ConfigError("config section '" + where + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    auto it = block.find(key);
    if (it == block.end())
      throw ConfigError("unknown key '" + key + "' in " + where);
    if (!type_matches(value, it->second.type))
      throw ConfigError("key '" + key + "' in " + where + " must be " +
                        it->second.type);
  }
  for (const auto& [key, field] : block)
    if (field.required && !obj.contains(key))
      throw ConfigError("missing required key '" + key + "' in " + where);
}

}  // namespace schema_detail

// Structural pass only; value ranges are checked by validate(Scenario).
inline void validate_config(const json& cfg) {
  schema_detail::check_block(cfg, schema_detail::top_level(), "top level");
  const auto& blocks = schema_detail::blocks();
  for (const char* section : {"plant", "barrier", "clf", "nominal", "tissf",
                              "disturbance"})
    if (cfg.contains(section))
      schema_detail::check_block(cfg.at(section), blocks.at(section), section);
  for (const char* section : {"barrier", "clf"})
    if (cfg.contains(section))
      for (const char* fn : {"beta1", "beta2", "eta", "alpha1"})
        if (cfg.at(section).contains(fn))
          schema_detail::check_block(cfg.at(section).at(fn), blocks.at("classk"),
                                     std::string(section) + "." + fn);
}

// Machine-readable rendering of the embedded schema; the shipped schema
// document is exactly this object.
inline json schema_document() {
  const auto render_block = [](const schema_detail::Block& block) {
    json out = json::object();
    for (const auto& [key, field] : block)
      out[key] = {{"type", field.type}, {"required", field.required}};
    return out;
  };
  json doc;
  doc["format"] = "scenario-config";
  doc["version"] = 1;
  doc["top_level"] = render_block(schema_detail::top_level());
  for (const auto& [name, block] : schema_detail::blocks())
    doc["sections"][name] = render_block(block);
  return doc;
}

namespace config_detail {

inline ClassKSpec parse_classk(const json& obj) {
  ClassKSpec spec;
  spec.kind = classk_kind_from_string(obj.at("kind").get<std::string>());
  spec.gain = obj.at("gain").get<double>();
  if (obj.contains("exponent")) spec.exponent = obj.at("exponent").get<int>();
  validate(spec);
  return spec;
}

inline Eigen::VectorXd parse_vector(const json& arr, int expected,
                                    const std::string& where) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != expected)
    throw ConfigError(where + " must be an array of " +
                      std::to_string(expected) + " numbers");
  Eigen::VectorXd v(expected);
  for (int i = 0; i < expected; ++i) {
    if (!arr[i].is_number()) throw ConfigError(where + " must hold numbers");
    v(i) = arr[i].get<double>();
  }
  return v;
}

}  // namespace config_detail

inline Scenario parse_scenario(const json& cfg) {
  validate_config(cfg);
  Scenario sc;
  if (cfg.contains("name")) sc.name = cfg.at("name").get<std::string>();
  if (cfg.contains("plant")) {
    const json& p = cfg.at("plant");
    if (p.contains("gravity")) sc.plant.gravity = p.at("gravity").get<double>();
    if (p.contains("length")) sc.plant.length = p.at("length").get<double>();
    if (p.contains("spring")) sc.plant.spring = p.at("spring").get<double>();
    if (p.contains("cart_mass")) sc.plant.cart_mass = p.at("cart_mass").get<double>();
    if (p.contains("pend_mass")) sc.plant.pend_mass = p.at("pend_mass").get<double>();
    if (p.contains("pivot")) sc.plant.pivot = p.at("pivot").get<double>();
    if (p.contains("spacing")) sc.plant.spacing = p.at("spacing").get<double>();
  }
  if (cfg.contains("disturbance_channel"))
    sc.channel = channel_from_string(cfg.at("disturbance_channel").get<std::string>());
  sc.controller = controller_from_string(cfg.at("controller").get<std::string>());

  sc.has_barrier = cfg.contains("barrier");
  if (sc.has_barrier) {
    const json& b = cfg.at("barrier");
    const Eigen::VectorXd tl =
        config_detail::parse_vector(b.at("theta_lower"), 2, "theta_lower");
    sc.theta_lower = {tl(0), tl(1)};
    if (b.contains("beta1")) sc.beta1 = config_detail::parse_classk(b.at("beta1"));
    if (b.contains("beta2")) sc.beta2 = config_detail::parse_classk(b.at("beta2"));
  }
  sc.has_clf = cfg.contains("clf");
  if (sc.has_clf) {
    const json& c = cfg.at("clf");
    if (c.contains("eta")) sc.eta = config_detail::parse_classk(c.at("eta"));
    if (c.contains("alpha1")) sc.alpha1 = config_detail::parse_classk(c.at("alpha1"));
    if (c.contains("rho")) sc.rho = c.at("rho").get<double>();
  }
  sc.has_nominal = cfg.contains("nominal");
  if (sc.has_nominal) {
    const json& nom = cfg.at("nominal");
    if (nom.contains("k1")) sc.k1 = nom.at("k1").get<double>();
    if (nom.contains("k2")) sc.k2 = nom.at("k2").get<double>();
  }
  if (cfg.contains("tissf")) {
    const json& tf = cfg.at("tissf");
    if (tf.contains("epsilon0")) sc.tissf.epsilon0 = tf.at("epsilon0").get<double>();
    if (tf.contains("varsigma")) sc.tissf.varsigma = tf.at("varsigma").get<double>();
    if (tf.contains("gamma")) sc.tissf.gamma = tf.at("gamma").get<double>();
    if (tf.contains("form"))
      sc.tissf.form = tunable_form_from_string(tf.at("form").get<std::string>());
  }
  if (cfg.contains("disturbance")) {
    const json& d = cfg.at("disturbance");
    const std::string profile = d.at("profile").get<std::string>();
    if (profile == "zero") {
      sc.disturbance.kind = DisturbanceProfile::Kind::Zero;
    } else if (profile == "constant" || profile == "sinusoid") {
      sc.disturbance.kind = profile == "constant"
                                ? DisturbanceProfile::Kind::Constant
                                : DisturbanceProfile::Kind::Sinusoid;
      if (!d.contains("value"))
        throw ConfigError("disturbance profile '" + profile + "' needs a value");
      sc.disturbance.value =
          config_detail::parse_vector(d.at("value"), 2, "disturbance.value");
      if (d.contains("frequency"))
        sc.disturbance.frequency = d.at("frequency").get<double>();
      if (d.contains("phase")) sc.disturbance.phase = d.at("phase").get<double>();
    } else {
      throw ConfigError("unknown disturbance profile: " + profile);
    }
  }
  if (cfg.contains("reference"))
    sc.reference_name = cfg.at("reference").get<std::string>();
  if (cfg.contains("initial_state"))
    sc.x0 = config_detail::parse_vector(cfg.at("initial_state"), 4, "initial_state");
  sc.dt = cfg.at("dt").get<double>();
  sc.horizon = cfg.at("horizon").get<double>();
  if (cfg.contains("seed")) sc.seed = cfg.at("seed").get<std::uint64_t>();

  validate(sc);
  return sc;
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_scenario(cfg);
}

// Sweepable scalar parameters, addressed by name.
inline void set_parameter(Scenario& sc, const std::string& name, double value) {
  if (name == "epsilon0") sc.tissf.epsilon0 = value;
  else if (name == "varsigma") sc.tissf.varsigma = value;
  else if (name == "gamma") sc.tissf.gamma = value;
  else if (name == "rho") sc.rho = value;
  else if (name == "k1") sc.k1 = value;
  else if (name == "k2") sc.k2 = value;
  else throw ConfigError("unknown sweep parameter: " + name);
  validate(sc);
}

}  // namespace hocbf

#endif  // HOCBF_CONFIG_IO_HPP
