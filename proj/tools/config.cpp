#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "app.hpp"
#include "qgphase/errors.hpp"

namespace qgphase::cli {

namespace {

constexpr const char* kSchemaText = R"json({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "qgphase scenario config",
  "type": "object",
  "additionalProperties": false,
  "required": ["scenario"],
  "definitions": {
    "vec3": {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3},
    "complex": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2,
                "description": "[real, imaginary]"},
    "branch": {
      "type": "object", "additionalProperties": false, "required": ["amplitude", "center"],
      "properties": {
        "amplitude": {"$ref": "#/definitions/complex"},
        "center": {"$ref": "#/definitions/vec3", "description": "m"},
        "sigma": {"type": "number", "minimum": 0, "default": 0, "description": "m; 0 is a point mass"}
      }
    },
    "source": {
      "type": "object", "additionalProperties": false, "required": ["mass", "branches"],
      "properties": {
        "mass": {"type": "number", "exclusiveMinimum": 0, "description": "kg"},
        "branches": {"type": "array", "items": {"$ref": "#/definitions/branch"}, "minItems": 1}
      }
    },
    "density": {
      "type": "object", "additionalProperties": false, "required": ["kind"],
      "properties": {
        "kind": {"enum": ["point", "gaussian", "file"]},
        "mass": {"type": "number", "minimum": 0, "default": 1e-14, "description": "kg"},
        "center": {"$ref": "#/definitions/vec3", "default": [0, 0, 0]},
        "sigma": {"type": "number", "minimum": 0, "default": 0, "description": "m"},
        "file": {"type": "string", "description": "grid file base path (<base>.json + <base>.bin)"}
      }
    },
    "time_range": {
      "type": "object", "additionalProperties": false,
      "properties": {
        "min": {"type": "number", "exclusiveMinimum": 0},
        "max": {"type": "number", "exclusiveMinimum": 0},
        "count": {"type": "integer", "minimum": 2}
      },
      "required": ["min", "max", "count"]
    }
  },
  "properties": {
    "scenario": {"enum": ["phase-compare", "poisson", "overlap-sweep", "opalg-verify", "negativity"]},
    "description": {"type": "string"},
    "seed": {"type": "integer", "minimum": 0, "default": 12345},
    "output": {"type": "string", "default": "out"},
    "constants": {
      "type": "object", "additionalProperties": false, "default": {},
      "properties": {
        "G": {"type": "number", "exclusiveMinimum": 0, "default": 6.6743e-11},
        "c": {"type": "number", "exclusiveMinimum": 0, "default": 299792458},
        "hbar": {"type": "number", "exclusiveMinimum": 0, "default": 1.054571817e-34},
        "mass_scale": {"type": "number", "exclusiveMinimum": 0, "default": 1e-14, "description": "kg per natural mass unit"},
        "length_scale": {"type": "number", "exclusiveMinimum": 0, "default": 1e-4, "description": "m per natural length unit"}
      }
    },
    "grid": {
      "type": "object", "additionalProperties": false, "default": {},
      "properties": {
        "n": {"type": "integer", "minimum": 2, "default": 32},
        "length": {"type": "number", "exclusiveMinimum": 0, "default": 1e-3, "description": "m"}
      }
    },
    "coulomb": {
      "type": "object", "additionalProperties": false, "default": {},
      "properties": {
        "backend": {"enum": ["analytic", "spectral", "direct", "monte-carlo"], "default": "spectral"},
        "mc_samples": {"type": "integer", "minimum": 1, "default": 1000000}
      }
    },
    "time": {"type": "number", "minimum": 0, "default": 1.0, "description": "s"},
    "sources": {
      "type": "object", "additionalProperties": false, "required": ["a", "b"],
      "properties": {"a": {"$ref": "#/definitions/source"}, "b": {"$ref": "#/definitions/source"}}
    },
    "phase_compare": {
      "type": "object", "additionalProperties": false, "default": {},
      "properties": {
        "convergence_fractions": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "default": []}
      }
    },
    "poisson": {
      "type": "object", "additionalProperties": false, "required": ["source"],
      "properties": {
        "source": {"$ref": "#/definitions/density"},
        "solver": {"enum": ["spectral", "direct"], "default": "spectral"},
        "compare_direct": {"type": "boolean", "default": false},
        "write_grid": {"type": "boolean", "default": true}
      }
    },
    "overlap_sweep": {
      "type": "object", "additionalProperties": false, "required": ["displacements", "widths", "grid_sizes"],
      "description": "lengths in m, regularisation widths w in natural units",
      "properties": {
        "position": {"$ref": "#/definitions/vec3", "default": [0, 0, 0]},
        "direction": {"$ref": "#/definitions/vec3", "default": [1, 0, 0]},
        "displacements": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
        "base_displacement": {"type": "number", "minimum": 0},
        "widths": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
        "grid_sizes": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
        "mass": {"type": "number", "exclusiveMinimum": 0, "default": 1e-14, "description": "kg"},
        "matter_width": {"type": "number", "exclusiveMinimum": 0, "default": 1e-5, "description": "m"},
        "sigma_reg": {"type": "number", "minimum": 0, "default": 0, "description": "m; 0 is two grid cells"},
        "random_pairs": {"type": "integer", "minimum": 0, "default": 100}
      }
    },
    "opalg_verify": {
      "type": "object", "additionalProperties": false, "required": ["modes", "branches", "hT_shift"],
      "description": "natural units throughout (c = 1, G and hbar from the constants block)",
      "properties": {
        "modes": {
          "type": "array", "minItems": 1, "maxItems": 3,
          "items": {
            "type": "object", "additionalProperties": false, "required": ["k"],
            "properties": {
              "k": {"$ref": "#/definitions/vec3"},
              "polarisation": {"enum": [0, 1], "default": 0},
              "dim": {"type": "integer", "minimum": 3, "default": 40}
            }
          }
        },
        "mode_weight": {"type": "number", "exclusiveMinimum": 0, "default": 1.0},
        "branches": {
          "type": "array", "minItems": 2,
          "items": {
            "type": "object", "additionalProperties": false, "required": ["tensors"],
            "properties": {
              "energy": {"type": "number", "default": 0},
              "tensors": {"type": "array", "minItems": 1,
                          "items": {"type": "array", "items": {"type": "number"}, "minItems": 6, "maxItems": 6},
                          "description": "per mode: xx, yy, zz, xy, xz, yz"}
            }
          }
        },
        "hT_shift": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "zassenhaus_times": {"$ref": "#/definitions/time_range", "default": {"min": 1e-3, "max": 1e-2, "count": 6}},
        "phase_times": {"$ref": "#/definitions/time_range", "default": {"min": 1e-2, "max": 1e-1, "count": 6}}
      }
    },
    "negativity": {
      "type": "object", "additionalProperties": false, "required": ["amplitudes_a", "amplitudes_b", "theta"],
      "properties": {
        "amplitudes_a": {"type": "array", "items": {"$ref": "#/definitions/complex"}, "minItems": 1},
        "amplitudes_b": {"type": "array", "items": {"$ref": "#/definitions/complex"}, "minItems": 1},
        "theta": {"type": "array", "items": {"type": "array", "items": {"$ref": "#/definitions/complex"}},
                  "description": "theta[i][j] = [damping, phase (rad)]"}
      }
    }
  }
})json";

const char* block_for(const std::string& scenario) {
  if (scenario == "phase-compare") return "sources";
  if (scenario == "poisson") return "poisson";
  if (scenario == "overlap-sweep") return "overlap_sweep";
  if (scenario == "opalg-verify") return "opalg_verify";
  return "negativity";
}

std::string type_name(const json& v) {
  if (v.is_number_integer()) return "integer";
  if (v.is_number()) return "number";
  return v.type_name();
}

bool type_matches(const std::string& t, const json& v) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "integer") return v.is_number_integer();
  if (t == "number") return v.is_number();
  return false;
}

const json& resolve(const json& node) {
  if (!node.contains("$ref")) return node;
  const std::string ref = node["$ref"];
  const std::string prefix = "#/definitions/";
  if (ref.rfind(prefix, 0) != 0) throw ConfigError("schema: unsupported reference " + ref);
  return schema()["definitions"][ref.substr(prefix.size())];
}

void check(const json& node_in, json& v, const std::string& where) {
  const json& node = resolve(node_in);
  auto fail = [&](const std::string& msg) { throw ConfigError((where.empty() ? "/" : where) + ": " + msg); };
  if (node.contains("type") && !type_matches(node["type"], v))
    fail("expected " + node["type"].get<std::string>() + ", got " + type_name(v));
  if (node.contains("enum")) {
    bool ok = false;
    for (const auto& e : node["enum"]) ok = ok || e == v;
    if (!ok) fail("value " + v.dump() + " not in " + node["enum"].dump());
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail("number must be finite");
    if (node.contains("minimum") && x < node["minimum"].get<double>()) fail("must be >= " + node["minimum"].dump());
    if (node.contains("exclusiveMinimum") && !(x > node["exclusiveMinimum"].get<double>()))
      fail("must be > " + node["exclusiveMinimum"].dump());
  }
  if (v.is_array()) {
    if (node.contains("minItems") && v.size() < node["minItems"].get<std::size_t>())
      fail("needs at least " + node["minItems"].dump() + " items");
    if (node.contains("maxItems") && v.size() > node["maxItems"].get<std::size_t>())
      fail("allows at most " + node["maxItems"].dump() + " items");
    if (node.contains("items"))
      for (std::size_t i = 0; i < v.size(); ++i) check(node["items"], v[i], where + "/" + std::to_string(i));
  }
  if (v.is_object()) {
    const json props = node.value("properties", json::object());
    if (node.value("additionalProperties", true) == false) {
      for (const auto& [key, _] : v.items())
        if (!props.contains(key)) fail("unknown field '" + key + "'");
    }
    if (node.contains("required"))
      for (const auto& r : node["required"])
        if (!v.contains(r.get<std::string>())) fail("missing required field '" + r.get<std::string>() + "'");
    for (const auto& [key, sub] : props.items()) {
      const json& rs = resolve(sub);
      if (!v.contains(key)) {
        if (sub.contains("default")) v[key] = sub["default"];
        else if (rs.contains("default")) v[key] = rs["default"];
        else continue;
      }
      check(sub, v[key], where + "/" + key);
    }
  }
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()) && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json branch(double re, const std::array<double, 3>& c, double sigma) {
  return {{"amplitude", {re, 0.0}}, {"center", c}, {"sigma", sigma}};
}

// Linear GIE geometry: A at {-325, -125} um, B at {125, 325} um; nearest pair 250 um apart.
json gie_sources(double sigma) {
  const double r = std::numbers::sqrt2 / 2.0;
  return {{"a", {{"mass", 1e-14}, {"branches", {branch(r, {-3.25e-4, 0, 0}, sigma), branch(r, {-1.25e-4, 0, 0}, sigma)}}}},
          {"b", {{"mass", 1e-14}, {"branches", {branch(r, {1.25e-4, 0, 0}, sigma), branch(r, {3.25e-4, 0, 0}, sigma)}}}}};
}

json natural_constants(double G) {
  return {{"G", G}, {"c", 1.0}, {"hbar", 1.0}, {"mass_scale", 1.0}, {"length_scale", 1.0}};
}

std::vector<Preset> make_presets() {
  std::vector<Preset> p;
  p.push_back({"gie-2x2", "two 1e-14 kg masses in 250 um superpositions, t = 2.5 s, narrow widths",
               {{"scenario", "phase-compare"},
                {"seed", 12345},
                {"output", "out/gie-2x2"},
                {"grid", {{"n", 32}, {"length", 1e-3}}},
                {"coulomb", {{"backend", "analytic"}}},
                {"time", 2.5},
                {"sources", gie_sources(5e-6)},
                {"phase_compare", {{"convergence_fractions", {0.2, 0.1, 0.05, 0.025}}}}}});
  p.push_back({"wide-gaussian-pair", "GIE geometry with Gaussian widths of half the nearest separation",
               {{"scenario", "phase-compare"},
                {"seed", 12345},
                {"output", "out/wide-gaussian-pair"},
                {"grid", {{"n", 32}, {"length", 2e-3}}},
                {"coulomb", {{"backend", "spectral"}}},
                {"time", 2.5},
                {"sources", gie_sources(1.25e-4)}}});
  p.push_back({"sn-vs-full", "Schroedinger-Newton against the full phase matrix, Monte-Carlo quadrature",
               {{"scenario", "phase-compare"},
                {"seed", 2024},
                {"output", "out/sn-vs-full"},
                {"grid", {{"n", 32}, {"length", 1e-3}}},
                {"coulomb", {{"backend", "monte-carlo"}, {"mc_samples", 200000}}},
                {"time", 2.5},
                {"sources", gie_sources(6.25e-5)}}});
  p.push_back({"semiclassical-overlap", "displaced-source overlap against regularisation width and grid size",
               {{"scenario", "overlap-sweep"},
                {"seed", 7},
                {"output", "out/semiclassical-overlap"},
                {"constants", natural_constants(1.0)},
                {"grid", {{"n", 8}, {"length", 1.0}}},
                {"overlap_sweep",
                 {{"position", {0.0, 0.0, 0.0}},
                  {"direction", {1.0, 0.0, 0.0}},
                  {"displacements", {0.0, 0.025, 0.05, 0.1, 0.2}},
                  {"base_displacement", 0.1},
                  {"widths", {0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125}},
                  {"grid_sizes", {8, 16, 32}},
                  {"mass", 1.0},
                  {"matter_width", 0.1},
                  {"random_pairs", 100}}}}});
  const double a0 = 0.3 / std::numbers::sqrt2, a1 = 1.1 / std::numbers::sqrt2;
  p.push_back({"zassenhaus-t3", "single TT mode, D = 40, two-branch probe: order and commutator-phase fits",
               {{"scenario", "opalg-verify"},
                {"seed", 1},
                {"output", "out/zassenhaus-t3"},
                {"constants", natural_constants(0.7 / (16.0 * std::numbers::pi))},
                {"opalg_verify",
                 {{"modes", {{{"k", {0.0, 0.0, 1.0}}, {"polarisation", 0}, {"dim", 40}}}},
                  {"mode_weight", 1.0},
                  {"branches",
                   {{{"energy", 0.0}, {"tensors", {{a0, -a0, 0.0, 0.0, 0.0, 0.0}}}},
                    {{"energy", 0.37}, {"tensors", {{a1, -a1, 0.0, 0.0, 0.0, 0.0}}}}}},
                  {"hT_shift", {0.8}},
                  {"zassenhaus_times", {{"min", 1e-3}, {"max", 1e-2}, {"count", 6}}},
                  {"phase_times", {{"min", 1e-2}, {"max", 1e-1}, {"count", 6}}}}}}});
  return p;
}

}  // namespace

const json& schema() {
  static const json s = json::parse(kSchemaText);
  return s;
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> p = make_presets();
  return p;
}

const Preset& preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  throw ConfigError("unknown preset '" + name + "'");
}

json parse_config(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    std::string msg = e.what();
    const auto colon = msg.find(": ", msg.find("parse error"));
    if (colon != std::string::npos) msg = msg.substr(colon + 2);
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects path=value, got '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &config;
  std::stringstream ss(path);
  std::string seg;
  std::vector<std::string> segs;
  while (std::getline(ss, seg, '.')) segs.push_back(seg);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const std::string& s = segs[i];
    if (s.empty()) throw ConfigError("--set: empty path segment in '" + path + "'");
    json* next = nullptr;
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(s);
      } catch (const std::exception&) {
        throw ConfigError("--set: '" + s + "' is not an array index in '" + path + "'");
      }
      if (idx >= node->size()) throw ConfigError("--set: index " + s + " out of range in '" + path + "'");
      next = &(*node)[idx];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) throw ConfigError("--set: '" + path + "' descends into a scalar");
      next = &(*node)[s];
    }
    node = next;
  }
  if (node->is_object() || (node->is_array() && !value.is_array()))
    throw ConfigError("--set: '" + path + "' is not a scalar field");
  *node = value;
}

void validate(json& config) {
  if (!config.is_object()) throw ConfigError("/: config must be a JSON object");
  const bool had_phase_compare = config.contains("phase_compare");
  check(schema(), config, "");
  const std::string scenario = config["scenario"];
  const std::string mine = block_for(scenario);
  for (const char* other : {"sources", "poisson", "overlap_sweep", "opalg_verify", "negativity"}) {
    if (mine == other && !config.contains(other)) throw ConfigError("/" + mine + ": required by scenario " + scenario);
    if (mine != other && config.contains(other))
      throw ConfigError("/" + std::string(other) + ": block does not belong to scenario " + scenario);
  }
  if (scenario != "phase-compare") {
    if (had_phase_compare) throw ConfigError("/phase_compare: block does not belong to scenario " + scenario);
    config.erase("phase_compare");
  }
  if (scenario == "poisson") {
    const auto& src = config["poisson"]["source"];
    if (src["kind"] == "file") {
      if (!src.contains("file")) throw ConfigError("/poisson/source: kind 'file' needs a 'file' path");
      const std::string base = src["file"];
      for (const char* ext : {".json", ".bin"})
        if (!std::filesystem::exists(base + ext)) throw ConfigError("/poisson/source/file: " + base + ext + " does not exist");
    }
  }
  if (scenario == "opalg-verify") {
    const auto& o = config["opalg_verify"];
    const std::size_t modes = o["modes"].size();
    if (o["hT_shift"].size() != modes) throw ConfigError("/opalg_verify/hT_shift: one entry per mode required");
    for (std::size_t b = 0; b < o["branches"].size(); ++b)
      if (o["branches"][b]["tensors"].size() != modes)
        throw ConfigError("/opalg_verify/branches/" + std::to_string(b) + "/tensors: one tensor per mode required");
  }
  if (scenario == "negativity") {
    const auto& n = config["negativity"];
    if (n["theta"].size() != n["amplitudes_a"].size())
      throw ConfigError("/negativity/theta: one row per amplitude of A required");
    for (std::size_t i = 0; i < n["theta"].size(); ++i)
      if (n["theta"][i].size() != n["amplitudes_b"].size())
        throw ConfigError("/negativity/theta/" + std::to_string(i) + ": one entry per amplitude of B required");
  }
}

}  // namespace qgphase::cli
