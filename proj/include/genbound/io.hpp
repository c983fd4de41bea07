#ifndef GENBOUND_IO_HPP
#define GENBOUND_IO_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "genbound/analysis.hpp"
#include "genbound/bounds.hpp"
#include "genbound/chain.hpp"
#include "genbound/deepnet.hpp"
#include "genbound/empirical.hpp"
#include "genbound/error.hpp"
#include "genbound/reduce.hpp"
#include "genbound/verify.hpp"

namespace genbound::io {

using json = nlohmann::ordered_json;

inline constexpr const char* kSchema = "genbound/1";

// ------------------------------------------------------------- reading

/// Malformed text and numeric overflow both surface as ParseError.
inline json parse_text(const std::string& text, const std::string& field, const std::string& origin = "input") {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, origin + ": " + e.what(), field);
  }
}

inline json load_json(const std::filesystem::path& path, const std::string& field) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::ParseError, "cannot open " + path.string(), field);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), field, path.string());
}

inline double number(const json& j, const std::string& field) {
  require(j.is_number(), ErrorCode::ParseError, field + " must be a number", field);
  const double v = j.get<double>();
  require(std::isfinite(v), ErrorCode::ParseError, field + " is not finite", field);
  return v;
}

inline Eigen::VectorXd vector(const json& j, const std::string& field) {
  require(j.is_array(), ErrorCode::ParseError, field + " must be an array", field);
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], field + "[" + std::to_string(i) + "]");
  return v;
}

inline std::vector<double> doubles(const json& j, const std::string& field) {
  const auto v = vector(j, field);
  return {v.data(), v.data() + v.size()};
}

inline Eigen::MatrixXd matrix(const json& j, const std::string& field) {
  require(j.is_array() && !j.empty(), ErrorCode::ParseError, field + " must be a non-empty array of rows", field);
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string rf = field + "[" + std::to_string(r) + "]";
    require(j[r].is_array(), ErrorCode::ParseError, rf + " must be an array", rf);
    require(j[r].size() == cols, ErrorCode::DimensionMismatch,
            rf + " has " + std::to_string(j[r].size()) + " entries, expected " + std::to_string(cols), rf);
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(j[r][c], rf + "[" + std::to_string(c) + "]");
  }
  return m;
}

inline const json& member(const json& j, const char* key, const std::string& where) {
  require(j.is_object(), ErrorCode::ParseError, where + " must be a JSON object", where);
  require(j.contains(key), ErrorCode::ParseError, where + " has no \"" + key + "\" member", key);
  return j.at(key);
}

/// A chain file with its optional HMM emission.
struct ChainFile {
  ChainSpec chain;
  std::optional<Eigen::MatrixXd> emission;
  std::vector<std::string> labels;

  /// The chain the analysis runs on: the (state, label) lift when an emission is given.
  ChainSpec effective() const { return emission ? lift_hmm(chain, *emission, labels) : chain; }
};

namespace detail {

/// Field name for a validate_chain message: "Q[r][c]", "Q[r]" for a row sum, "nu" or "nu[i]".
inline std::string violation_field(const std::string& msg) {
  if (msg.rfind("row ", 0) == 0) return "Q[" + msg.substr(4, msg.find(' ', 4) - 4) + "]";
  const auto stop = msg.find(' ');
  const std::string head = msg.substr(0, stop);
  if (head.rfind("Q", 0) == 0 || head.rfind("nu", 0) == 0 || head == "states") return head;
  return "Q";
}

}  // namespace detail

inline ChainFile parse_chain(const json& j) {
  ChainFile f;
  f.chain.Q = matrix(member(j, "Q", "chain"), "Q");
  f.chain.nu = vector(member(j, "nu", "chain"), "nu");
  if (j.contains("states")) {
    const json& s = j.at("states");
    require(s.is_array(), ErrorCode::ParseError, "states must be an array", "states");
    for (const auto& e : s) f.chain.states.push_back(e.is_string() ? e.get<std::string>() : e.dump());
  } else {
    f.chain.states = default_state_names(f.chain.size());
  }
  const auto issues = validate_chain(f.chain);
  if (!issues.empty()) throw Error(ErrorCode::InvalidInput, issues.front(), detail::violation_field(issues.front()));
  if (j.contains("emission") && !j.at("emission").is_null()) f.emission = matrix(j.at("emission"), "emission");
  if (j.contains("labels")) {
    require(j.at("labels").is_array(), ErrorCode::ParseError, "labels must be an array", "labels");
    for (const auto& e : j.at("labels")) f.labels.push_back(e.is_string() ? e.get<std::string>() : e.dump());
    if (f.emission)
      require(f.labels.size() == static_cast<std::size_t>(f.emission->cols()), ErrorCode::DimensionMismatch,
              "labels must match the emission columns", "labels");
  }
  return f;
}

inline FunctionClass parse_class(const json& j) {
  const json& fs = member(j, "functions", "class");
  require(fs.is_array() && !fs.empty(), ErrorCode::ParseError, "functions must be a non-empty array", "functions");
  std::vector<Eigen::VectorXd> rows;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const std::string ff = "functions[" + std::to_string(i) + "]";
    rows.push_back(vector(member(fs[i], "values", ff), ff + ".values"));
    names.push_back(fs[i].contains("name") && fs[i]["name"].is_string() ? fs[i]["name"].get<std::string>()
                                                                      : "f" + std::to_string(i));
    require(rows.back().size() == rows.front().size(), ErrorCode::DimensionMismatch,
            ff + " has " + std::to_string(rows.back().size()) + " values, expected " + std::to_string(rows.front().size()),
            ff + ".values");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  const double M = j.contains("M") ? number(j.at("M"), "M") : -1.0;
  auto cls = make_class(m, M);
  cls.names = names;
  if (j.contains("labeled")) {
    require(j.at("labeled").is_boolean(), ErrorCode::ParseError, "labeled must be a boolean", "labeled");
    cls.labeled = j.at("labeled").get<bool>();
  }
  if (j.contains("num_labels")) cls.num_labels = static_cast<std::size_t>(number(j.at("num_labels"), "num_labels"));
  validate_class(cls, cls.states());
  return cls;
}

inline Sigmoid parse_sigmoid(const json& j, const std::string& field) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "tanh") return Sigmoid::tanh();
    if (s == "clamp") return Sigmoid::clamp();
    throw Error(ErrorCode::ParseError, "unknown sigmoid \"" + s + "\"", field);
  }
  const json& t = member(j, "table", field);
  const Eigen::MatrixXd k = matrix(t, field + ".table");
  require(k.cols() == 2, ErrorCode::ParseError, "table rows are [x, y] pairs", field + ".table");
  std::vector<std::pair<double, double>> knots;
  for (Eigen::Index r = 0; r < k.rows(); ++r) knots.emplace_back(k(r, 0), k(r, 1));
  return Sigmoid::table(std::move(knots));
}

/// Network file; a string `base` is a class file path relative to `dir`.
inline NetworkSpec parse_network(const json& j, const std::filesystem::path& dir = {}) {
  NetworkSpec net;
  const json& base = member(j, "base", "network");
  net.base = base.is_string() ? parse_class(load_json(dir / base.get<std::string>(), "base")) : parse_class(base);
  const json& layers = member(j, "layers", "network");
  require(layers.is_array(), ErrorCode::ParseError, "layers must be an array", "layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string lf = "layers[" + std::to_string(l) + "]";
    Layer layer;
    layer.sigma = layers[l].contains("sigmoid") ? parse_sigmoid(layers[l]["sigmoid"], lf + ".sigmoid") : Sigmoid::tanh();
    if (layers[l].contains("L")) layer.L = number(layers[l]["L"], lf + ".L");
    if (layers[l].contains("budget") && !layers[l]["budget"].is_null()) layer.budget = number(layers[l]["budget"], lf + ".budget");
    const json& ns = member(layers[l], "neurons", lf);
    require(ns.is_array(), ErrorCode::ParseError, lf + ".neurons must be an array", lf + ".neurons");
    for (std::size_t u = 0; u < ns.size(); ++u) {
      const std::string nf = lf + ".neurons[" + std::to_string(u) + "]";
      Neuron neuron;
      neuron.w = doubles(member(ns[u], "w", nf), nf + ".w");
      if (ns[u].contains("taps")) {
        const json& taps = ns[u]["taps"];
        require(taps.is_array(), ErrorCode::ParseError, "taps must be an array", nf + ".taps");
        for (const auto& t : taps) {
          if (t.is_array() && t.size() == 2)
            neuron.taps.push_back({static_cast<std::size_t>(number(t[0], nf + ".taps")),
                                   static_cast<std::size_t>(number(t[1], nf + ".taps"))});
          else
            neuron.taps.push_back({static_cast<std::size_t>(number(member(t, "layer", nf + ".taps"), nf + ".taps")),
                                   static_cast<std::size_t>(number(member(t, "index", nf + ".taps"), nf + ".taps"))});
        }
      }
      layer.neurons.push_back(std::move(neuron));
    }
    net.layers.push_back(std::move(layer));
  }
  validate_network(net);
  return net;
}

inline MarginLoss parse_loss(const std::string& name) {
  if (name == "ramp" || name == "ramp-upper") return MarginLoss::ramp_upper();
  if (name == "ramp-lower") return MarginLoss::ramp_lower();
  if (name == "indicator") return MarginLoss::indicator();
  throw Error(ErrorCode::InvalidLoss, "unknown loss \"" + name + "\"", "phi");
}

// ------------------------------------------------------------- writing

inline json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

inline json nums(const Eigen::VectorXd& v) { return nums(std::vector<double>(v.data(), v.data() + v.size())); }

inline json rows(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(nums(Eigen::VectorXd(m.row(r).transpose())));
  return a;
}

inline json pairs(const std::vector<std::pair<std::string, double>>& kv) {
  json o = json::object();
  for (const auto& [k, v] : kv) o[k] = num(v);
  return o;
}

inline json to_json(const Error& e) {
  json o;
  o["code"] = std::string(to_string(e.code()));
  o["field"] = e.field();
  o["message"] = e.what();
  return o;
}

inline json to_json(const ComplexityEstimate& c) {
  json o;
  o["kind"] = to_string(c.kind);
  o["value"] = num(c.value);
  o["stderr"] = num(c.stderr_);
  o["n"] = c.n;
  o["replicas"] = c.replicas;
  o["method"] = to_string(c.method);
  return o;
}

inline json to_json(const BoundRow& r) {
  json o;
  o["param"] = num(r.param);
  o["empirical"] = num(r.empirical);
  o["empirical_stderr"] = num(r.empirical_stderr);
  o["complexity"] = num(r.complexity);
  o["loglog"] = num(r.loglog);
  o["tail"] = num(r.tail);
  o["b_n"] = num(r.b_n);
  o["extra"] = num(r.extra);
  o["total"] = num(r.total);
  return o;
}

inline json to_json(const BoundReport& rep) {
  json o;
  o["theorem"] = rep.theorem;
  o["n"] = rep.n;
  o["t"] = num(rep.t);
  o["bound"] = num(rep.bound);
  o["bound_clamped"] = num(rep.bound_clamped);
  o["param_name"] = rep.param_name;
  o["argmin"] = num(rep.argmin);
  o["reported_function"] = rep.functions.empty() ? std::string() : rep.functions[rep.reported].name;
  o["tail"] = num(rep.tail);
  o["confidence"] = num(rep.confidence);
  o["inputs"] = pairs(rep.inputs);
  o["caveats"] = rep.caveats;
  o["grid"] = nums(rep.grid);
  json fs = json::array();
  for (const auto& fb : rep.functions) {
    json f;
    f["name"] = fb.name;
    f["bound"] = num(fb.bound);
    f["argmin"] = num(fb.argmin);
    json d = json::array();
    for (const auto& r : fb.rows) d.push_back(to_json(r));
    f["decomposition"] = d;
    fs.push_back(f);
  }
  o["functions"] = fs;
  return o;
}

inline json to_json(const ScalarBound& b) {
  json o;
  o["theorem"] = b.theorem;
  o["bound"] = num(b.value);
  o["bound_clamped"] = num(b.clamped);
  o["tail"] = num(b.tail);
  o["confidence"] = num(b.confidence);
  o["terms"] = pairs(b.terms);
  return o;
}

inline json to_json(const Check& c) {
  json o;
  o["name"] = c.name;
  o["status"] = status(c);
  o["pass"] = c.pass;
  o["vacuous"] = c.vacuous;
  o["rule"] = to_string(c.rule);
  o["lhs"] = num(c.lhs);
  o["stderr"] = num(c.stderr_);
  o["rhs"] = num(c.rhs);
  o["slack"] = num(c.slack);
  if (c.rule == PassRule::Wilson) o["wilson_lower"] = num(c.lower);
  if (c.rule == PassRule::Exact) o["tolerance"] = num(c.tolerance);
  return o;
}

inline json to_json(const VerifyReport& rep) {
  json o;
  o["target"] = rep.target;
  o["pass"] = rep.pass;
  o["replicas"] = rep.replicas;
  o["seed"] = rep.seed;
  json cs = json::array();
  for (const auto& c : rep.checks) cs.push_back(to_json(c));
  o["checks"] = cs;
  o["diagnostics"] = pairs(rep.diagnostics);
  o["notes"] = rep.notes;
  return o;
}

inline json to_json(const ChainSpec& spec) {
  json o;
  o["states"] = spec.states;
  o["Q"] = rows(spec.Q);
  o["nu"] = nums(spec.nu);
  return o;
}

/// Fixed-layout serializer: 2-space indent, arrays of scalars on one line, doubles as %.17g.
inline void write(std::string& out, const json& j, int depth = 0) {
  auto scalar = [](const json& v) { return !v.is_array() && !v.is_object(); };
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' '), close(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += std::isnan(v) ? "\"nan\"" : (v > 0 ? "\"inf\"" : "\"-inf\"");
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      if (std::all_of(j.begin(), j.end(), scalar)) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          write(out, j[i], depth + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        out += pad;
        write(out, j[i], depth + 1);
        out += i + 1 < j.size() ? ",\n" : "\n";
      }
      out += close + "]";
      return;
    }
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        out += pad + json(it.key()).dump() + ": ";
        write(out, it.value(), depth + 1);
        out += i + 1 < j.size() ? ",\n" : "\n";
      }
      out += close + "}";
      return;
    }
    default: out += j.dump(); return;
  }
}

inline std::string dump(const json& j) {
  std::string out;
  write(out, j);
  out += "\n";
  return out;
}

/// Line-oriented `key: value` rendering; nested keys joined with '.', array items as [i].
inline void write_text(std::string& out, const json& j, const std::string& prefix = {}) {
  auto leaf = [](const json& v) {
    std::string s;
    if (v.is_string()) return v.get<std::string>();
    write(s, v);
    return s;
  };
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      write_text(out, it.value(), prefix.empty() ? it.key() : prefix + "." + it.key());
    return;
  }
  if (j.is_array() && !std::all_of(j.begin(), j.end(), [](const json& v) { return !v.is_array() && !v.is_object(); })) {
    for (std::size_t i = 0; i < j.size(); ++i) write_text(out, j[i], prefix + "[" + std::to_string(i) + "]");
    return;
  }
  out += prefix + ": " + leaf(j) + "\n";
}

inline std::string dump_text(const json& j) {
  std::string out;
  write_text(out, j);
  return out;
}

}  // namespace genbound::io

#endif  // GENBOUND_IO_HPP
