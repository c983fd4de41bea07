#ifndef GENBOUND_DEEPNET_HPP
#define GENBOUND_DEEPNET_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "genbound/bounds.hpp"
#include "genbound/empirical.hpp"
#include "genbound/error.hpp"

namespace genbound {

/// Activation mapping R into [-1, 1]. Table sigmoids are piecewise linear with flat ends.
class Sigmoid {
 public:
  enum class Kind { Tanh, Clamp, Table };

  static Sigmoid tanh() { return Sigmoid(Kind::Tanh, {}); }
  static Sigmoid clamp() { return Sigmoid(Kind::Clamp, {}); }
  static Sigmoid table(std::vector<std::pair<double, double>> knots) {
    require(!knots.empty(), ErrorCode::InvalidInput, "table sigmoid needs knots", "sigmoid");
    for (std::size_t i = 1; i < knots.size(); ++i)
      require(knots[i].first > knots[i - 1].first, ErrorCode::InvalidInput, "sigmoid knots must increase", "sigmoid");
    return Sigmoid(Kind::Table, std::move(knots));
  }

  Kind kind() const { return kind_; }
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

  double operator()(double x) const {
    switch (kind_) {
      case Kind::Tanh: return std::tanh(x);
      case Kind::Clamp: return std::clamp(x, -1.0, 1.0);
      case Kind::Table: break;
    }
    if (x <= knots_.front().first) return knots_.front().second;
    if (x >= knots_.back().first) return knots_.back().second;
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                                     [](double v, const auto& k) { return v < k.first; });
    const auto& [x1, y1] = *it;
    const auto& [x0, y0] = *(it - 1);
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
  }

  std::string name() const {
    switch (kind_) {
      case Kind::Tanh: return "tanh";
      case Kind::Clamp: return "clamp";
      case Kind::Table: return "table";
    }
    return "table";
  }

 private:
  Sigmoid(Kind k, std::vector<std::pair<double, double>> knots) : kind_(k), knots_(std::move(knots)) {}
  Kind kind_;
  std::vector<std::pair<double, double>> knots_;
};

/// Input reference: layer 0 is the base class, layer j >= 1 a previous neuron layer.
struct Tap {
  std::size_t layer = 0;
  std::size_t index = 0;
};

struct Neuron {
  std::vector<double> w;
  std::vector<Tap> taps;  // empty: every output of the previous layer, in order
};

struct Layer {
  std::vector<Neuron> neurons;
  Sigmoid sigma = Sigmoid::tanh();
  double L = 1.0;
  std::optional<double> budget;
};

/// The network output is neuron 0 of the last layer; depth l(f) = number of layers.
struct NetworkSpec {
  FunctionClass base;
  std::vector<Layer> layers;
};

struct NetworkCapacity {
  std::size_t depth = 0;
  std::vector<double> W;  // max ||w||_1 over the layer, or the budget if larger
  double Lambda = 1.0;
  double Gamma_alpha = 0.0;
  double alpha = 0.0;
  bool floored = false;   // some W_k < 1/2 was raised to 1/2 inside Gamma_alpha
};

namespace detail {

inline std::size_t layer_width(const NetworkSpec& net, std::size_t layer) {
  return layer == 0 ? net.base.size() : net.layers[layer - 1].neurons.size();
}

inline std::vector<Tap> resolved_taps(const NetworkSpec& net, std::size_t j, const Neuron& u) {
  if (!u.taps.empty()) return u.taps;
  std::vector<Tap> taps;
  for (std::size_t i = 0; i < layer_width(net, j - 1); ++i) taps.push_back({j - 1, i});
  return taps;
}

inline double l1(const std::vector<double>& w) {
  double s = 0.0;
  for (double v : w) s += std::abs(v);
  return s;
}

}  // namespace detail

/// Sigmoid range and slope on a 1e-3 grid over [-50, 50].
inline void check_sigmoid(const Sigmoid& s, double declared_L, const std::string& field) {
  double prev = s(-50.0), slope = 0.0;
  for (int i = -50000; i <= 50000; ++i) {
    const double x = i * 1e-3, y = s(x);
    require(y >= -1.0 && y <= 1.0, ErrorCode::InvalidInput, "sigmoid leaves [-1,1] at x=" + detail::fmt(x), field);
    if (i > -50000) slope = std::max(slope, std::abs(y - prev) / 1e-3);
    prev = y;
  }
  require(declared_L >= slope - 1e-6, ErrorCode::InvalidInput,
          "declared L=" + detail::fmt(declared_L) + " is below the observed slope " + detail::fmt(slope), field);
}

inline void validate_network(const NetworkSpec& net) {
  require(!net.layers.empty(), ErrorCode::InvalidInput, "network has no layers", "layers");
  require(net.base.size() >= 1, ErrorCode::InvalidInput, "network has no base functions", "base");
  for (std::size_t j = 1; j <= net.layers.size(); ++j) {
    const Layer& layer = net.layers[j - 1];
    const std::string lf = "layers[" + std::to_string(j - 1) + "]";
    require(!layer.neurons.empty(), ErrorCode::InvalidInput, "layer has no neurons", lf);
    require(layer.L >= 0.0 && std::isfinite(layer.L), ErrorCode::InvalidInput, "L must be finite and >= 0", lf + ".L");
    if (layer.sigma.kind() == Sigmoid::Kind::Table) check_sigmoid(layer.sigma, layer.L, lf + ".sigmoid");
    else require(layer.L >= 1.0 - 1e-6, ErrorCode::InvalidInput, "tanh and clamp need L >= 1", lf + ".L");
    for (std::size_t u = 0; u < layer.neurons.size(); ++u) {
      const Neuron& nu = layer.neurons[u];
      const std::string nf = lf + ".neurons[" + std::to_string(u) + "]";
      const auto taps = detail::resolved_taps(net, j, nu);
      require(nu.w.size() == taps.size(), ErrorCode::DimensionMismatch,
              "neuron has " + std::to_string(nu.w.size()) + " weights for " + std::to_string(taps.size()) + " inputs",
              nf + ".w");
      for (const Tap& t : taps)
        require(t.layer < j && t.index < detail::layer_width(net, t.layer), ErrorCode::InvalidInput,
                "dangling input reference (" + std::to_string(t.layer) + "," + std::to_string(t.index) + ")",
                nf + ".taps");
      for (double v : nu.w) require(std::isfinite(v), ErrorCode::InvalidInput, "non-finite weight", nf + ".w");
      if (layer.budget)
        require(detail::l1(nu.w) <= *layer.budget + 1e-12, ErrorCode::InvalidInput,
                "||w||_1 = " + detail::fmt(detail::l1(nu.w)) + " exceeds budget " + detail::fmt(*layer.budget),
                nf + ".w");
    }
  }
}

namespace detail {

inline std::vector<std::vector<double>> forward_unchecked(const NetworkSpec& net, std::size_t state) {
  std::vector<std::vector<double>> out(net.layers.size() + 1);
  for (std::size_t i = 0; i < net.base.size(); ++i)
    out[0].push_back(net.base.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(state)));
  for (std::size_t j = 1; j <= net.layers.size(); ++j) {
    const Layer& layer = net.layers[j - 1];
    for (const Neuron& u : layer.neurons) {
      const auto taps = resolved_taps(net, j, u);
      double z = 0.0;
      for (std::size_t i = 0; i < taps.size(); ++i) z += u.w[i] * out[taps[i].layer][taps[i].index];
      out[j].push_back(layer.sigma(z));
    }
  }
  return out;
}

}  // namespace detail

/// Every neuron's output at one state; out[0] holds the base values.
inline std::vector<std::vector<double>> forward_all(const NetworkSpec& net, std::size_t state) {
  validate_network(net);
  require(state < net.base.states(), ErrorCode::InvalidInput, "state out of range", "state");
  return detail::forward_unchecked(net, state);
}

inline double forward(const NetworkSpec& net, std::size_t state) { return forward_all(net, state).back().front(); }

/// f tabulated over the states of the base class.
inline Eigen::VectorXd network_values(const NetworkSpec& net) {
  validate_network(net);
  Eigen::VectorXd f(static_cast<Eigen::Index>(net.base.states()));
  for (std::size_t x = 0; x < net.base.states(); ++x)
    f(static_cast<Eigen::Index>(x)) = detail::forward_unchecked(net, x).back().front();
  return f;
}

inline NetworkCapacity capacity(const NetworkSpec& net, double alpha) {
  require(alpha > 0.0 && std::isfinite(alpha), ErrorCode::InvalidInput, "alpha must be positive", "alpha");
  validate_network(net);
  NetworkCapacity c;
  c.alpha = alpha;
  c.depth = net.layers.size();
  for (const Layer& layer : net.layers) {
    double Wk = layer.budget.value_or(0.0);
    for (const Neuron& u : layer.neurons) Wk = std::max(Wk, detail::l1(u.w));
    c.W.push_back(Wk);
    c.Lambda *= 4.0 * layer.L * Wk + 1.0;
    if (Wk < 0.5) c.floored = true;
    c.Gamma_alpha += std::sqrt(alpha / 2.0 * std::log(2.0 + std::log2(std::max(Wk, 0.5))));
  }
  return c;
}

/// y f(x) for a +-1 label per state.
inline FunctionClass network_margins(const NetworkSpec& net, const std::vector<int>& labels) {
  const Eigen::VectorXd f = network_values(net);
  require(labels.size() == static_cast<std::size_t>(f.size()), ErrorCode::DimensionMismatch,
          "need one label per state", "labels");
  Eigen::MatrixXd m(1, f.size());
  for (Eigen::Index x = 0; x < f.size(); ++x) {
    const int y = labels[static_cast<std::size_t>(x)];
    require(y == 1 || y == -1, ErrorCode::InvalidInput, "labels must be +1 or -1", "labels");
    m(0, x) = y * f(x);
  }
  auto cls = make_class(m, 1.0);
  cls.names = {"margin"};
  return cls;
}

/// y f(x) over the labeled lift with states x*|Y| + y (label values +-1).
inline FunctionClass network_margins_lifted(const NetworkSpec& net, const std::vector<double>& label_values) {
  const Eigen::VectorXd f = network_values(net);
  require(!label_values.empty(), ErrorCode::InvalidInput, "no label values", "labels");
  const auto Y = static_cast<Eigen::Index>(label_values.size());
  Eigen::MatrixXd m(1, f.size() * Y);
  for (Eigen::Index x = 0; x < f.size(); ++x)
    for (Eigen::Index y = 0; y < Y; ++y) {
      const double lv = label_values[static_cast<std::size_t>(y)];
      require(lv == 1.0 || lv == -1.0, ErrorCode::InvalidInput, "labels must be +1 or -1", "labels");
      m(0, x * Y + y) = lv * f(x);
    }
  auto cls = make_class(m, 1.0);
  cls.names = {"margin"};
  return cls;
}

/// Adaptive bound with Lambda(f) and Gamma_alpha(f) taken from the network.
inline BoundReport bound_deep_adaptive(const NetworkSpec& net, double alpha, const ComplexityEstimate& G_base,
                                       const MarginLoss& phi, double t, const std::vector<double>& grid,
                                       const ChainAnalysis& a, const FunctionClass& margins, const Trajectory& traj) {
  const auto cap = capacity(net, alpha);
  auto rep = bound_deep_adaptive(cap.Lambda, cap.Gamma_alpha, alpha, G_base, phi, t, grid, a, margins, traj);
  rep.inputs.emplace_back("depth", static_cast<double>(cap.depth));
  for (std::size_t k = 0; k < cap.W.size(); ++k) rep.inputs.emplace_back("W_" + std::to_string(k + 1), cap.W[k]);
  if (cap.floored) rep.caveats.push_back("some W_k < 1/2 was floored at 1/2 inside Gamma_alpha");
  return rep;
}

}  // namespace genbound

#endif  // GENBOUND_DEEPNET_HPP
