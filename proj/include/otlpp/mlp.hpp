#pragma once

// Fully-connected ReLU network with identity output, its squared-TD-error
// gradient, Adam, and the QNETv1 text snapshot format.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <initializer_list>
#include <istream>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "otlpp/common.hpp"

namespace otlpp {

// Row-major weights: w[o * in + i] connects input i to output o.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> w;
  std::vector<double> b;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct MLP {
  std::vector<std::size_t> dims;
  std::vector<DenseLayer> layers;

  std::size_t input_size() const { return dims.front(); }
  std::size_t output_size() const { return dims.back(); }
  std::size_t num_layers() const { return layers.size(); }

  std::size_t num_parameters() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
  }

  friend bool operator==(const MLP&, const MLP&) = default;
};

// Same shape as an MLP's parameters.
struct Gradient {
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> b;

  static Gradient zeros_like(const MLP& net) {
    Gradient g;
    for (const auto& l : net.layers) {
      g.w.emplace_back(l.w.size(), 0.0);
      g.b.emplace_back(l.b.size(), 0.0);
    }
    return g;
  }

  void scale(double s) {
    for (auto& v : w)
      for (double& x : v) x *= s;
    for (auto& v : b)
      for (double& x : v) x *= s;
  }

  void add(const Gradient& o) {
    for (std::size_t k = 0; k < w.size(); ++k) {
      for (std::size_t i = 0; i < w[k].size(); ++i) w[k][i] += o.w[k][i];
      for (std::size_t i = 0; i < b[k].size(); ++i) b[k][i] += o.b[k][i];
    }
  }

  bool all_finite() const {
    for (const auto& v : w)
      for (double x : v)
        if (!std::isfinite(x)) return false;
    for (const auto& v : b)
      for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
  }
};

inline void validate_dims(std::span<const std::size_t> dims) {
  if (dims.size() < 2) throw ConfigError("mlp: need at least input and output dims");
  for (std::size_t d : dims)
    if (d == 0) throw ConfigError("mlp: layer dims must be positive");
}

// Weights of a layer with fan-in n are drawn from U[-1/sqrt(n), 1/sqrt(n)];
// biases start at zero.
inline MLP init_mlp(std::span<const std::size_t> dims, std::uint64_t seed) {
  validate_dims(dims);
  Rng rng(seed);
  MLP net;
  net.dims.assign(dims.begin(), dims.end());
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    DenseLayer l;
    l.in = dims[k];
    l.out = dims[k + 1];
    double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
    std::uniform_real_distribution<double> u(-bound, bound);
    l.w.resize(l.in * l.out);
    for (double& x : l.w) x = u(rng);
    l.b.assign(l.out, 0.0);
    net.layers.push_back(std::move(l));
  }
  return net;
}

inline MLP init_mlp(std::initializer_list<std::size_t> dims, std::uint64_t seed) {
  std::vector<std::size_t> v(dims);
  return init_mlp(std::span<const std::size_t>(v), seed);
}

namespace detail {
inline void affine(const DenseLayer& l, std::span<const double> x, std::vector<double>& z) {
  z.assign(l.b.begin(), l.b.end());
  for (std::size_t o = 0; o < l.out; ++o) {
    const double* row = l.w.data() + o * l.in;
    double acc = 0.0;
    for (std::size_t i = 0; i < l.in; ++i) acc += row[i] * x[i];
    z[o] += acc;
  }
}
}  // namespace detail

inline std::vector<double> forward(const MLP& net, std::span<const double> x) {
  if (x.size() != net.input_size()) throw UsageError("mlp: input dimension mismatch");
  std::vector<double> a(x.begin(), x.end()), z;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    detail::affine(net.layers[k], a, z);
    if (k + 1 < net.layers.size())
      for (double& v : z) v = std::max(v, 0.0);
    a.swap(z);
  }
  return a;
}

// Adds to `grad` the gradient of (target - Q(x)[action])^2 with respect to
// every parameter, scaled by `weight`. Returns Q(x)[action].
inline double accumulate_td_gradient(const MLP& net, std::span<const double> x,
                                     std::size_t action, double target, Gradient& grad,
                                     double weight = 1.0) {
  if (x.size() != net.input_size()) throw UsageError("mlp: input dimension mismatch");
  if (action >= net.output_size()) throw UsageError("mlp: action index out of range");
  const std::size_t n = net.layers.size();
  // acts[k] is the input to layer k; pre[k] its affine output.
  std::vector<std::vector<double>> acts(n + 1), pre(n);
  acts[0].assign(x.begin(), x.end());
  for (std::size_t k = 0; k < n; ++k) {
    detail::affine(net.layers[k], acts[k], pre[k]);
    acts[k + 1] = pre[k];
    if (k + 1 < n)
      for (double& v : acts[k + 1]) v = std::max(v, 0.0);
  }
  double q = acts[n][action];

  std::vector<double> delta(net.output_size(), 0.0);
  delta[action] = -2.0 * (target - q) * weight;
  for (std::size_t k = n; k-- > 0;) {
    const DenseLayer& l = net.layers[k];
    auto& gw = grad.w[k];
    auto& gb = grad.b[k];
    const auto& in = acts[k];
    for (std::size_t o = 0; o < l.out; ++o) {
      double d = delta[o];
      if (d == 0.0) continue;
      gb[o] += d;
      double* row = gw.data() + o * l.in;
      for (std::size_t i = 0; i < l.in; ++i) row[i] += d * in[i];
    }
    if (k == 0) break;
    std::vector<double> prev(l.in, 0.0);
    for (std::size_t o = 0; o < l.out; ++o) {
      double d = delta[o];
      if (d == 0.0) continue;
      const double* row = l.w.data() + o * l.in;
      for (std::size_t i = 0; i < l.in; ++i) prev[i] += row[i] * d;
    }
    for (std::size_t i = 0; i < l.in; ++i)
      if (pre[k - 1][i] <= 0.0) prev[i] = 0.0;
    delta.swap(prev);
  }
  return q;
}

inline Gradient backward(const MLP& net, std::span<const double> x, std::size_t action,
                         double target) {
  Gradient g = Gradient::zeros_like(net);
  accumulate_td_gradient(net, x, action, target, g);
  return g;
}

struct AdamState {
  double learning_rate = 0.00025;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t t = 0;
  Gradient m;
  Gradient v;

  static AdamState for_net(const MLP& net, double learning_rate = 0.00025) {
    AdamState s;
    s.learning_rate = learning_rate;
    s.m = Gradient::zeros_like(net);
    s.v = Gradient::zeros_like(net);
    return s;
  }
};

// One bias-corrected Adam update. Layers flagged in `frozen` are left
// untouched (their moments do not advance). A non-finite gradient leaves the
// network and optimizer state unchanged and throws NumericalError.
inline void adam_step(MLP& net, AdamState& s, const Gradient& g,
                      const std::vector<bool>& frozen = {}) {
  if (g.w.size() != net.layers.size() || s.m.w.size() != net.layers.size())
    throw UsageError("adam: shape mismatch");
  if (!g.all_finite()) throw NumericalError("adam: non-finite gradient");
  ++s.t;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  auto update = [&](std::vector<double>& p, const std::vector<double>& gr, std::vector<double>& m,
                    std::vector<double>& v) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * gr[i];
      v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * gr[i] * gr[i];
      double mhat = m[i] / c1;
      double vhat = v[i] / c2;
      p[i] -= s.learning_rate * mhat / (std::sqrt(vhat) + s.epsilon);
    }
  };
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    if (k < frozen.size() && frozen[k]) continue;
    update(net.layers[k].w, g.w[k], s.m.w[k], s.v.w[k]);
    update(net.layers[k].b, g.b[k], s.m.b[k], s.v.b[k]);
  }
}

// ---------------------------------------------------------------------------
// QNETv1: magic line, dims line, then one line per tensor (W0, b0, W1, b1, ...)
// with 17 significant digits, row-major.

namespace detail {
inline void write_values(std::ostream& os, std::span<const double> values) {
  char buf[40];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.16e", values[i]);
    if (i) os << ' ';
    os << buf;
  }
  os << '\n';
}

inline std::vector<double> read_values(std::istream& is, std::size_t expected, std::size_t& line_no,
                                       const char* what) {
  std::string line;
  ++line_no;
  if (!std::getline(is, line)) throw ParseError(std::string(what) + ": unexpected end of file", line_no);
  std::vector<double> out;
  out.reserve(expected);
  const char* p = line.c_str();
  char* end = nullptr;
  while (true) {
    while (*p == ' ' || *p == '\t' || *p == '\r') ++p;
    if (*p == '\0') break;
    double v = std::strtod(p, &end);
    if (end == p) throw ParseError(std::string(what) + ": malformed number", line_no);
    out.push_back(v);
    p = end;
  }
  if (out.size() != expected)
    throw ParseError(std::string(what) + ": expected " + std::to_string(expected) + " values, got " +
                         std::to_string(out.size()),
                     line_no);
  return out;
}
}  // namespace detail

inline void write_qnet(std::ostream& os, const MLP& net) {
  os << "QNETv1\n";
  for (std::size_t i = 0; i < net.dims.size(); ++i) os << (i ? " " : "") << net.dims[i];
  os << '\n';
  for (const auto& l : net.layers) {
    detail::write_values(os, l.w);
    detail::write_values(os, l.b);
  }
}

inline MLP read_qnet(std::istream& is, std::size_t& line_no) {
  std::string line;
  ++line_no;
  if (!std::getline(is, line) || line.substr(0, 6) != "QNETv1" ||
      line.find_first_not_of(" \r", 6) != std::string::npos)
    throw ParseError("expected QNETv1 header", line_no);
  ++line_no;
  if (!std::getline(is, line)) throw ParseError("missing layer dims", line_no);
  std::istringstream ds(line);
  std::vector<std::size_t> dims;
  long long d;
  while (ds >> d) {
    if (d <= 0) throw ParseError("layer dims must be positive", line_no);
    dims.push_back(static_cast<std::size_t>(d));
  }
  if (dims.size() < 2) throw ParseError("need at least two layer dims", line_no);
  MLP net;
  net.dims = dims;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    DenseLayer l;
    l.in = dims[k];
    l.out = dims[k + 1];
    l.w = detail::read_values(is, l.in * l.out, line_no, "weights");
    l.b = detail::read_values(is, l.out, line_no, "biases");
    net.layers.push_back(std::move(l));
  }
  return net;
}

inline MLP read_qnet(std::istream& is) {
  std::size_t line_no = 0;
  return read_qnet(is, line_no);
}

}  // namespace otlpp
