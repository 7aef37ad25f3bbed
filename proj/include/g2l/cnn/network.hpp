#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "g2l/error.hpp"
#include "g2l/random.hpp"

namespace g2l::cnn {

/// Row-major tensor; image tensors are laid out height x width x channels.
template <class T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> dims, T fill = T(0)) : shape(std::move(dims)) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    data.assign(n, fill);
  }
  std::size_t size() const { return data.size(); }
};

struct Shape3 {
  int h = 0, w = 0, c = 0;
  std::size_t size() const { return static_cast<std::size_t>(h) * w * c; }
  friend bool operator==(const Shape3&, const Shape3&) = default;
};

inline std::string to_string(const Shape3& s) {
  return std::to_string(s.h) + "x" + std::to_string(s.w) + "x" + std::to_string(s.c);
}

// Layer kinds. Weight layouts: conv w[filter][ky][kx][in_channel], dense w[unit][input].
template <class T>
struct Conv {
  int filters = 0, k = 0, stride = 1, in_channels = 0;
  std::vector<T> w, b;
};
struct Relu {};
struct MaxPool {
  int k = 2;
};
struct Flatten {};
template <class T>
struct Dense {
  int units = 0, inputs = 0;
  std::vector<T> w, b;
};
struct Softmax {};

template <class T>
using Layer = std::variant<Conv<T>, Relu, MaxPool, Flatten, Dense<T>, Softmax>;

template <class T>
std::string layer_kind(const Layer<T>& l) {
  static const char* const names[] = {"conv", "relu", "maxpool", "flatten", "dense", "softmax"};
  return names[l.index()];
}

/// Gradients mirror the weight and bias vectors of each layer (empty for
/// parameter-free layers).
template <class T>
struct Gradients {
  std::vector<std::vector<T>> w, b;
};

/// Per-sample record of a forward pass, kept for backpropagation.
template <class T>
struct Trace {
  std::vector<std::vector<T>> acts;         // acts[0] input, acts[i+1] output of layer i
  std::vector<std::vector<int>> pool_argmax;  // per layer; flat input index of each max
};

template <class T>
class Network {
 public:
  Shape3 input_shape{64, 64, 1};
  std::vector<Layer<T>> layers;
  std::vector<std::string> classes;
  double norm_mean = 0.0;
  double norm_std = 1.0;

  /// Output shape of every layer; throws errc::model when the chain breaks.
  std::vector<Shape3> shapes() const {
    std::vector<Shape3> out;
    Shape3 s = input_shape;
    if (s.h < 1 || s.w < 1 || s.c < 1) fail(errc::model, "input shape must be positive, got " + to_string(s));
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const std::string where = "layer " + std::to_string(i) + " (" + layer_kind(layers[i]) + "): ";
      std::visit(
          [&](const auto& l) {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, Conv<T>>) {
              if (l.filters < 1 || l.k < 1 || l.stride < 1) fail(errc::model, where + "bad conv parameters");
              if (l.in_channels != s.c)
                fail(errc::model, where + "expects " + std::to_string(l.in_channels) + " input channels, got " + to_string(s));
              if (s.h < l.k || s.w < l.k) fail(errc::model, where + "kernel larger than input " + to_string(s));
              if (l.w.size() != static_cast<std::size_t>(l.filters) * l.k * l.k * l.in_channels ||
                  l.b.size() != static_cast<std::size_t>(l.filters))
                fail(errc::model, where + "weight count does not match parameters");
              s = {(s.h - l.k) / l.stride + 1, (s.w - l.k) / l.stride + 1, l.filters};
            } else if constexpr (std::is_same_v<L, MaxPool>) {
              if (l.k < 1 || s.h < l.k || s.w < l.k) fail(errc::model, where + "bad pool size for input " + to_string(s));
              s = {s.h / l.k, s.w / l.k, s.c};
            } else if constexpr (std::is_same_v<L, Flatten>) {
              s = {1, 1, static_cast<int>(s.size())};
            } else if constexpr (std::is_same_v<L, Dense<T>>) {
              if (s.h != 1 || s.w != 1) fail(errc::model, where + "dense input must be flat, got " + to_string(s));
              if (l.inputs != s.c)
                fail(errc::model, where + "expects " + std::to_string(l.inputs) + " inputs, got " + std::to_string(s.c));
              if (l.units < 1 || l.w.size() != static_cast<std::size_t>(l.units) * l.inputs ||
                  l.b.size() != static_cast<std::size_t>(l.units))
                fail(errc::model, where + "weight count does not match parameters");
              s = {1, 1, l.units};
            } else if constexpr (std::is_same_v<L, Softmax>) {
              if (i + 1 != layers.size()) fail(errc::model, where + "softmax must be the last layer");
            }
          },
          layers[i]);
      out.push_back(s);
    }
    return out;
  }

  /// Full structural check: shape chain, softmax head, class list.
  void validate() const {
    const auto sh = shapes();
    if (layers.empty() || !std::holds_alternative<Softmax>(layers.back()))
      fail(errc::model, "network must end with a softmax layer");
    if (classes.empty()) fail(errc::model, "class list is empty");
    for (std::size_t i = 0; i < classes.size(); ++i)
      for (std::size_t j = i + 1; j < classes.size(); ++j)
        if (classes[i] == classes[j]) fail(errc::model, "duplicate class '" + classes[i] + "'");
    const Shape3 out = sh.back();
    if (out.h != 1 || out.w != 1 || out.c != static_cast<int>(classes.size()))
      fail(errc::model, "network output " + to_string(out) + " does not match " + std::to_string(classes.size()) +
                            " classes");
    if (!(norm_std > 0) || !std::isfinite(norm_std) || !std::isfinite(norm_mean))
      fail(errc::model, "input normalization must be finite with std > 0");
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) {
      if (const auto* c = std::get_if<Conv<T>>(&l)) n += c->w.size() + c->b.size();
      if (const auto* d = std::get_if<Dense<T>>(&l)) n += d->w.size() + d->b.size();
    }
    return n;
  }

  /// Forward pass to the pre-softmax logits, recording activations.
  void run(const T* input, Trace<T>& tr) const {
    tr.acts.resize(layers.size() + 1);
    tr.pool_argmax.resize(layers.size());
    tr.acts[0].assign(input, input + input_shape.size());
    Shape3 s = input_shape;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& in = tr.acts[i];
      auto& out = tr.acts[i + 1];
      std::visit(
          [&](const auto& l) {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, Conv<T>>) {
              s = conv_forward(l, s, in, out);
            } else if constexpr (std::is_same_v<L, Relu>) {
              out.resize(in.size());
              for (std::size_t j = 0; j < in.size(); ++j) out[j] = in[j] > T(0) ? in[j] : T(0);
            } else if constexpr (std::is_same_v<L, MaxPool>) {
              s = pool_forward(l, s, in, out, tr.pool_argmax[i]);
            } else if constexpr (std::is_same_v<L, Flatten>) {
              out = in;
              s = {1, 1, static_cast<int>(s.size())};
            } else if constexpr (std::is_same_v<L, Dense<T>>) {
              out.assign(l.b.begin(), l.b.end());
              for (int u = 0; u < l.units; ++u) {
                const T* w = &l.w[static_cast<std::size_t>(u) * l.inputs];
                T acc = 0;
                for (int j = 0; j < l.inputs; ++j) acc += w[j] * in[static_cast<std::size_t>(j)];
                out[static_cast<std::size_t>(u)] += acc;
              }
              s = {1, 1, l.units};
            } else {
              out = in;  // softmax is applied by the caller
            }
          },
          layers[i]);
    }
  }

  std::vector<T> logits(const Tensor<T>& input) const {
    check_input(input);
    Trace<T> tr;
    run(input.data.data(), tr);
    auto out = tr.acts.back();
    for (T v : out)
      if (!std::isfinite(static_cast<double>(v))) fail(errc::internal, "non-finite value in network output");
    return out;
  }

  /// Class probabilities.
  std::vector<T> forward(const Tensor<T>& input) const { return softmax(logits(input)); }

  /// Accumulates parameter gradients of one sample given dLoss/dlogits.
  void backward(const Trace<T>& tr, std::vector<T> grad, Gradients<T>& g) const {
    const auto sh = shapes();
    for (std::size_t i = layers.size(); i-- > 0;) {
      const Shape3 in_shape = i == 0 ? input_shape : sh[i - 1];
      const auto& in = tr.acts[i];
      std::vector<T> grad_in;
      const bool need_input_grad = i > 0;
      std::visit(
          [&](const auto& l) {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, Conv<T>>) {
              conv_backward(l, in_shape, sh[i], in, grad, g.w[i], g.b[i], need_input_grad ? &grad_in : nullptr);
            } else if constexpr (std::is_same_v<L, Relu>) {
              grad_in.resize(grad.size());
              for (std::size_t j = 0; j < grad.size(); ++j) grad_in[j] = in[j] > T(0) ? grad[j] : T(0);
            } else if constexpr (std::is_same_v<L, MaxPool>) {
              grad_in.assign(in.size(), T(0));
              const auto& am = tr.pool_argmax[i];
              for (std::size_t j = 0; j < grad.size(); ++j) grad_in[static_cast<std::size_t>(am[j])] += grad[j];
            } else if constexpr (std::is_same_v<L, Dense<T>>) {
              auto& gw = g.w[i];
              auto& gb = g.b[i];
              if (need_input_grad) grad_in.assign(static_cast<std::size_t>(l.inputs), T(0));
              for (int u = 0; u < l.units; ++u) {
                const T gu = grad[static_cast<std::size_t>(u)];
                gb[static_cast<std::size_t>(u)] += gu;
                if (gu == T(0)) continue;
                T* gwr = &gw[static_cast<std::size_t>(u) * l.inputs];
                const T* wr = &l.w[static_cast<std::size_t>(u) * l.inputs];
                for (int j = 0; j < l.inputs; ++j) gwr[j] += gu * in[static_cast<std::size_t>(j)];
                if (need_input_grad)
                  for (int j = 0; j < l.inputs; ++j) grad_in[static_cast<std::size_t>(j)] += gu * wr[j];
              }
            } else {
              grad_in = std::move(grad);  // flatten and softmax pass-through
            }
          },
          layers[i]);
      grad = std::move(grad_in);
    }
  }

  Gradients<T> zero_gradients() const {
    Gradients<T> g;
    g.w.resize(layers.size());
    g.b.resize(layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (const auto* c = std::get_if<Conv<T>>(&layers[i])) {
        g.w[i].assign(c->w.size(), T(0));
        g.b[i].assign(c->b.size(), T(0));
      } else if (const auto* d = std::get_if<Dense<T>>(&layers[i])) {
        g.w[i].assign(d->w.size(), T(0));
        g.b[i].assign(d->b.size(), T(0));
      }
    }
    return g;
  }

  /// Calls f(layer_index, weights, biases) for each parametric layer.
  template <class F>
  void for_each_parameter(F&& f) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (auto* c = std::get_if<Conv<T>>(&layers[i])) f(i, c->w, c->b);
      if (auto* d = std::get_if<Dense<T>>(&layers[i])) f(i, d->w, d->b);
    }
  }

  static std::vector<T> softmax(const std::vector<T>& z) {
    std::vector<T> p(z.size());
    if (z.empty()) return p;
    const T m = *std::max_element(z.begin(), z.end());
    double sum = 0;
    for (std::size_t i = 0; i < z.size(); ++i) sum += std::exp(static_cast<double>(z[i] - m));
    for (std::size_t i = 0; i < z.size(); ++i) p[i] = static_cast<T>(std::exp(static_cast<double>(z[i] - m)) / sum);
    return p;
  }

  void check_input(const Tensor<T>& input) const {
    const bool ok = input.shape == std::vector<int>{input_shape.h, input_shape.w, input_shape.c} &&
                    input.data.size() == input_shape.size();
    if (!ok) {
      std::string got;
      for (int d : input.shape) got += (got.empty() ? "" : "x") + std::to_string(d);
      fail(errc::invalid_argument, "input shape " + got + " does not match network input " + to_string(input_shape));
    }
  }

 private:
  static Shape3 conv_forward(const Conv<T>& l, Shape3 s, const std::vector<T>& in, std::vector<T>& out) {
    const Shape3 o{(s.h - l.k) / l.stride + 1, (s.w - l.k) / l.stride + 1, l.filters};
    out.resize(o.size());
    const int row = l.k * s.c;  // contiguous run of one kernel row
    for (int oy = 0; oy < o.h; ++oy)
      for (int ox = 0; ox < o.w; ++ox)
        for (int f = 0; f < l.filters; ++f) {
          T acc = l.b[static_cast<std::size_t>(f)];
          const T* w = &l.w[static_cast<std::size_t>(f) * l.k * row];
          for (int ky = 0; ky < l.k; ++ky) {
            const T* src = &in[(static_cast<std::size_t>(oy * l.stride + ky) * s.w + ox * l.stride) * s.c];
            const T* wk = w + ky * row;
            for (int j = 0; j < row; ++j) acc += wk[j] * src[j];
          }
          out[(static_cast<std::size_t>(oy) * o.w + ox) * o.c + f] = acc;
        }
    return o;
  }

  static void conv_backward(const Conv<T>& l, Shape3 s, Shape3 o, const std::vector<T>& in,
                            const std::vector<T>& grad, std::vector<T>& gw, std::vector<T>& gb,
                            std::vector<T>* grad_in) {
    if (grad_in) grad_in->assign(in.size(), T(0));
    const int row = l.k * s.c;
    for (int oy = 0; oy < o.h; ++oy)
      for (int ox = 0; ox < o.w; ++ox)
        for (int f = 0; f < l.filters; ++f) {
          const T g = grad[(static_cast<std::size_t>(oy) * o.w + ox) * o.c + f];
          gb[static_cast<std::size_t>(f)] += g;
          if (g == T(0)) continue;
          const std::size_t wbase = static_cast<std::size_t>(f) * l.k * row;
          for (int ky = 0; ky < l.k; ++ky) {
            const std::size_t ibase = (static_cast<std::size_t>(oy * l.stride + ky) * s.w + ox * l.stride) * s.c;
            T* gwk = &gw[wbase + static_cast<std::size_t>(ky) * row];
            const T* src = &in[ibase];
            for (int j = 0; j < row; ++j) gwk[j] += g * src[j];
            if (grad_in) {
              const T* wk = &l.w[wbase + static_cast<std::size_t>(ky) * row];
              T* dst = &(*grad_in)[ibase];
              for (int j = 0; j < row; ++j) dst[j] += g * wk[j];
            }
          }
        }
  }

  static Shape3 pool_forward(const MaxPool& l, Shape3 s, const std::vector<T>& in, std::vector<T>& out,
                             std::vector<int>& argmax) {
    const Shape3 o{s.h / l.k, s.w / l.k, s.c};
    out.resize(o.size());
    argmax.resize(o.size());
    for (int oy = 0; oy < o.h; ++oy)
      for (int ox = 0; ox < o.w; ++ox)
        for (int c = 0; c < s.c; ++c) {
          int best = -1;
          T bv = -std::numeric_limits<T>::infinity();
          for (int dy = 0; dy < l.k; ++dy)
            for (int dx = 0; dx < l.k; ++dx) {
              const int idx = ((oy * l.k + dy) * s.w + ox * l.k + dx) * s.c + c;
              if (best < 0 || in[static_cast<std::size_t>(idx)] > bv) {
                best = idx;
                bv = in[static_cast<std::size_t>(idx)];
              }
            }
          const std::size_t o_idx = (static_cast<std::size_t>(oy) * o.w + ox) * o.c + c;
          out[o_idx] = bv;
          argmax[o_idx] = best;
        }
    return o;
  }
};

/// Mean cross-entropy over a batch and its parameter gradients.
template <class T>
struct LossAndGrad {
  double loss = 0;
  int correct = 0;
  Gradients<T> grads;
};

template <class T>
LossAndGrad<T> loss_and_grad(const Network<T>& net, const std::vector<const T*>& inputs, const std::vector<int>& labels) {
  if (inputs.empty()) fail(errc::invalid_argument, "batch is empty");
  if (inputs.size() != labels.size()) fail(errc::invalid_argument, "batch inputs and labels differ in length");
  const int n_classes = static_cast<int>(net.classes.size());
  for (int y : labels)
    if (y < 0 || y >= n_classes)
      fail(errc::invalid_argument, "label " + std::to_string(y) + " out of range [0," + std::to_string(n_classes) + ")");

  LossAndGrad<T> r;
  r.grads = net.zero_gradients();
  Trace<T> tr;
  const double inv_n = 1.0 / static_cast<double>(inputs.size());
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    net.run(inputs[s], tr);
    const auto& z = tr.acts.back();
    const T m = *std::max_element(z.begin(), z.end());
    double sum = 0;
    for (T v : z) sum += std::exp(static_cast<double>(v - m));
    const double lse = static_cast<double>(m) + std::log(sum);
    const int y = labels[s];
    r.loss += (lse - static_cast<double>(z[static_cast<std::size_t>(y)])) * inv_n;
    if (std::max_element(z.begin(), z.end()) - z.begin() == y) ++r.correct;
    std::vector<T> dz(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
      const double p = std::exp(static_cast<double>(z[k]) - lse);
      dz[k] = static_cast<T>((p - (static_cast<int>(k) == y ? 1.0 : 0.0)) * inv_n);
    }
    net.backward(tr, std::move(dz), r.grads);
  }
  if (!std::isfinite(r.loss)) fail(errc::internal, "non-finite loss");
  return r;
}

/// He-uniform weights, zero biases.
template <class T>
void he_uniform_init(Network<T>& net, Rng& rng) {
  for (auto& l : net.layers) {
    double fan_in = 0;
    if (const auto* c = std::get_if<Conv<T>>(&l)) fan_in = static_cast<double>(c->k) * c->k * c->in_channels;
    if (const auto* d = std::get_if<Dense<T>>(&l)) fan_in = d->inputs;
    if (fan_in == 0) continue;
    const double limit = std::sqrt(6.0 / fan_in);
    auto init = [&](std::vector<T>& w, std::vector<T>& b) {
      for (auto& v : w) v = static_cast<T>(rng.uniform(-limit, limit));
      std::fill(b.begin(), b.end(), T(0));
    };
    if (auto* c = std::get_if<Conv<T>>(&l)) init(c->w, c->b);
    if (auto* d = std::get_if<Dense<T>>(&l)) init(d->w, d->b);
  }
}

template <class T>
Conv<T> make_conv(int filters, int k, int in_channels, int stride = 1) {
  Conv<T> c;
  c.filters = filters;
  c.k = k;
  c.stride = stride;
  c.in_channels = in_channels;
  c.w.assign(static_cast<std::size_t>(filters) * k * k * in_channels, T(0));
  c.b.assign(static_cast<std::size_t>(filters), T(0));
  return c;
}

template <class T>
Dense<T> make_dense(int units, int inputs) {
  Dense<T> d;
  d.units = units;
  d.inputs = inputs;
  d.w.assign(static_cast<std::size_t>(units) * inputs, T(0));
  d.b.assign(static_cast<std::size_t>(units), T(0));
  return d;
}

/// conv8 3x3 > relu > pool2 > conv16 3x3 > relu > pool2 > flatten > dense64 > relu > dense(classes) > softmax,
/// all weights zero.
template <class T>
Network<T> chart_classifier(std::vector<std::string> classes, Shape3 input = {64, 64, 1}) {
  Network<T> net;
  net.input_shape = input;
  net.classes = std::move(classes);
  net.layers.push_back(make_conv<T>(8, 3, input.c));
  net.layers.push_back(Relu{});
  net.layers.push_back(MaxPool{2});
  net.layers.push_back(make_conv<T>(16, 3, 8));
  net.layers.push_back(Relu{});
  net.layers.push_back(MaxPool{2});
  net.layers.push_back(Flatten{});
  const int h = ((input.h - 2) / 2 - 2) / 2, w = ((input.w - 2) / 2 - 2) / 2;
  net.layers.push_back(make_dense<T>(64, h * w * 16));
  net.layers.push_back(Relu{});
  net.layers.push_back(make_dense<T>(static_cast<int>(net.classes.size()), 64));
  net.layers.push_back(Softmax{});
  return net;
}

}  // namespace g2l::cnn
