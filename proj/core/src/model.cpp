// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sublora/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "sublora/adapter.hpp"
#include "sublora/philox.hpp"

namespace sublora {
namespace {

using Index = Eigen::Index;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct LinearSpec {
  std::string name;
  std::size_t out = 0;
  std::size_t in = 0;
  bool adapted = false;
};

// Linear layers of each architecture in forward order; adapted ones form the layout.
std::vector<LinearSpec> linear_specs(const TinyModelConfig& c) {
  std::vector<LinearSpec> specs;
  if (c.architecture == Architecture::mlp) {
    const bool regression = c.task == TaskKind::teacher_student;
    const std::size_t count = regression ? c.depth + 1 : c.depth;
    for (std::size_t i = 0; i < count; ++i) {
      LinearSpec s;
      s.name = "layer" + std::to_string(i) + ".fc";
      s.in = i == 0 ? c.input_dim : c.width;
      s.out = (regression && i == c.depth) ? c.output_dim : c.width;
      specs.push_back(s);
    }
    if (c.adapted == "default" || c.adapted == "all") {
      for (auto& s : specs) s.adapted = true;
    } else {
      for (const auto& name : split_list(c.adapted)) {
        auto it = std::find_if(specs.begin(), specs.end(), [&](auto& s) { return s.name == name; });
        if (it == specs.end()) throw std::invalid_argument("mlp has no module '" + name + "'");
        it->adapted = true;
      }
    }
    return specs;
  }
  std::vector<std::string> adapted;
  if (c.adapted == "default" || c.adapted == "qv") adapted = {"q", "v"};
  else if (c.adapted == "all") adapted = {"q", "k", "v", "o", "fc1", "fc2"};
  else adapted = split_list(c.adapted);
  const std::vector<std::string> known = {"q", "k", "v", "o", "fc1", "fc2"};
  for (const auto& a : adapted)
    if (std::find(known.begin(), known.end(), a) == known.end())
      throw std::invalid_argument("transformer has no module suffix '" + a + "'");
  for (std::size_t l = 0; l < c.depth; ++l) {
    for (const auto& suffix : known) {
      LinearSpec s;
      s.name = "layer" + std::to_string(l) + "." + suffix;
      s.in = suffix == "fc2" ? 2 * c.width : c.width;
      s.out = suffix == "fc1" ? 2 * c.width : c.width;
      s.adapted = std::find(adapted.begin(), adapted.end(), suffix) != adapted.end();
      specs.push_back(s);
    }
  }
  return specs;
}

template <typename S>
struct Linear {
  std::string name;
  Matrix<S> weight;  // out x in
  Vector<S> bias;
  bool adapted = false;
  std::optional<AdapterLayer<S>> adapter;
};

template <typename S>
struct LinearCache {
  ForwardCache<S> lora;
};

template <typename S>
Matrix<S> linear_forward(const Linear<S>& l, std::span<const S> src, const Matrix<S>& x,
                         LinearCache<S>& cache) {
  Matrix<S> y;
  if (l.adapter) {
    auto out = adapter_forward(*l.adapter, src, l.weight, x);
    y = std::move(out.y);
    cache.lora = std::move(out.cache);
  } else {
    y.noalias() = x * l.weight.transpose();
  }
  y.rowwise() += l.bias.transpose();
  return y;
}

template <typename S>
Matrix<S> linear_backward(const Linear<S>& l, const LinearCache<S>& cache, const Matrix<S>& gy,
                          std::span<S> grad_src) {
  if (l.adapter) return adapter_backward(*l.adapter, cache.lora, l.weight, gy, grad_src).grad_x;
  return gy * l.weight;
}

template <typename S>
Linear<S> init_linear(const LinearSpec& spec, RngStream& rng) {
  Linear<S> l;
  l.name = spec.name;
  l.adapted = spec.adapted;
  const double sigma = 1.0 / std::sqrt(static_cast<double>(spec.in));
  l.weight.resize(static_cast<Index>(spec.out), static_cast<Index>(spec.in));
  for (Index i = 0; i < l.weight.rows(); ++i)
    for (Index j = 0; j < l.weight.cols(); ++j) l.weight(i, j) = static_cast<S>(sigma * rng.normal());
  l.bias.resize(static_cast<Index>(spec.out));
  for (Index i = 0; i < l.bias.size(); ++i) l.bias(i) = static_cast<S>(rng.uniform(-0.1, 0.1));
  return l;
}

template <typename S>
void bind_linears(std::vector<Linear<S>>& linears, const ParameterSpaceLayout& layout,
                  const OneHotProjection* projection, S scaling) {
  for (auto& l : linears) {
    if (!l.adapted) continue;
    l.adapter = projection ? make_adapter<S>(layout, *projection, l.name, scaling)
                           : make_direct_adapter<S>(layout, l.name, scaling);
  }
}

class Fnv {
 public:
  template <typename T>
  void mix(const T* data, std::size_t count) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < count * sizeof(T); ++i) {
      h_ ^= bytes[i];
      h_ *= 0x100000001B3ull;
    }
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xCBF29CE484222325ull;
};

template <typename S>
S mse_and_grad(const Matrix<S>& pred, const Matrix<double>& target, Matrix<S>* grad) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw std::invalid_argument("prediction and target shapes differ");
  const Matrix<S> diff = pred - target.cast<S>();
  const S count = static_cast<S>(diff.size());
  if (grad) *grad = (S{2} / count) * diff;
  return diff.squaredNorm() / count;
}

// Mean cross-entropy of rows of logits against labels; grad = (softmax - onehot) / rows.
template <typename S>
S cross_entropy_and_grad(const Matrix<S>& logits, std::span<const int> labels, Matrix<S>* grad) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size())
    throw std::invalid_argument("one label per row is required");
  const auto rows = logits.rows();
  if (grad) grad->resize(rows, logits.cols());
  S total{0};
  for (Index i = 0; i < rows; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= logits.cols()) throw std::out_of_range("label outside the output range");
    const S mx = logits.row(i).maxCoeff();
    const auto shifted = (logits.row(i).array() - mx).matrix();
    const S lse = std::log(shifted.array().exp().sum());
    total += lse - shifted(y);
    if (grad) {
      grad->row(i) = (shifted.array() - lse).exp().matrix() / static_cast<S>(rows);
      (*grad)(i, y) -= S{1} / static_cast<S>(rows);
    }
  }
  return total / static_cast<S>(rows);
}

// ------------------------------------------------------------------ MLP

template <typename S>
class MlpModel final : public TinyModel<S> {
 public:
  MlpModel(const TinyModelConfig& config, std::uint64_t seed) {
    this->config_ = config;
    this->layout_ = model_layout(config);
    RngStream rng(seed, Stream::model_weights);
    for (const auto& spec : linear_specs(config)) linears_.push_back(init_linear<S>(spec, rng));
    if (config.task == TaskKind::classification) {
      classes_ = config.output_dim;
      this->head_.assign(classes_ * config.width + classes_, S{0});
    }
    bind(nullptr);
  }

  void bind(const OneHotProjection* projection) override {
    bind_linears(linears_, this->layout_, projection, static_cast<S>(this->config_.scaling));
    this->source_dim_ = projection ? projection->subspace_dim() : this->layout_.total_dim();
  }

  S loss(const TaskData& batch, std::span<const S> src, std::span<S> grad_src,
         std::span<S> grad_head) override {
    Pass pass;
    const Matrix<S> out = forward(batch, src, pass);
    const bool want_grad = !grad_src.empty() || !grad_head.empty();
    Matrix<S> g;
    S value;
    if (batch.kind == TaskKind::classification)
      value = cross_entropy_and_grad<S>(out, batch.labels, want_grad ? &g : nullptr);
    else
      value = mse_and_grad<S>(out, batch.y, want_grad ? &g : nullptr);
    if (want_grad) backward(pass, g, src, grad_src, grad_head);
    return value;
  }

  Matrix<S> outputs(const TaskData& batch, std::span<const S> src) override {
    Pass pass;
    return forward(batch, src, pass);
  }

  std::uint64_t base_checksum() const override {
    Fnv h;
    for (const auto& l : linears_) {
      h.mix(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
      h.mix(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
    }
    return h.value();
  }

  Matrix<double> base_weight(std::string_view module) const override {
    for (const auto& l : linears_)
      if (l.name == module && l.adapted) return l.weight.template cast<double>();
    throw std::out_of_range("no adapted module '" + std::string(module) + "'");
  }

  Vector<double> base_bias(std::string_view module) const override {
    for (const auto& l : linears_)
      if (l.name == module && l.adapted) return l.bias.template cast<double>();
    throw std::out_of_range("no adapted module '" + std::string(module) + "'");
  }

 private:
  struct Pass {
    std::vector<LinearCache<S>> caches;
    std::vector<Matrix<S>> activations;  // tanh outputs of hidden layers
  };

  std::size_t hidden_count() const { return this->config_.depth; }

  auto head_weight() const {
    return Eigen::Map<const Matrix<S>>(this->head_.data(), static_cast<Index>(classes_),
                                       static_cast<Index>(this->config_.width));
  }
  auto head_bias() const {
    return Eigen::Map<const Vector<S>>(this->head_.data() + classes_ * this->config_.width,
                                       static_cast<Index>(classes_));
  }

  Matrix<S> forward(const TaskData& batch, std::span<const S> src, Pass& pass) const {
    Matrix<S> h = batch.x.cast<S>();
    pass.caches.resize(linears_.size());
    for (std::size_t l = 0; l < linears_.size(); ++l) {
      Matrix<S> y = linear_forward(linears_[l], src, h, pass.caches[l]);
      if (l < hidden_count()) {
        h = y.array().tanh().matrix();
        pass.activations.push_back(h);
      } else {
        h = std::move(y);
      }
    }
    if (classes_ == 0) return h;
    Matrix<S> logits = h * head_weight().transpose();
    logits.rowwise() += head_bias().transpose();
    return logits;
  }

  void backward(const Pass& pass, Matrix<S> g, std::span<const S> /*src*/, std::span<S> grad_src,
                std::span<S> grad_head) const {
    std::vector<S> scratch;
    if (grad_src.empty()) {
      scratch.assign(this->source_dim_, S{0});
      grad_src = scratch;
    } else {
      std::fill(grad_src.begin(), grad_src.end(), S{0});
    }
    if (classes_ != 0) {
      const Matrix<S>& h = pass.activations.back();
      if (!grad_head.empty()) {
        Eigen::Map<Matrix<S>> gw(grad_head.data(), static_cast<Index>(classes_),
                                 static_cast<Index>(this->config_.width));
        Eigen::Map<Vector<S>> gb(grad_head.data() + classes_ * this->config_.width,
                                 static_cast<Index>(classes_));
        gw.noalias() = g.transpose() * h;
        gb = g.colwise().sum().transpose();
      }
      g = g * head_weight();
    }
    for (std::size_t l = linears_.size(); l-- > 0;) {
      if (l < hidden_count()) {
        const auto& a = pass.activations[l];
        g = (g.array() * (S{1} - a.array().square())).matrix();
      }
      g = linear_backward(linears_[l], pass.caches[l], g, grad_src);
    }
  }

  std::vector<Linear<S>> linears_;
  std::size_t classes_ = 0;
};

// ---------------------------------------------------------- transformer

template <typename S>
struct NormCache {
  Matrix<S> xhat;
  Vector<S> rstd;
};

// Row-wise layer norm without affine parameters.
template <typename S>
Matrix<S> layer_norm(const Matrix<S>& x, NormCache<S>& cache) {
  constexpr double kEps = 1e-5;
  const auto n = static_cast<S>(x.cols());
  cache.xhat.resize(x.rows(), x.cols());
  cache.rstd.resize(x.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    const S mean = x.row(i).sum() / n;
    const auto centered = (x.row(i).array() - mean).matrix();
    const S var = centered.squaredNorm() / n;
    const S rstd = S{1} / std::sqrt(var + static_cast<S>(kEps));
    cache.rstd(i) = rstd;
    cache.xhat.row(i) = centered * rstd;
  }
  return cache.xhat;
}

template <typename S>
Matrix<S> layer_norm_backward(const NormCache<S>& cache, const Matrix<S>& g) {
  const auto n = static_cast<S>(g.cols());
  Matrix<S> out(g.rows(), g.cols());
  for (Index i = 0; i < g.rows(); ++i) {
    const S mean_g = g.row(i).sum() / n;
    const S mean_gx = g.row(i).dot(cache.xhat.row(i)) / n;
    out.row(i) = cache.rstd(i) *
                 (g.row(i).array() - mean_g - cache.xhat.row(i).array() * mean_gx).matrix();
  }
  return out;
}

template <typename S>
S gelu(S u) {
  const S k = static_cast<S>(std::sqrt(2.0 / std::numbers::pi));
  return S{0.5} * u * (S{1} + std::tanh(k * (u + static_cast<S>(0.044715) * u * u * u)));
}

template <typename S>
S gelu_grad(S u) {
  const S k = static_cast<S>(std::sqrt(2.0 / std::numbers::pi));
  const S c = static_cast<S>(0.044715);
  const S t = std::tanh(k * (u + c * u * u * u));
  return S{0.5} * (S{1} + t) + S{0.5} * u * (S{1} - t * t) * k * (S{1} + S{3} * c * u * u);
}

template <typename S>
class ToyTransformer final : public TinyModel<S> {
 public:
  ToyTransformer(const TinyModelConfig& config, std::uint64_t seed) {
    this->config_ = config;
    this->layout_ = model_layout(config);
    const auto w = static_cast<Index>(config.width);
    RngStream rng(seed, Stream::model_weights);
    embed_.resize(static_cast<Index>(config.vocab), w);
    for (Index i = 0; i < embed_.rows(); ++i)
      for (Index j = 0; j < w; ++j) embed_(i, j) = static_cast<S>(rng.normal());
    pos_.resize(static_cast<Index>(config.seq_len), w);
    for (Index i = 0; i < pos_.rows(); ++i)
      for (Index j = 0; j < w; ++j) pos_(i, j) = static_cast<S>(0.1 * rng.normal());
    for (const auto& spec : linear_specs(config)) linears_.push_back(init_linear<S>(spec, rng));
    lm_head_.resize(static_cast<Index>(config.vocab), w);
    const double sigma = 1.0 / std::sqrt(static_cast<double>(config.width));
    for (Index i = 0; i < lm_head_.rows(); ++i)
      for (Index j = 0; j < w; ++j) lm_head_(i, j) = static_cast<S>(sigma * rng.normal());
    bind(nullptr);
  }

  void bind(const OneHotProjection* projection) override {
    bind_linears(linears_, this->layout_, projection, static_cast<S>(this->config_.scaling));
    this->source_dim_ = projection ? projection->subspace_dim() : this->layout_.total_dim();
  }

  S loss(const TaskData& batch, std::span<const S> src, std::span<S> grad_src,
         std::span<S> /*grad_head*/) override {
    Pass pass;
    const Matrix<S> logits = forward(batch, src, pass);
    std::vector<int> labels;
    for (const auto& t : batch.targets) labels.insert(labels.end(), t.begin(), t.end());
    Matrix<S> g;
    const S value = cross_entropy_and_grad<S>(logits, labels, grad_src.empty() ? nullptr : &g);
    if (!grad_src.empty()) backward(pass, g, grad_src);
    return value;
  }

  Matrix<S> outputs(const TaskData& batch, std::span<const S> src) override {
    Pass pass;
    return forward(batch, src, pass);
  }

  std::uint64_t base_checksum() const override {
    Fnv h;
    h.mix(embed_.data(), static_cast<std::size_t>(embed_.size()));
    h.mix(pos_.data(), static_cast<std::size_t>(pos_.size()));
    h.mix(lm_head_.data(), static_cast<std::size_t>(lm_head_.size()));
    for (const auto& l : linears_) {
      h.mix(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
      h.mix(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
    }
    return h.value();
  }

  Matrix<double> base_weight(std::string_view module) const override {
    for (const auto& l : linears_)
      if (l.name == module && l.adapted) return l.weight.template cast<double>();
    throw std::out_of_range("no adapted module '" + std::string(module) + "'");
  }

  Vector<double> base_bias(std::string_view module) const override {
    for (const auto& l : linears_)
      if (l.name == module && l.adapted) return l.bias.template cast<double>();
    throw std::out_of_range("no adapted module '" + std::string(module) + "'");
  }

 private:
  enum Slot { kQ = 0, kK, kV, kO, kFc1, kFc2, kSlots };

  struct BlockCache {
    NormCache<S> norm1, norm2;
    LinearCache<S> lin[kSlots];
    Matrix<S> q, k, v;
    std::vector<Matrix<S>> probs;  // per (sequence, head), T x T
    Matrix<S> pre_act;             // fc1 output
  };

  struct Pass {
    std::size_t batch = 0;
    std::vector<BlockCache> blocks;
    NormCache<S> final_norm;
    Matrix<S> features;
  };

  const Linear<S>& lin(std::size_t block, int slot) const {
    return linears_[block * kSlots + static_cast<std::size_t>(slot)];
  }

  Matrix<S> forward(const TaskData& batch, std::span<const S> src, Pass& pass) const {
    const auto& c = this->config_;
    const std::size_t B = batch.inputs.size();
    const auto T = static_cast<Index>(c.seq_len);
    const auto w = static_cast<Index>(c.width);
    const auto H = static_cast<Index>(c.heads);
    const Index dh = w / H;
    const S inv_sqrt = S{1} / std::sqrt(static_cast<S>(dh));
    pass.batch = B;

    Matrix<S> x(static_cast<Index>(B) * T, w);
    for (std::size_t b = 0; b < B; ++b) {
      if (batch.inputs[b].size() != c.seq_len)
        throw std::invalid_argument("sequence length differs from the model's");
      for (Index t = 0; t < T; ++t) {
        const int tok = batch.inputs[b][static_cast<std::size_t>(t)];
        if (tok < 0 || tok >= static_cast<int>(c.vocab)) throw std::out_of_range("token outside vocabulary");
        x.row(static_cast<Index>(b) * T + t) = embed_.row(tok) + pos_.row(t);
      }
    }

    pass.blocks.resize(c.depth);
    for (std::size_t l = 0; l < c.depth; ++l) {
      auto& bc = pass.blocks[l];
      const Matrix<S> a = layer_norm(x, bc.norm1);
      bc.q = linear_forward(lin(l, kQ), src, a, bc.lin[kQ]);
      bc.k = linear_forward(lin(l, kK), src, a, bc.lin[kK]);
      bc.v = linear_forward(lin(l, kV), src, a, bc.lin[kV]);
      Matrix<S> o(x.rows(), w);
      bc.probs.resize(B * static_cast<std::size_t>(H));
      for (std::size_t b = 0; b < B; ++b) {
        const Index r0 = static_cast<Index>(b) * T;
        for (Index h = 0; h < H; ++h) {
          const auto q = bc.q.block(r0, h * dh, T, dh);
          const auto k = bc.k.block(r0, h * dh, T, dh);
          const auto v = bc.v.block(r0, h * dh, T, dh);
          Matrix<S> p = inv_sqrt * (q * k.transpose());
          for (Index i = 0; i < T; ++i) {
            const S mx = p.row(i).head(i + 1).maxCoeff();
            S sum{0};
            for (Index j = 0; j <= i; ++j) {
              p(i, j) = std::exp(p(i, j) - mx);
              sum += p(i, j);
            }
            for (Index j = 0; j <= i; ++j) p(i, j) /= sum;
            for (Index j = i + 1; j < T; ++j) p(i, j) = S{0};
          }
          o.block(r0, h * dh, T, dh).noalias() = p * v;
          bc.probs[b * static_cast<std::size_t>(H) + static_cast<std::size_t>(h)] = std::move(p);
        }
      }
      x += linear_forward(lin(l, kO), src, o, bc.lin[kO]);
      const Matrix<S> cn = layer_norm(x, bc.norm2);
      bc.pre_act = linear_forward(lin(l, kFc1), src, cn, bc.lin[kFc1]);
      const Matrix<S> act = bc.pre_act.unaryExpr([](S u) { return gelu(u); });
      x += linear_forward(lin(l, kFc2), src, act, bc.lin[kFc2]);
    }
    pass.features = layer_norm(x, pass.final_norm);
    return pass.features * lm_head_.transpose();
  }

  void backward(const Pass& pass, const Matrix<S>& g_logits, std::span<S> grad_src) const {
    const auto& c = this->config_;
    const auto T = static_cast<Index>(c.seq_len);
    const auto w = static_cast<Index>(c.width);
    const auto H = static_cast<Index>(c.heads);
    const Index dh = w / H;
    const S inv_sqrt = S{1} / std::sqrt(static_cast<S>(dh));
    std::fill(grad_src.begin(), grad_src.end(), S{0});

    Matrix<S> gx = layer_norm_backward(pass.final_norm, Matrix<S>(g_logits * lm_head_));
    for (std::size_t l = c.depth; l-- > 0;) {
      const auto& bc = pass.blocks[l];
      // x2 = x1 + fc2(gelu(fc1(ln2(x1))))
      Matrix<S> g_act = linear_backward(lin(l, kFc2), bc.lin[kFc2], gx, grad_src);
      const Matrix<S> g_pre =
          (g_act.array() * bc.pre_act.unaryExpr([](S u) { return gelu_grad(u); }).array()).matrix();
      const Matrix<S> g_cn = linear_backward(lin(l, kFc1), bc.lin[kFc1], g_pre, grad_src);
      gx += layer_norm_backward(bc.norm2, g_cn);
      // x1 = x + o(attn(ln1(x)))
      const Matrix<S> g_o = linear_backward(lin(l, kO), bc.lin[kO], gx, grad_src);
      Matrix<S> gq = Matrix<S>::Zero(g_o.rows(), w);
      Matrix<S> gk = Matrix<S>::Zero(g_o.rows(), w);
      Matrix<S> gv = Matrix<S>::Zero(g_o.rows(), w);
      for (std::size_t b = 0; b < pass.batch; ++b) {
        const Index r0 = static_cast<Index>(b) * T;
        for (Index h = 0; h < H; ++h) {
          const auto& p = bc.probs[b * static_cast<std::size_t>(H) + static_cast<std::size_t>(h)];
          const auto q = bc.q.block(r0, h * dh, T, dh);
          const auto k = bc.k.block(r0, h * dh, T, dh);
          const auto v = bc.v.block(r0, h * dh, T, dh);
          const auto go = g_o.block(r0, h * dh, T, dh);
          const Matrix<S> gp = go * v.transpose();
          gv.block(r0, h * dh, T, dh).noalias() = p.transpose() * go;
          Matrix<S> gs(T, T);
          for (Index i = 0; i < T; ++i) {
            const S dot = p.row(i).dot(gp.row(i));
            gs.row(i) = (p.row(i).array() * (gp.row(i).array() - dot)).matrix();
          }
          gs *= inv_sqrt;
          gq.block(r0, h * dh, T, dh).noalias() = gs * k;
          gk.block(r0, h * dh, T, dh).noalias() = gs.transpose() * q;
        }
      }
      Matrix<S> ga = linear_backward(lin(l, kQ), bc.lin[kQ], gq, grad_src);
      ga += linear_backward(lin(l, kK), bc.lin[kK], gk, grad_src);
      ga += linear_backward(lin(l, kV), bc.lin[kV], gv, grad_src);
      gx += layer_norm_backward(bc.norm1, ga);
    }
  }

  Matrix<S> embed_;
  Matrix<S> pos_;
  Matrix<S> lm_head_;
  std::vector<Linear<S>> linears_;
};

}  // namespace

std::string_view to_string(Architecture arch) noexcept {
  return arch == Architecture::mlp ? "mlp" : "toy-transformer";
}

Architecture parse_architecture(std::string_view text) {
  if (text == "mlp") return Architecture::mlp;
  if (text == "toy-transformer" || text == "transformer") return Architecture::toy_transformer;
  throw std::invalid_argument("unknown architecture '" + std::string(text) + "'");
}

void validate(const TinyModelConfig& c) {
  if (c.depth == 0 || c.width == 0 || c.rank == 0)
    throw std::invalid_argument("depth, width and rank must be positive");
  if (c.architecture == Architecture::mlp) {
    if (c.task == TaskKind::char_lm) throw std::invalid_argument("char-lm needs the toy transformer");
    if (c.input_dim == 0 || c.output_dim == 0)
      throw std::invalid_argument("input_dim and output_dim must be positive");
    if (c.task == TaskKind::classification && c.output_dim < 2)
      throw std::invalid_argument("classification needs at least two classes");
  } else {
    if (c.task != TaskKind::char_lm) throw std::invalid_argument("the toy transformer runs char-lm only");
    if (c.heads == 0 || c.width % c.heads != 0)
      throw std::invalid_argument("heads must divide width");
    if (c.vocab == 0 || c.vocab > 128) throw std::invalid_argument("vocab must be in [1, 128]");
    if (c.seq_len == 0) throw std::invalid_argument("seq_len must be positive");
  }
}

ParameterSpaceLayout model_layout(const TinyModelConfig& config) {
  validate(config);
  ParameterSpaceLayout layout;
  for (const auto& s : linear_specs(config))
    if (s.adapted) layout.register_module({s.name, s.out, s.in, config.rank});
  if (layout.empty()) throw std::invalid_argument("no module is adapted");
  return layout;
}

template <typename S>
std::unique_ptr<TinyModel<S>> make_model(const TinyModelConfig& config, std::uint64_t seed) {
  validate(config);
  if (config.architecture == Architecture::mlp) return std::make_unique<MlpModel<S>>(config, seed);
  return std::make_unique<ToyTransformer<S>>(config, seed);
}

template std::unique_ptr<TinyModel<float>> make_model<float>(const TinyModelConfig&, std::uint64_t);
template std::unique_ptr<TinyModel<double>> make_model<double>(const TinyModelConfig&, std::uint64_t);

}  // namespace sublora
