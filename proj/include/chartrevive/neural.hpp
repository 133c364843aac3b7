#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "chartrevive/error.hpp"
#include "chartrevive/graph.hpp"
#include "chartrevive/rng.hpp"

namespace chartrevive::neural {

inline constexpr int kInputDim = graph::kFeatureDim;
inline constexpr int kHiddenDim = 64;
inline constexpr int kLayerCount = 2;
inline constexpr int kFormatVersion = 1;

enum class Stream { Stroke, Element };

enum class EncoderConfig { Both, StrokeOnly, ElementOnly };

const char* encoder_config_name(EncoderConfig c);
EncoderConfig encoder_config_from_name(const std::string& name);

// Width of the fused per-node feature: layer outputs of every active stream
// concatenated.
inline int fused_dim(EncoderConfig c) {
  return (c == EncoderConfig::Both ? 2 : 1) * kLayerCount * kHiddenDim;
}

// --- dense-matrix core --------------------------------------------------------

template <typename T>
struct Mat {
  int rows = 0, cols = 0;
  std::vector<T> v;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), v(size_t(r) * size_t(c)) {}

  T* row(int r) { return v.data() + size_t(r) * cols; }
  const T* row(int r) const { return v.data() + size_t(r) * cols; }
  T& at(int r, int c) { return v[size_t(r) * cols + c]; }
  T at(int r, int c) const { return v[size_t(r) * cols + c]; }
  bool empty() const { return v.empty(); }
  size_t size() const { return v.size(); }
  void zero() { std::fill(v.begin(), v.end(), T(0)); }
};

// out[i] = relu(W * in[i] + b), W stored out_dim x in_dim row-major.
template <typename T>
void linear_relu(const Mat<T>& in, const Mat<T>& w, const std::vector<T>& b, Mat<T>& out,
                 bool relu = true) {
  if (in.cols != w.cols) raise(Errc::DimMismatch, "linear: input dim " + std::to_string(in.cols) +
                                                      " vs weight dim " + std::to_string(w.cols));
  out = Mat<T>(in.rows, w.rows);
  for (int i = 0; i < in.rows; ++i) {
    const T* x = in.row(i);
    T* y = out.row(i);
    for (int j = 0; j < w.rows; ++j) {
      const T* wr = w.row(j);
      T acc = b[size_t(j)];
      for (int k = 0; k < w.cols; ++k) acc += wr[k] * x[k];
      y[j] = relu ? (acc > T(0) ? acc : T(0)) : acc;
    }
  }
}

// --- parameters ---------------------------------------------------------------

template <typename T>
struct ParamsT {
  // stroke-wise encoder: per-node layer then two-transform aggregation layer
  Mat<T> s_w1;
  std::vector<T> s_b1;
  Mat<T> s_wself, s_wnbr;
  std::vector<T> s_b2;
  // element-wise encoder: per-node layer then single-transform aggregation layer
  Mat<T> e_w1;
  std::vector<T> e_b1;
  Mat<T> e_w2;
  std::vector<T> e_b2;
  // classifier MLP: fused -> 512 -> 256 -> C
  Mat<T> c_w1;
  std::vector<T> c_b1;
  Mat<T> c_w2;
  std::vector<T> c_b2;
  Mat<T> c_w3;
  std::vector<T> c_b3;

  struct TensorRef {
    const char* name;
    T* data;
    size_t size;
    int fan_in;
  };

  // Tensors in declaration order; this order defines the weights-file payload
  // and the init/optimizer traversal.
  std::vector<TensorRef> tensors() {
    std::vector<TensorRef> out;
    auto add_m = [&](const char* n, Mat<T>& m) {
      if (!m.empty()) out.push_back({n, m.v.data(), m.size(), m.cols});
    };
    auto add_b = [&](const char* n, std::vector<T>& b, int fan_in) {
      if (!b.empty()) out.push_back({n, b.data(), b.size(), fan_in});
    };
    add_m("s_w1", s_w1);
    add_b("s_b1", s_b1, kInputDim);
    add_m("s_wself", s_wself);
    add_m("s_wnbr", s_wnbr);
    add_b("s_b2", s_b2, kHiddenDim);
    add_m("e_w1", e_w1);
    add_b("e_b1", e_b1, kInputDim);
    add_m("e_w2", e_w2);
    add_b("e_b2", e_b2, kHiddenDim);
    add_m("c_w1", c_w1);
    add_b("c_b1", c_b1, c_w1.cols);
    add_m("c_w2", c_w2);
    add_b("c_b2", c_b2, c_w2.cols);
    add_m("c_w3", c_w3);
    add_b("c_b3", c_b3, c_w3.cols);
    return out;
  }

  size_t total_size() {
    size_t n = 0;
    for (auto& t : tensors()) n += t.size;
    return n;
  }
};

template <typename T>
ParamsT<T> make_params(EncoderConfig config, int classes) {
  ParamsT<T> p;
  bool stroke = config != EncoderConfig::ElementOnly;
  bool element = config != EncoderConfig::StrokeOnly;
  if (stroke) {
    p.s_w1 = Mat<T>(kHiddenDim, kInputDim);
    p.s_b1.resize(kHiddenDim);
    p.s_wself = Mat<T>(kHiddenDim, kHiddenDim);
    p.s_wnbr = Mat<T>(kHiddenDim, kHiddenDim);
    p.s_b2.resize(kHiddenDim);
  }
  if (element) {
    p.e_w1 = Mat<T>(kHiddenDim, kInputDim);
    p.e_b1.resize(kHiddenDim);
    p.e_w2 = Mat<T>(kHiddenDim, kHiddenDim);
    p.e_b2.resize(kHiddenDim);
  }
  int fd = fused_dim(config);
  p.c_w1 = Mat<T>(512, fd);
  p.c_b1.resize(512);
  p.c_w2 = Mat<T>(256, 512);
  p.c_b2.resize(256);
  p.c_w3 = Mat<T>(classes, 256);
  p.c_b3.resize(classes);
  return p;
}

template <typename T>
void init_params(ParamsT<T>& p, uint64_t seed) {
  Rng rng(seed);
  for (auto& t : p.tensors()) {
    double bound = std::sqrt(1.0 / double(t.fan_in));
    for (size_t i = 0; i < t.size; ++i) t.data[i] = T(rng.uniform(-bound, bound));
  }
}

template <typename To, typename From>
ParamsT<To> convert_params(ParamsT<From>& src) {
  ParamsT<To> dst;
  auto copy_m = [](const Mat<From>& a, Mat<To>& b) {
    b = Mat<To>(a.rows, a.cols);
    for (size_t i = 0; i < a.v.size(); ++i) b.v[i] = To(a.v[i]);
  };
  auto copy_b = [](const std::vector<From>& a, std::vector<To>& b) {
    b.assign(a.begin(), a.end());
  };
  copy_m(src.s_w1, dst.s_w1); copy_b(src.s_b1, dst.s_b1);
  copy_m(src.s_wself, dst.s_wself); copy_m(src.s_wnbr, dst.s_wnbr); copy_b(src.s_b2, dst.s_b2);
  copy_m(src.e_w1, dst.e_w1); copy_b(src.e_b1, dst.e_b1);
  copy_m(src.e_w2, dst.e_w2); copy_b(src.e_b2, dst.e_b2);
  copy_m(src.c_w1, dst.c_w1); copy_b(src.c_b1, dst.c_b1);
  copy_m(src.c_w2, dst.c_w2); copy_b(src.c_b2, dst.c_b2);
  copy_m(src.c_w3, dst.c_w3); copy_b(src.c_b3, dst.c_b3);
  return dst;
}

// --- forward / backward -------------------------------------------------------

template <typename T>
struct ForwardCache {
  Mat<T> x;                  // N x 17 node features
  Mat<T> h1s, ms, h2s;       // stroke stream
  Mat<T> h1e, me, h2e;       // element stream
  Mat<T> fused;              // N x fused_dim
  Mat<T> emb;                // E x fused_dim (per-element mean)
  Mat<T> z1, z2, probs;      // classifier activations; probs holds softmax rows
  std::vector<int> live_elements;  // element indices with >= 1 node
};

template <typename T>
Mat<T> node_features(const graph::ChartGraph& g) {
  Mat<T> x(int(g.nodes.size()), kInputDim);
  for (size_t i = 0; i < g.nodes.size(); ++i)
    for (int k = 0; k < kInputDim; ++k) x.at(int(i), k) = T(g.nodes[i].features[k]);
  return x;
}

// Mean of h over stroke neighbors; empty neighborhood yields the zero vector.
template <typename T>
void stroke_neighbor_mean(const graph::ChartGraph& g, const Mat<T>& h, Mat<T>& out) {
  out = Mat<T>(h.rows, h.cols);
  for (int i = 0; i < h.rows; ++i) {
    const auto& adj = g.stroke_adj[size_t(i)];
    if (adj.empty()) continue;
    T* o = out.row(i);
    for (int j : adj) {
      const T* hj = h.row(j);
      for (int k = 0; k < h.cols; ++k) o[k] += hj[k];
    }
    T inv = T(1) / T(adj.size());
    for (int k = 0; k < h.cols; ++k) o[k] *= inv;
  }
}

// Mean over element-wise neighbors plus self. The neighborhood of node i is
// every same-kind node that is not a stroke neighbor of i, so the sum is the
// kind total minus i's stroke neighbors.
template <typename T>
void element_neighbor_mean(const graph::ChartGraph& g, const Mat<T>& h, Mat<T>& out) {
  out = Mat<T>(h.rows, h.cols);
  std::vector<std::vector<T>> kind_sum(svg::kElemKindCount, std::vector<T>(size_t(h.cols)));
  for (int k = 0; k < svg::kElemKindCount; ++k)
    for (int i : g.kind_nodes[size_t(k)]) {
      const T* hi = h.row(i);
      for (int c = 0; c < h.cols; ++c) kind_sum[size_t(k)][size_t(c)] += hi[c];
    }
  for (int i = 0; i < h.rows; ++i) {
    int kind = int(g.nodes[size_t(i)].kind);
    const auto& adj = g.stroke_adj[size_t(i)];
    size_t count = g.kind_nodes[size_t(kind)].size() - adj.size();
    T* o = out.row(i);
    for (int c = 0; c < h.cols; ++c) o[c] = kind_sum[size_t(kind)][size_t(c)];
    for (int j : adj) {
      const T* hj = h.row(j);
      for (int c = 0; c < h.cols; ++c) o[c] -= hj[c];
    }
    T inv = T(1) / T(count);
    for (int c = 0; c < h.cols; ++c) o[c] *= inv;
  }
}

template <typename T>
void forward(const graph::ChartGraph& g, ParamsT<T>& p, EncoderConfig config,
             ForwardCache<T>& cache) {
  bool stroke = config != EncoderConfig::ElementOnly;
  bool element = config != EncoderConfig::StrokeOnly;
  int n = int(g.nodes.size());
  cache.x = node_features<T>(g);

  if (stroke) {
    linear_relu(cache.x, p.s_w1, p.s_b1, cache.h1s);
    stroke_neighbor_mean(g, cache.h1s, cache.ms);
    // h2s = relu(Wself h1 + Wnbr mean + b)
    Mat<T> a;
    linear_relu(cache.h1s, p.s_wself, p.s_b2, a, /*relu=*/false);
    Mat<T> an;
    std::vector<T> zero(size_t(kHiddenDim), T(0));
    linear_relu(cache.ms, p.s_wnbr, zero, an, /*relu=*/false);
    cache.h2s = Mat<T>(n, kHiddenDim);
    for (size_t i = 0; i < a.v.size(); ++i) {
      T v = a.v[i] + an.v[i];
      cache.h2s.v[i] = v > T(0) ? v : T(0);
    }
  }
  if (element) {
    linear_relu(cache.x, p.e_w1, p.e_b1, cache.h1e);
    element_neighbor_mean(g, cache.h1e, cache.me);
    linear_relu(cache.me, p.e_w2, p.e_b2, cache.h2e);
  }

  // fuse per node, then mean-pool per element
  int fd = fused_dim(config);
  cache.fused = Mat<T>(n, fd);
  for (int i = 0; i < n; ++i) {
    T* f = cache.fused.row(i);
    int off = 0;
    if (stroke) {
      std::copy_n(cache.h1s.row(i), kHiddenDim, f + off); off += kHiddenDim;
      std::copy_n(cache.h2s.row(i), kHiddenDim, f + off); off += kHiddenDim;
    }
    if (element) {
      std::copy_n(cache.h1e.row(i), kHiddenDim, f + off); off += kHiddenDim;
      std::copy_n(cache.h2e.row(i), kHiddenDim, f + off); off += kHiddenDim;
    }
  }

  cache.live_elements.clear();
  for (size_t e = 0; e < g.element_nodes.size(); ++e)
    if (!g.element_nodes[e].empty()) cache.live_elements.push_back(int(e));

  cache.emb = Mat<T>(int(cache.live_elements.size()), fd);
  for (size_t r = 0; r < cache.live_elements.size(); ++r) {
    const auto& members = g.element_nodes[size_t(cache.live_elements[r])];
    T* out = cache.emb.row(int(r));
    for (int i : members) {
      const T* f = cache.fused.row(i);
      for (int c = 0; c < fd; ++c) out[c] += f[c];
    }
    T inv = T(1) / T(members.size());
    for (int c = 0; c < fd; ++c) out[c] *= inv;
  }

  // classifier with row-wise softmax
  linear_relu(cache.emb, p.c_w1, p.c_b1, cache.z1);
  linear_relu(cache.z1, p.c_w2, p.c_b2, cache.z2);
  linear_relu(cache.z2, p.c_w3, p.c_b3, cache.probs, /*relu=*/false);
  for (int i = 0; i < cache.probs.rows; ++i) {
    T* row = cache.probs.row(i);
    T mx = row[0];
    for (int c = 1; c < cache.probs.cols; ++c) mx = std::max(mx, row[c]);
    T sum = T(0);
    for (int c = 0; c < cache.probs.cols; ++c) {
      row[c] = std::exp(row[c] - mx);
      sum += row[c];
    }
    T inv = T(1) / sum;
    for (int c = 0; c < cache.probs.cols; ++c) row[c] *= inv;
  }
}

// Mean cross-entropy over this graph's elements given per-element labels.
template <typename T>
T graph_loss(const ForwardCache<T>& cache, const std::vector<int>& labels) {
  T loss = T(0);
  for (int r = 0; r < cache.probs.rows; ++r) {
    int label = labels[size_t(cache.live_elements[size_t(r)])];
    loss -= std::log(std::max(cache.probs.at(r, label), T(1e-30)));
  }
  return loss / T(std::max(1, cache.probs.rows));
}

// Accumulates d(sum of per-element CE)/d(params) * scale into `grad`.
// Callers pass scale = 1 / (total elements in batch) to get the gradient of
// the batch-mean loss.
template <typename T>
void backward(const graph::ChartGraph& g, ParamsT<T>& p, EncoderConfig config,
              const ForwardCache<T>& cache, const std::vector<int>& labels, T scale,
              ParamsT<T>& grad) {
  bool stroke = config != EncoderConfig::ElementOnly;
  bool element = config != EncoderConfig::StrokeOnly;
  int n = int(g.nodes.size());
  int fd = fused_dim(config);
  int rows = cache.probs.rows;

  // d logits
  Mat<T> dz3 = cache.probs;
  for (int r = 0; r < rows; ++r) {
    dz3.at(r, labels[size_t(cache.live_elements[size_t(r)])]) -= T(1);
    T* d = dz3.row(r);
    for (int c = 0; c < dz3.cols; ++c) d[c] *= scale;
  }

  auto linear_backward = [](const Mat<T>& dz, const Mat<T>& in, const Mat<T>& w, Mat<T>& dw,
                            std::vector<T>& db, Mat<T>* din) {
    for (int i = 0; i < dz.rows; ++i) {
      const T* d = dz.row(i);
      const T* x = in.row(i);
      for (int j = 0; j < dz.cols; ++j) {
        T dj = d[j];
        if (dj == T(0)) continue;
        T* wr = dw.row(j);
        for (int k = 0; k < in.cols; ++k) wr[k] += dj * x[k];
        db[size_t(j)] += dj;
      }
      if (din) {
        T* di = din->row(i);
        for (int j = 0; j < dz.cols; ++j) {
          T dj = d[j];
          if (dj == T(0)) continue;
          const T* wr = w.row(j);
          for (int k = 0; k < in.cols; ++k) di[k] += dj * wr[k];
        }
      }
    }
  };
  auto relu_mask = [](Mat<T>& dz, const Mat<T>& out) {
    for (size_t i = 0; i < dz.v.size(); ++i)
      if (out.v[i] <= T(0)) dz.v[i] = T(0);
  };

  Mat<T> dz2(rows, 256);
  linear_backward(dz3, cache.z2, p.c_w3, grad.c_w3, grad.c_b3, &dz2);
  relu_mask(dz2, cache.z2);
  Mat<T> dz1(rows, 512);
  linear_backward(dz2, cache.z1, p.c_w2, grad.c_w2, grad.c_b2, &dz1);
  relu_mask(dz1, cache.z1);
  Mat<T> demb(rows, fd);
  linear_backward(dz1, cache.emb, p.c_w1, grad.c_w1, grad.c_b1, &demb);

  // un-pool: element embedding is the mean over its nodes
  Mat<T> dfused(n, fd);
  for (int r = 0; r < rows; ++r) {
    const auto& members = g.element_nodes[size_t(cache.live_elements[size_t(r)])];
    T inv = T(1) / T(members.size());
    const T* de = demb.row(r);
    for (int i : members) {
      T* df = dfused.row(i);
      for (int c = 0; c < fd; ++c) df[c] += de[c] * inv;
    }
  }

  int off = 0;
  if (stroke) {
    Mat<T> dh1(n, kHiddenDim), dh2(n, kHiddenDim);
    for (int i = 0; i < n; ++i) {
      std::copy_n(dfused.row(i) + off, kHiddenDim, dh1.row(i));
      std::copy_n(dfused.row(i) + off + kHiddenDim, kHiddenDim, dh2.row(i));
    }
    off += 2 * kHiddenDim;
    relu_mask(dh2, cache.h2s);
    Mat<T> dm(n, kHiddenDim);
    linear_backward(dh2, cache.h1s, p.s_wself, grad.s_wself, grad.s_b2, &dh1);
    {
      // the Wnbr half shares dh2; bias gradient already counted above
      std::vector<T> scratch(size_t(kHiddenDim), T(0));
      linear_backward(dh2, cache.ms, p.s_wnbr, grad.s_wnbr, scratch, &dm);
    }
    // backprop the stroke-neighbor mean
    for (int i = 0; i < n; ++i) {
      const auto& adj = g.stroke_adj[size_t(i)];
      if (adj.empty()) continue;
      T inv = T(1) / T(adj.size());
      const T* dmi = dm.row(i);
      for (int j : adj) {
        T* t = dh1.row(j);
        for (int c = 0; c < kHiddenDim; ++c) t[c] += dmi[c] * inv;
      }
    }
    relu_mask(dh1, cache.h1s);
    linear_backward(dh1, cache.x, p.s_w1, grad.s_w1, grad.s_b1, nullptr);
  }
  if (element) {
    Mat<T> dh1(n, kHiddenDim), dh2(n, kHiddenDim);
    for (int i = 0; i < n; ++i) {
      std::copy_n(dfused.row(i) + off, kHiddenDim, dh1.row(i));
      std::copy_n(dfused.row(i) + off + kHiddenDim, kHiddenDim, dh2.row(i));
    }
    relu_mask(dh2, cache.h2e);
    Mat<T> dme(n, kHiddenDim);
    linear_backward(dh2, cache.me, p.e_w2, grad.e_w2, grad.e_b2, &dme);

    // backprop the same-kind mean: node j receives dme_i / count_i from every
    // same-kind i that is not a stroke neighbor (self included)
    std::vector<T> inv_count(size_t(n), T(0));
    for (int i = 0; i < n; ++i) {
      size_t cnt = g.kind_nodes[size_t(int(g.nodes[size_t(i)].kind))].size() -
                   g.stroke_adj[size_t(i)].size();
      inv_count[size_t(i)] = T(1) / T(cnt);
    }
    std::vector<std::vector<T>> kind_total(svg::kElemKindCount,
                                           std::vector<T>(size_t(kHiddenDim)));
    for (int i = 0; i < n; ++i) {
      const T* dmi = dme.row(i);
      auto& tot = kind_total[size_t(int(g.nodes[size_t(i)].kind))];
      for (int c = 0; c < kHiddenDim; ++c) tot[size_t(c)] += dmi[c] * inv_count[size_t(i)];
    }
    for (int j = 0; j < n; ++j) {
      T* t = dh1.row(j);
      const auto& tot = kind_total[size_t(int(g.nodes[size_t(j)].kind))];
      for (int c = 0; c < kHiddenDim; ++c) t[c] += tot[size_t(c)];
      for (int i : g.stroke_adj[size_t(j)]) {
        const T* dmi = dme.row(i);
        for (int c = 0; c < kHiddenDim; ++c) t[c] -= dmi[c] * inv_count[size_t(i)];
      }
    }
    relu_mask(dh1, cache.h1e);
    linear_backward(dh1, cache.x, p.e_w1, grad.e_w1, grad.e_b1, nullptr);
  }
}

// --- public model -------------------------------------------------------------

struct ModelWeights {
  int format_version = kFormatVersion;
  EncoderConfig config = EncoderConfig::Both;
  std::vector<std::string> taxonomy;
  ParamsT<float> params;

  int classes() const { return int(taxonomy.size()); }
};

struct TrainConfig {
  double learning_rate = 0.001;
  int batch_charts = 16;
  int epochs = 200;
  uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

struct TrainSample {
  graph::ChartGraph graph;
  std::vector<int> labels;  // per element, indices into the taxonomy
};

struct TrainResult {
  ModelWeights weights;
  std::vector<double> epoch_loss;
};

TrainResult train(const std::vector<TrainSample>& dataset,
                  const std::vector<std::string>& taxonomy, EncoderConfig config,
                  const TrainConfig& cfg);

// Spec-surface operations. encoder_forward returns the per-layer node feature
// matrices for one stream; fuse_and_pool produces the per-element embeddings.
std::vector<Mat<float>> encoder_forward(const graph::ChartGraph& g, ModelWeights& w,
                                        Stream stream);
Mat<float> fuse_and_pool(const graph::ChartGraph& g, const std::vector<Mat<float>>& stroke_layers,
                         const std::vector<Mat<float>>& element_layers);
Mat<float> classify(const Mat<float>& embeddings, ModelWeights& w);

struct Prediction {
  int element = 0;
  int class_id = 0;
  float confidence = 0;
};

std::vector<Prediction> predict(const graph::ChartGraph& g, ModelWeights& w);

void save_weights(ModelWeights& w, const std::string& path);
ModelWeights load_weights(const std::string& path);

}  // namespace chartrevive::neural
