#include "chartrevive/neural.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sha256.hpp"

static_assert(std::endian::native == std::endian::little,
              "weights payload is little-endian; big-endian hosts are unsupported");

namespace chartrevive::neural {

const char* encoder_config_name(EncoderConfig c) {
  switch (c) {
    case EncoderConfig::Both: return "both";
    case EncoderConfig::StrokeOnly: return "stroke";
    case EncoderConfig::ElementOnly: return "element";
  }
  return "?";
}

EncoderConfig encoder_config_from_name(const std::string& name) {
  if (name == "both") return EncoderConfig::Both;
  if (name == "stroke") return EncoderConfig::StrokeOnly;
  if (name == "element") return EncoderConfig::ElementOnly;
  raise(Errc::BadFlag, "unknown encoder config '" + name + "'");
}

// --- spec-surface ops ----------------------------------------------------------

std::vector<Mat<float>> encoder_forward(const graph::ChartGraph& g, ModelWeights& w,
                                        Stream stream) {
  ForwardCache<float> cache;
  cache.x = node_features<float>(g);
  if (stream == Stream::Stroke) {
    if (w.params.s_w1.empty()) raise(Errc::DimMismatch, "model has no stroke encoder");
    linear_relu(cache.x, w.params.s_w1, w.params.s_b1, cache.h1s);
    stroke_neighbor_mean(g, cache.h1s, cache.ms);
    Mat<float> a, an;
    std::vector<float> zero(size_t(kHiddenDim), 0.0f);
    linear_relu(cache.h1s, w.params.s_wself, w.params.s_b2, a, false);
    linear_relu(cache.ms, w.params.s_wnbr, zero, an, false);
    cache.h2s = Mat<float>(a.rows, a.cols);
    for (size_t i = 0; i < a.v.size(); ++i)
      cache.h2s.v[i] = std::max(0.0f, a.v[i] + an.v[i]);
    return {cache.h1s, cache.h2s};
  }
  if (w.params.e_w1.empty()) raise(Errc::DimMismatch, "model has no element encoder");
  linear_relu(cache.x, w.params.e_w1, w.params.e_b1, cache.h1e);
  element_neighbor_mean(g, cache.h1e, cache.me);
  linear_relu(cache.me, w.params.e_w2, w.params.e_b2, cache.h2e);
  return {cache.h1e, cache.h2e};
}

Mat<float> fuse_and_pool(const graph::ChartGraph& g, const std::vector<Mat<float>>& stroke_layers,
                         const std::vector<Mat<float>>& element_layers) {
  int n = int(g.nodes.size());
  int fd = 0;
  for (const auto& m : stroke_layers) fd += m.cols;
  for (const auto& m : element_layers) fd += m.cols;

  Mat<float> fused(n, fd);
  for (int i = 0; i < n; ++i) {
    float* f = fused.row(i);
    int off = 0;
    for (const auto& m : stroke_layers) {
      std::copy_n(m.row(i), m.cols, f + off);
      off += m.cols;
    }
    for (const auto& m : element_layers) {
      std::copy_n(m.row(i), m.cols, f + off);
      off += m.cols;
    }
  }

  std::vector<int> live;
  for (size_t e = 0; e < g.element_nodes.size(); ++e)
    if (!g.element_nodes[e].empty()) live.push_back(int(e));

  Mat<float> emb(int(live.size()), fd);
  for (size_t r = 0; r < live.size(); ++r) {
    const auto& members = g.element_nodes[size_t(live[r])];
    float* out = emb.row(int(r));
    for (int i : members) {
      const float* f = fused.row(i);
      for (int c = 0; c < fd; ++c) out[c] += f[c];
    }
    float inv = 1.0f / float(members.size());
    for (int c = 0; c < fd; ++c) out[c] *= inv;
  }
  return emb;
}

Mat<float> classify(const Mat<float>& embeddings, ModelWeights& w) {
  Mat<float> z1, z2, logits;
  linear_relu(embeddings, w.params.c_w1, w.params.c_b1, z1);
  linear_relu(z1, w.params.c_w2, w.params.c_b2, z2);
  linear_relu(z2, w.params.c_w3, w.params.c_b3, logits, false);
  for (int i = 0; i < logits.rows; ++i) {
    float* row = logits.row(i);
    float mx = row[0];
    for (int c = 1; c < logits.cols; ++c) mx = std::max(mx, row[c]);
    float sum = 0;
    for (int c = 0; c < logits.cols; ++c) {
      row[c] = std::exp(row[c] - mx);
      sum += row[c];
    }
    for (int c = 0; c < logits.cols; ++c) row[c] /= sum;
  }
  return logits;
}

std::vector<Prediction> predict(const graph::ChartGraph& g, ModelWeights& w) {
  ForwardCache<float> cache;
  forward(g, w.params, w.config, cache);
  std::vector<Prediction> out;
  out.reserve(size_t(cache.probs.rows));
  for (int r = 0; r < cache.probs.rows; ++r) {
    const float* row = cache.probs.row(r);
    Prediction p;
    p.element = cache.live_elements[size_t(r)];
    p.class_id = int(std::max_element(row, row + cache.probs.cols) - row);
    p.confidence = row[p.class_id];
    out.push_back(p);
  }
  return out;
}

// --- training -------------------------------------------------------------------

namespace {

struct Adam {
  std::vector<float> m, v;
  int64_t t = 0;

  explicit Adam(size_t n) : m(n, 0.0f), v(n, 0.0f) {}

  void step(float* w, const float* g, size_t n, const TrainConfig& cfg) {
    ++t;
    double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
    double corr1 = 1.0 - std::pow(b1, double(t));
    double corr2 = 1.0 - std::pow(b2, double(t));
    for (size_t i = 0; i < n; ++i) {
      m[i] = float(b1 * m[i] + (1 - b1) * g[i]);
      v[i] = float(b2 * v[i] + (1 - b2) * double(g[i]) * double(g[i]));
      double mhat = m[i] / corr1;
      double vhat = v[i] / corr2;
      w[i] -= float(cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps));
    }
  }
};

void flatten_grad(ParamsT<float>& grad, std::vector<float>& out) {
  out.clear();
  for (auto& t : grad.tensors()) out.insert(out.end(), t.data, t.data + t.size);
}

}  // namespace

TrainResult train(const std::vector<TrainSample>& dataset,
                  const std::vector<std::string>& taxonomy, EncoderConfig config,
                  const TrainConfig& cfg) {
  if (dataset.empty()) raise(Errc::InvalidSpec, "empty training dataset");
  if (taxonomy.empty()) raise(Errc::InvalidSpec, "empty taxonomy");
  int classes = int(taxonomy.size());
  for (const TrainSample& s : dataset) {
    if (s.labels.size() != s.graph.element_nodes.size())
      raise(Errc::LabelOutOfRange, "label count does not match element count");
    for (size_t e = 0; e < s.labels.size(); ++e)
      if (!s.graph.element_nodes[e].empty() &&
          (s.labels[e] < 0 || s.labels[e] >= classes))
        raise(Errc::LabelOutOfRange, "label " + std::to_string(s.labels[e]) + " with " +
                                         std::to_string(classes) + " classes");
  }

  TrainResult result;
  result.weights.config = config;
  result.weights.taxonomy = taxonomy;
  result.weights.params = make_params<float>(config, classes);
  init_params(result.weights.params, cfg.seed);
  ParamsT<float>& params = result.weights.params;

  Adam adam(params.total_size());
  std::vector<size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), size_t(0));

  int batch = std::max(1, cfg.batch_charts);
  std::vector<ParamsT<float>> grads(static_cast<size_t>(batch));
  std::vector<double> losses(size_t(batch), 0.0);
  std::vector<float> flat_grad, flat_acc;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(hash_combine(cfg.seed, uint64_t(epoch) + 1));
    shuffle_rng.shuffle(order);

    double epoch_ce = 0;
    size_t epoch_elems = 0;

    for (size_t begin = 0; begin < order.size(); begin += size_t(batch)) {
      size_t count = std::min(size_t(batch), order.size() - begin);

      size_t batch_elems = 0;
      for (size_t b = 0; b < count; ++b) {
        const TrainSample& s = dataset[order[begin + b]];
        for (const auto& members : s.graph.element_nodes)
          if (!members.empty()) ++batch_elems;
      }
      if (batch_elems == 0) continue;
      float scale = 1.0f / float(batch_elems);

      // Per-graph gradients land in per-slot buffers and are reduced in slot
      // order, so results do not depend on the worker count.
#pragma omp parallel for schedule(dynamic)
      for (size_t b = 0; b < count; ++b) {
        const TrainSample& s = dataset[order[begin + b]];
        ParamsT<float>& grad = grads[b];
        grad = make_params<float>(config, classes);
        for (auto& t : grad.tensors()) std::fill_n(t.data, t.size, 0.0f);
        ForwardCache<float> cache;
        forward(s.graph, params, config, cache);
        losses[b] = double(graph_loss(cache, s.labels)) * cache.probs.rows;
        backward(s.graph, params, config, cache, s.labels, scale, grad);
      }

      flat_acc.assign(params.total_size(), 0.0f);
      for (size_t b = 0; b < count; ++b) {
        flatten_grad(grads[b], flat_grad);
        for (size_t i = 0; i < flat_acc.size(); ++i) flat_acc[i] += flat_grad[i];
        epoch_ce += losses[b];
      }
      epoch_elems += batch_elems;

      size_t off = 0;
      for (auto& t : params.tensors()) {
        adam.step(t.data, flat_acc.data() + off, t.size, cfg);
        off += t.size;
      }
    }

    double mean = epoch_ce / double(std::max<size_t>(1, epoch_elems));
    if (!std::isfinite(mean))
      raise(Errc::NonFiniteLoss, "non-finite loss at epoch " + std::to_string(epoch));
    result.epoch_loss.push_back(mean);
  }
  return result;
}

// --- weights io ------------------------------------------------------------------

namespace {

nlohmann::ordered_json dims_json(ModelWeights& w) {
  nlohmann::ordered_json dims;
  dims["config"] = encoder_config_name(w.config);
  dims["input"] = kInputDim;
  dims["hidden"] = kHiddenDim;
  dims["layers"] = kLayerCount;
  dims["fused"] = fused_dim(w.config);
  dims["classes"] = w.classes();
  return dims;
}

}  // namespace

void save_weights(ModelWeights& w, const std::string& path) {
  std::string payload;
  for (auto& t : w.params.tensors())
    payload.append(reinterpret_cast<const char*>(t.data), t.size * sizeof(float));

  nlohmann::ordered_json header;
  header["format_version"] = w.format_version;
  header["taxonomy"] = w.taxonomy;
  header["dims"] = dims_json(w);
  header["sha256"] = Sha256::hash(payload.data(), payload.size());

  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::IoError, "cannot open " + path + " for writing");
  out << header.dump() << '\n';
  out.write(payload.data(), std::streamsize(payload.size()));
  if (!out) raise(Errc::IoError, "short write to " + path);
}

ModelWeights load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::IoError, "cannot open " + path);
  std::string header_line;
  if (!std::getline(in, header_line)) raise(Errc::IoError, "empty weights file " + path);

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::IoError, std::string("bad weights header: ") + e.what());
  }
  if (!header.contains("format_version") || header["format_version"].get<int>() != kFormatVersion)
    raise(Errc::VersionMismatch, "weights format_version " +
                                     (header.contains("format_version")
                                          ? header["format_version"].dump()
                                          : std::string("missing")) +
                                     ", expected " + std::to_string(kFormatVersion));

  ModelWeights w;
  w.taxonomy = header["taxonomy"].get<std::vector<std::string>>();
  w.config = encoder_config_from_name(header["dims"]["config"].get<std::string>());
  w.params = make_params<float>(w.config, int(w.taxonomy.size()));

  std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (payload.size() != w.params.total_size() * sizeof(float))
    raise(Errc::ChecksumMismatch, "payload size " + std::to_string(payload.size()) +
                                      " does not match declared dims");
  if (Sha256::hash(payload.data(), payload.size()) != header["sha256"].get<std::string>())
    raise(Errc::ChecksumMismatch, "payload checksum mismatch in " + path);

  size_t off = 0;
  for (auto& t : w.params.tensors()) {
    std::memcpy(t.data, payload.data() + off, t.size * sizeof(float));
    off += t.size * sizeof(float);
  }
  return w;
}

}  // namespace chartrevive::neural
