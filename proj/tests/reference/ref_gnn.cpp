#include "ref_gnn.hpp"

#include <cmath>

namespace chartrevive::refimpl {

namespace {

using graph::ChartGraph;
using neural::kHiddenDim;
using neural::kInputDim;

// y = relu(W x + b), everything as plain loops
std::vector<double> dense(const neural::Mat<float>& w, const std::vector<float>& b,
                          const std::vector<double>& x, bool relu) {
  std::vector<double> y(size_t(w.rows), 0.0);
  for (int r = 0; r < w.rows; ++r) {
    double acc = double(b[size_t(r)]);
    for (int c = 0; c < w.cols; ++c) acc += double(w.at(r, c)) * x[size_t(c)];
    y[size_t(r)] = relu && acc < 0 ? 0.0 : acc;
  }
  return y;
}

std::vector<std::vector<int>> adjacency_from_pairs(size_t n,
                                                   const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(n);
  for (auto [a, b] : edges) {
    adj[size_t(a)].push_back(b);
    adj[size_t(b)].push_back(a);
  }
  return adj;
}

std::vector<double> node_input(const ChartGraph& g, int i) {
  std::vector<double> x(size_t(kInputDim));
  for (int k = 0; k < kInputDim; ++k) x[size_t(k)] = double(g.nodes[size_t(i)].features[size_t(k)]);
  return x;
}

}  // namespace

RefLayers ref_encoder_forward(const ChartGraph& g, neural::ModelWeights& w,
                              neural::Stream stream) {
  size_t n = g.nodes.size();
  RefLayers out;
  out.h1.resize(n);
  out.h2.resize(n);

  if (stream == neural::Stream::Stroke) {
    auto adj = adjacency_from_pairs(n, g.stroke_edges);
    for (size_t i = 0; i < n; ++i)
      out.h1[i] = dense(w.params.s_w1, w.params.s_b1, node_input(g, int(i)), true);
    for (size_t i = 0; i < n; ++i) {
      std::vector<double> mean(size_t(kHiddenDim), 0.0);
      if (!adj[i].empty()) {
        for (int j : adj[i])
          for (int c = 0; c < kHiddenDim; ++c) mean[size_t(c)] += out.h1[size_t(j)][size_t(c)];
        for (int c = 0; c < kHiddenDim; ++c) mean[size_t(c)] /= double(adj[i].size());
      }
      std::vector<double> a(size_t(kHiddenDim));
      for (int r = 0; r < kHiddenDim; ++r) {
        double acc = double(w.params.s_b2[size_t(r)]);
        for (int c = 0; c < kHiddenDim; ++c)
          acc += double(w.params.s_wself.at(r, c)) * out.h1[i][size_t(c)] +
                 double(w.params.s_wnbr.at(r, c)) * mean[size_t(c)];
        a[size_t(r)] = acc < 0 ? 0.0 : acc;
      }
      out.h2[i] = a;
    }
    return out;
  }

  // element stream: mean over element-wise neighbors plus self, from the
  // materialized element-edge list
  auto adj = adjacency_from_pairs(n, g.element_edges());
  for (size_t i = 0; i < n; ++i)
    out.h1[i] = dense(w.params.e_w1, w.params.e_b1, node_input(g, int(i)), true);
  for (size_t i = 0; i < n; ++i) {
    std::vector<double> mean = out.h1[i];
    for (int j : adj[i])
      for (int c = 0; c < kHiddenDim; ++c) mean[size_t(c)] += out.h1[size_t(j)][size_t(c)];
    double count = double(adj[i].size() + 1);
    for (int c = 0; c < kHiddenDim; ++c) mean[size_t(c)] /= count;
    std::vector<double> a(size_t(kHiddenDim));
    for (int r = 0; r < kHiddenDim; ++r) {
      double acc = double(w.params.e_b2[size_t(r)]);
      for (int c = 0; c < kHiddenDim; ++c) acc += double(w.params.e_w2.at(r, c)) * mean[size_t(c)];
      a[size_t(r)] = acc < 0 ? 0.0 : acc;
    }
    out.h2[i] = a;
  }
  return out;
}

DMat ref_forward_probs(const ChartGraph& g, neural::ModelWeights& w) {
  size_t n = g.nodes.size();
  bool stroke = w.config != neural::EncoderConfig::ElementOnly;
  bool element = w.config != neural::EncoderConfig::StrokeOnly;

  RefLayers s, e;
  if (stroke) s = ref_encoder_forward(g, w, neural::Stream::Stroke);
  if (element) e = ref_encoder_forward(g, w, neural::Stream::Element);

  DMat fused(n);
  for (size_t i = 0; i < n; ++i) {
    std::vector<double>& f = fused[i];
    if (stroke) {
      f.insert(f.end(), s.h1[i].begin(), s.h1[i].end());
      f.insert(f.end(), s.h2[i].begin(), s.h2[i].end());
    }
    if (element) {
      f.insert(f.end(), e.h1[i].begin(), e.h1[i].end());
      f.insert(f.end(), e.h2[i].begin(), e.h2[i].end());
    }
  }

  DMat probs;
  for (const auto& members : g.element_nodes) {
    if (members.empty()) continue;
    std::vector<double> emb(fused[0].size(), 0.0);
    for (int i : members)
      for (size_t c = 0; c < emb.size(); ++c) emb[c] += fused[size_t(i)][c];
    for (double& v : emb) v /= double(members.size());

    std::vector<double> femb(emb.begin(), emb.end());
    std::vector<double> z1 = dense(w.params.c_w1, w.params.c_b1, femb, true);
    std::vector<double> z2 = dense(w.params.c_w2, w.params.c_b2, z1, true);
    std::vector<double> logits = dense(w.params.c_w3, w.params.c_b3, z2, false);

    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double sum = 0;
    for (double& v : logits) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (double& v : logits) v /= sum;
    probs.push_back(logits);
  }
  return probs;
}

double ref_loss(const ChartGraph& g, neural::ModelWeights& w, const std::vector<int>& labels) {
  DMat probs = ref_forward_probs(g, w);
  double loss = 0;
  size_t row = 0;
  for (size_t e = 0; e < g.element_nodes.size(); ++e) {
    if (g.element_nodes[e].empty()) continue;
    loss -= std::log(std::max(probs[row][size_t(labels[e])], 1e-300));
    ++row;
  }
  return loss / double(std::max<size_t>(1, row));
}

}  // namespace chartrevive::refimpl
