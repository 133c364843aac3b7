#pragma once

// Serial double-precision reference for the dual-stream encoder and
// classifier. Straight loops over explicit edge lists, no shared code with
// the library's matrix core; kept as the independent oracle for the
// optimized path and as the baseline for the benchmark target.

#include <vector>

#include "chartrevive/graph.hpp"
#include "chartrevive/neural.hpp"

namespace chartrevive::refimpl {

using DMat = std::vector<std::vector<double>>;

struct RefLayers {
  DMat h1, h2;  // per-node layer outputs
};

RefLayers ref_encoder_forward(const graph::ChartGraph& g, neural::ModelWeights& w,
                              neural::Stream stream);

// Per-element class probabilities through fusion, pooling and the MLP.
DMat ref_forward_probs(const graph::ChartGraph& g, neural::ModelWeights& w);

// Mean cross-entropy over elements, matching neural::graph_loss semantics.
double ref_loss(const graph::ChartGraph& g, neural::ModelWeights& w,
                const std::vector<int>& labels);

}  // namespace chartrevive::refimpl
