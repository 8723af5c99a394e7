#pragma once

#include "dhgnn/dataset.hpp"
#include "dhgnn/rng.hpp"

namespace dhgnn {

// Random digraph with separately plantable forward and backward node-wise
// homophily on one edge set. A fwd_hom fraction of nodes emits only
// intra-class edges and the rest only inter-class ones (inter emitters at a
// higher out-degree so cross-class edges carry real mass; the mean
// out-degree stays avg_out_degree). Within every class a bwd_hom fraction
// of members receives the intra-class edges and the rest the inter-class
// ones, so mean out-neighbor homophily ~ fwd_hom while mean in-neighbor
// homophily ~ bwd_hom. Features mix the one-hot class centroid, scaled by
// 1 - feature_noise, with feature_noise * N(0, 1) per dimension. No splits
// are attached.
LabeledDataset synth_directed_homophily(int n, int num_classes, double fwd_hom, double bwd_hom,
                                        int avg_out_degree, double feature_noise, Rng& rng);

}  // namespace dhgnn
