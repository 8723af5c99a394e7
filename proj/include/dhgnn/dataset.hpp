#pragma once

#include <string>
#include <vector>

#include "dhgnn/graph.hpp"
#include "dhgnn/tensor.hpp"

namespace dhgnn {

struct SplitMasks {
    std::vector<int> train, val, test;
};

struct LabeledDataset {
    DirectedGraph graph;
    Tensor features;          // n x d
    std::vector<int> labels;  // size n, values in [0, num_classes)
    int num_classes = 0;
    std::vector<SplitMasks> splits;  // may be empty; callers generate their own

    int num_nodes() const { return graph.num_nodes(); }
    int feature_dim() const { return features.cols; }
};

// Reads a dataset directory:
//   edges.tsv     one "src<TAB>dst" pair per line (directed)
//   features.tsv  one row of tab-separated floats per node
//   labels.tsv    one integer per node
//   splits.json   optional: [{"train":[...],"val":[...],"test":[...]}, ...]
// Malformed content raises MalformedInputError with file and line context.
LabeledDataset load_dataset(const std::string& dir);

// Inverse of load_dataset; creates the directory if needed. splits.json is
// written only when splits are present.
void save_dataset(const std::string& dir, const LabeledDataset& ds);

}  // namespace dhgnn
