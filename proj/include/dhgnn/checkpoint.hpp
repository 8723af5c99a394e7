#pragma once

#include <string>

#include "dhgnn/model.hpp"

namespace dhgnn {

// Flat binary container: magic "DHG1", u32 tensor count, then per tensor
// u32 name length, name bytes, u32 rows, u32 cols, row-major f64
// little-endian values. Model parameters are stored under their registry
// names plus reserved 1x1 "meta.*" tensors carrying the architecture knobs
// that shapes alone cannot recover (beta, chunks, adj_rows_shared, task).
void save_checkpoint(const std::string& path, const ModelParams& mp, const ModelConfig& cfg);

struct LoadedModel {
    ModelParams params;
    ModelConfig config;  // dropouts zeroed; inference-oriented
};

// Rebuilds the model from a checkpoint alone. Unknown names, missing
// parameters, or shape inconsistencies raise MalformedInputError.
LoadedModel load_checkpoint(const std::string& path);

}  // namespace dhgnn
