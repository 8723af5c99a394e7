#include "dhgnn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

#include "dhgnn/errors.hpp"

static_assert(std::endian::native == std::endian::little, "checkpoint io assumes a little-endian host");

namespace dhgnn {

namespace {

constexpr char kMagic[4] = {'D', 'H', 'G', '1'};

void write_u32(std::ofstream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::ifstream& in, const std::string& what) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw MalformedInputError("checkpoint: truncated while reading " + what);
    return v;
}

void write_tensor(std::ofstream& out, const std::string& name, int rows, int cols, const double* vals) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(out, static_cast<std::uint32_t>(rows));
    write_u32(out, static_cast<std::uint32_t>(cols));
    out.write(reinterpret_cast<const char*>(vals),
              static_cast<std::streamsize>(sizeof(double) * rows * cols));
}

struct RawTensor {
    int rows = 0, cols = 0;
    std::vector<double> vals;
};

double meta_value(const std::map<std::string, RawTensor>& raw, const std::string& name) {
    auto it = raw.find(name);
    if (it == raw.end()) throw MalformedInputError("checkpoint: missing " + name);
    if (it->second.rows != 1 || it->second.cols != 1)
        throw MalformedInputError("checkpoint: " + name + " must be 1x1");
    return it->second.vals[0];
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& mp, const ModelConfig& cfg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MalformedInputError("cannot open checkpoint for writing: " + path);
    auto named = mp.named();
    out.write(kMagic, 4);
    write_u32(out, static_cast<std::uint32_t>(named.size() + 4));
    for (auto& [name, p] : named) write_tensor(out, name, p->rows, p->cols, p->ptr());
    double task = mp.task == Task::LinkPrediction ? 1.0 : 0.0;
    double shared = cfg.adj_rows_shared ? 1.0 : 0.0;
    double chunks = cfg.chunks;
    write_tensor(out, "meta.adj_rows_shared", 1, 1, &shared);
    write_tensor(out, "meta.beta", 1, 1, &cfg.beta);
    write_tensor(out, "meta.chunks", 1, 1, &chunks);
    write_tensor(out, "meta.task", 1, 1, &task);
    if (!out) throw MalformedInputError("checkpoint write failed: " + path);
}

LoadedModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MalformedInputError("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) throw MalformedInputError("checkpoint: bad magic");

    std::map<std::string, RawTensor> raw;
    std::uint32_t count = read_u32(in, "tensor count");
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint32_t len = read_u32(in, "name length");
        std::string name(len, '\0');
        in.read(name.data(), len);
        RawTensor t;
        t.rows = static_cast<int>(read_u32(in, "rows"));
        t.cols = static_cast<int>(read_u32(in, "cols"));
        if (t.rows < 0 || t.cols < 0 || static_cast<long long>(t.rows) * t.cols > (1LL << 31))
            throw MalformedInputError("checkpoint: implausible tensor shape for " + name);
        t.vals.resize(static_cast<std::size_t>(t.rows) * t.cols);
        in.read(reinterpret_cast<char*>(t.vals.data()),
                static_cast<std::streamsize>(sizeof(double) * t.vals.size()));
        if (!in) throw MalformedInputError("checkpoint: truncated while reading " + name);
        if (!raw.emplace(name, std::move(t)).second)
            throw MalformedInputError("checkpoint: duplicate tensor " + name);
    }

    Task task = meta_value(raw, "meta.task") != 0.0 ? Task::LinkPrediction : Task::NodeClassification;

    ModelConfig cfg;
    cfg.beta = meta_value(raw, "meta.beta");
    cfg.chunks = static_cast<int>(meta_value(raw, "meta.chunks"));
    cfg.adj_rows_shared = meta_value(raw, "meta.adj_rows_shared") != 0.0;
    cfg.input_dropout = 0.0;
    cfg.dropout = 0.0;

    auto need = [&](const std::string& name) -> const RawTensor& {
        auto it = raw.find(name);
        if (it == raw.end()) throw MalformedInputError("checkpoint: missing tensor " + name);
        return it->second;
    };

    const RawTensor& in_w = need("enc.fwd.in.w");
    cfg.hidden = in_w.cols;
    int in_dim = in_w.rows;
    cfg.layers = 0;
    while (raw.count("enc.fwd.layer" + std::to_string(cfg.layers) + ".gate.w")) ++cfg.layers;
    cfg.gate_mlp_layers = 0;
    while (raw.count("enc.fwd.layer0.reset" + std::to_string(cfg.gate_mlp_layers) + ".w")) ++cfg.gate_mlp_layers;
    cfg.adj_mlp_layers = 0;
    while (raw.count("fusion.adj" + std::to_string(cfg.adj_mlp_layers) + ".w")) ++cfg.adj_mlp_layers;
    const RawTensor& out_w = need("fusion.out.w");
    int out_dim = out_w.cols;
    int n = need("fusion.adj0.w").rows;
    cfg.validate();
    if (cfg.gate_dim() != need("enc.fwd.layer0.gate.w").cols)
        throw MalformedInputError("checkpoint: chunk count inconsistent with gate shapes");

    LoadedModel lm{ModelParams::build(cfg, task, in_dim, out_dim, n), cfg};
    for (auto& [name, p] : lm.params.named()) {
        const RawTensor& t = need(name);
        if (t.rows != p->rows || t.cols != p->cols)
            throw MalformedInputError("checkpoint: shape mismatch for " + name);
        *p->data = t.vals;
    }
    std::size_t expected = lm.params.named().size() + 4;
    if (raw.size() != expected) throw MalformedInputError("checkpoint: unexpected extra tensors");
    return lm;
}

}  // namespace dhgnn
