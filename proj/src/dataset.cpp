#include "dhgnn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dhgnn/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dhgnn {

namespace {

[[noreturn]] void bad_line(const std::string& file, std::size_t line, const std::string& what) {
    throw MalformedInputError(file + " line " + std::to_string(line) + ": " + what);
}

std::ifstream open_required(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw MalformedInputError("cannot open " + path.string());
    return in;
}

// getline that tolerates CRLF input.
bool next_line(std::ifstream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

int parse_int(const std::string& tok, const std::string& file, std::size_t line) {
    int v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
        bad_line(file, line, "expected an integer, got '" + tok + "'");
    return v;
}

double parse_double(const std::string& tok, const std::string& file, std::size_t line) {
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || tok.empty())
        bad_line(file, line, "expected a number, got '" + tok + "'");
    return v;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::vector<int> split_indices(const json& arr, int n, const std::string& ctx) {
    if (!arr.is_array()) throw MalformedInputError("splits.json: " + ctx + " must be an array");
    std::vector<int> out;
    out.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_number_integer()) throw MalformedInputError("splits.json: " + ctx + " holds a non-integer");
        int idx = v.get<int>();
        if (idx < 0 || idx >= n)
            throw MalformedInputError("splits.json: " + ctx + " index " + std::to_string(idx) + " out of range");
        out.push_back(idx);
    }
    return out;
}

}  // namespace

LabeledDataset load_dataset(const std::string& dir) {
    fs::path root(dir);

    // features first: they fix the node count.
    std::vector<double> feat;
    int n = 0, d = -1;
    {
        auto in = open_required(root / "features.tsv");
        std::string line;
        std::size_t lineno = 0;
        while (next_line(in, line)) {
            ++lineno;
            if (line.empty()) bad_line("features.tsv", lineno, "empty row");
            auto toks = split_tabs(line);
            if (d < 0) d = static_cast<int>(toks.size());
            if (static_cast<int>(toks.size()) != d)
                bad_line("features.tsv", lineno,
                         "expected " + std::to_string(d) + " columns, got " + std::to_string(toks.size()));
            for (auto& tok : toks) feat.push_back(parse_double(tok, "features.tsv", lineno));
            ++n;
        }
        if (n == 0) throw MalformedInputError("features.tsv: no rows");
    }

    std::vector<Edge> edges;
    {
        auto in = open_required(root / "edges.tsv");
        std::string line;
        std::size_t lineno = 0;
        while (next_line(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            auto toks = split_tabs(line);
            if (toks.size() != 2) bad_line("edges.tsv", lineno, "expected 'src<TAB>dst'");
            int s = parse_int(toks[0], "edges.tsv", lineno);
            int t = parse_int(toks[1], "edges.tsv", lineno);
            if (s < 0 || s >= n || t < 0 || t >= n)
                bad_line("edges.tsv", lineno, "node id out of range [0, " + std::to_string(n) + ")");
            edges.emplace_back(s, t);
        }
    }

    LabeledDataset ds;
    ds.graph = DirectedGraph::from_edges(std::move(edges), n);
    ds.features = Tensor::from(n, d, std::move(feat));

    {
        auto in = open_required(root / "labels.tsv");
        std::string line;
        std::size_t lineno = 0;
        while (next_line(in, line)) {
            ++lineno;
            if (line.empty()) bad_line("labels.tsv", lineno, "empty row");
            int y = parse_int(line, "labels.tsv", lineno);
            if (y < 0) bad_line("labels.tsv", lineno, "negative label");
            ds.labels.push_back(y);
        }
        if (static_cast<int>(ds.labels.size()) != n)
            throw MalformedInputError("labels.tsv: " + std::to_string(ds.labels.size()) + " labels for " +
                                      std::to_string(n) + " nodes");
        ds.num_classes = *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
    }

    fs::path splits_path = root / "splits.json";
    if (fs::exists(splits_path)) {
        auto in = open_required(splits_path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw MalformedInputError(std::string("splits.json: ") + e.what());
        }
        if (!j.is_array()) throw MalformedInputError("splits.json: top level must be an array");
        for (std::size_t k = 0; k < j.size(); ++k) {
            const auto& s = j[k];
            std::string ctx = "split " + std::to_string(k);
            if (!s.is_object() || !s.contains("train") || !s.contains("val") || !s.contains("test"))
                throw MalformedInputError("splits.json: " + ctx + " needs train/val/test arrays");
            SplitMasks m;
            m.train = split_indices(s["train"], n, ctx + " train");
            m.val = split_indices(s["val"], n, ctx + " val");
            m.test = split_indices(s["test"], n, ctx + " test");
            ds.splits.push_back(std::move(m));
        }
    }
    return ds;
}

void save_dataset(const std::string& dir, const LabeledDataset& ds) {
    fs::path root(dir);
    fs::create_directories(root);
    char buf[64];

    {
        std::ofstream out(root / "edges.tsv");
        for (auto [s, t] : ds.graph.edge_list()) out << s << '\t' << t << '\n';
    }
    {
        std::ofstream out(root / "features.tsv");
        int n = ds.features.rows, d = ds.features.cols;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < d; ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", ds.features.at(i, j));
                if (j) out << '\t';
                out << buf;
            }
            out << '\n';
        }
    }
    {
        std::ofstream out(root / "labels.tsv");
        for (int y : ds.labels) out << y << '\n';
    }
    if (!ds.splits.empty()) {
        json j = json::array();
        for (const auto& s : ds.splits)
            j.push_back({{"train", s.train}, {"val", s.val}, {"test", s.test}});
        std::ofstream out(root / "splits.json");
        out << j.dump(2) << '\n';
    }
}

}  // namespace dhgnn
