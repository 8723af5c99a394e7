#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <doctest.h>

#include "dhgnn/errors.hpp"
#include "dhgnn/homophily.hpp"
#include "dhgnn/linkpred.hpp"
#include "dhgnn/model.hpp"
#include "dhgnn/ops.hpp"
#include "dhgnn/optimizer.hpp"
#include "dhgnn/rng.hpp"
#include "dhgnn/synth.hpp"
#include "dhgnn/train.hpp"

using namespace dhgnn;

TEST_SUITE("trainkit") {

TEST_CASE("optimizer at zero learning rate is a bit-exact no-op") {
    Tensor w = Tensor::leaf(2, 3);
    Rng rng(1);
    for (auto& v : *w.data) v = rng.uniform(-1, 1);
    for (auto& g : *w.grad) g = rng.uniform(-1, 1);
    auto before = *w.data;
    AdamW opt({&w}, 0.0, 0.3);
    opt.step();
    for (std::size_t i = 0; i < before.size(); ++i) CHECK((*w.data)[i] == before[i]);
}

TEST_CASE("decoupled decay shrinks zero-gradient weights by exactly (1 - lr*wd)") {
    Tensor w = Tensor::leaf(2, 2);
    const std::vector<double> start{1.0, -2.0, 0.5, 4.0};
    (*w.data) = start;
    w.zero_grad();
    double lr = 0.1, wd = 0.2;
    AdamW opt({&w}, lr, wd);
    opt.step();
    // gradient is zero so moments stay zero and only the decay acts
    for (std::size_t i = 0; i < 4; ++i) CHECK((*w.data)[i] == start[i] - lr * wd * start[i]);
}

TEST_CASE("first optimizer step matches the bias-corrected closed form") {
    Tensor w = Tensor::leaf(1, 1);
    (*w.data)[0] = 0.0;
    (*w.grad)[0] = 0.25;
    double lr = 0.01;
    AdamW opt({&w}, lr, 0.0);
    opt.step();
    // after bias correction the first step is lr * g / (|g| + eps)
    double want = -lr * 0.25 / (std::sqrt(0.25 * 0.25) + 1e-8);
    CHECK((*w.data)[0] == doctest::Approx(want).epsilon(1e-9));
    // zero_grad clears the accumulator
    opt.zero_grad();
    CHECK((*w.grad)[0] == 0.0);
}

TEST_CASE("initialization is deterministic, biases zero, weights inside the fan bound") {
    ModelConfig cfg;
    cfg.hidden = 8;
    cfg.chunks = 4;
    cfg.layers = 2;
    auto a = ModelParams::build(cfg, Task::NodeClassification, 5, 3, 9);
    auto b = ModelParams::build(cfg, Task::NodeClassification, 5, 3, 9);
    Rng r1(31), r2(31), r3(32);
    init_params(a, r1);
    init_params(b, r2);
    auto na = a.named(), nb = b.named();
    for (std::size_t i = 0; i < na.size(); ++i)
        for (std::size_t j = 0; j < na[i].second->size(); ++j)
            CHECK((*na[i].second->data)[j] == (*nb[i].second->data)[j]);

    for (auto& [name, t] : na) {
        std::string tail = name.substr(name.rfind('.') + 1);
        bool is_bias = tail[0] == 'b' && (tail.size() == 1 || std::isdigit(tail[1]));
        double bound = std::sqrt(6.0 / (t->rows + t->cols));
        for (double v : *t->data) {
            if (is_bias) CHECK(v == 0.0);
            else {
                CHECK(std::abs(v) <= bound);
            }
        }
    }

    // a different seed must actually change the draw
    init_params(b, r3);
    bool differs = false;
    for (std::size_t i = 0; i < na.size(); ++i)
        for (std::size_t j = 0; j < na[i].second->size(); ++j)
            if ((*na[i].second->data)[j] != (*nb[i].second->data)[j]) differs = true;
    CHECK(differs);
}

TEST_CASE("snapshot and restore round-trip every parameter") {
    ModelConfig cfg;
    cfg.hidden = 8;
    cfg.chunks = 2;
    cfg.layers = 1;
    auto mp = ModelParams::build(cfg, Task::NodeClassification, 4, 3, 6);
    Rng rng(77);
    init_params(mp, rng);
    auto snap = snapshot_params(mp);
    auto before = *mp.enc_fwd.in_w.data;
    for (auto& [name, t] : mp.named())
        for (auto& v : *t->data) v = -9.0;
    restore_params(mp, snap);
    for (std::size_t i = 0; i < before.size(); ++i)
        CHECK((*mp.enc_fwd.in_w.data)[i] == before[i]);
}

TEST_CASE("stratified splits preserve class ratios and partition the nodes") {
    std::vector<int> labels;
    for (int i = 0; i < 50; ++i) labels.push_back(0);
    for (int i = 0; i < 30; ++i) labels.push_back(1);
    for (int i = 0; i < 20; ++i) labels.push_back(2);
    Rng rng(5);
    auto splits = make_node_splits(labels, 10, 0.48, 0.32, rng);
    REQUIRE(splits.size() == 10);
    std::vector<int> class_sizes{50, 30, 20};
    for (const auto& s : splits) {
        std::set<int> seen;
        for (const auto* part : {&s.train, &s.val, &s.test}) {
            CHECK(std::is_sorted(part->begin(), part->end()));
            for (int v : *part) {
                CHECK(!seen.count(v));
                seen.insert(v);
            }
        }
        CHECK(seen.size() == labels.size());
        for (int c = 0; c < 3; ++c) {
            auto count_class = [&](const std::vector<int>& part) {
                int k = 0;
                for (int v : part)
                    if (labels[v] == c) k++;
                return k;
            };
            CHECK(std::abs(count_class(s.train) - 0.48 * class_sizes[c]) <= 1.0);
            CHECK(std::abs(count_class(s.val) - 0.32 * class_sizes[c]) <= 1.0);
            CHECK(std::abs(count_class(s.test) - 0.20 * class_sizes[c]) <= 1.0);
        }
    }
    // deterministic under the same seed, different across split indices
    Rng rng2(5);
    auto splits2 = make_node_splits(labels, 10, 0.48, 0.32, rng2);
    CHECK(splits[0].train == splits2[0].train);
    CHECK(splits[0].train != splits[1].train);
}

TEST_CASE("tiny classes fall back to unstratified splitting with a warning") {
    std::vector<int> labels{0, 0, 0, 0, 0, 0, 0, 0, 1, 2};  // classes 1,2 have 1 node
    Rng rng(9);
    std::string warning;
    auto splits = make_node_splits(labels, 3, 0.48, 0.32, rng, &warning);
    CHECK(!warning.empty());
    for (const auto& s : splits)
        CHECK(s.train.size() + s.val.size() + s.test.size() == labels.size());
}

TEST_CASE("synthetic generator hits the planted homophily targets") {
    Rng rng(2024);
    auto ds = synth_directed_homophily(600, 3, 0.8, 0.3, 6, 0.5, rng);
    CHECK(ds.num_nodes() == 600);
    CHECK(ds.num_classes == 3);
    CHECK(ds.feature_dim() == 3);
    // inter emitters run at 2.5x the average degree, so the edge-level
    // ratio sits well below the node-level forward mean: intra edge mass
    // = 1 - (1 - fwd_hom) * 2.5
    auto eh = edge_homophily(ds.graph, ds.labels);
    REQUIRE(eh.has_value());
    CHECK(std::abs(*eh - 0.5) < 0.03);
    auto fwd = avg_homophily_curve(ds.graph, ds.labels, 1, Direction::Forward);
    REQUIRE(fwd[0].mean.has_value());
    CHECK(std::abs(*fwd[0].mean - 0.8) < 0.03);
    auto bwd = avg_homophily_curve(ds.graph, ds.labels, 1, Direction::Backward);
    REQUIRE(bwd[0].mean.has_value());
    CHECK(std::abs(*bwd[0].mean - 0.3) < 0.06);
    // labels are balanced to within one node per class
    std::vector<int> counts(3, 0);
    for (int l : ds.labels) counts[l]++;
    CHECK(*std::max_element(counts.begin(), counts.end()) -
              *std::min_element(counts.begin(), counts.end()) <=
          1);
    CHECK_THROWS_AS(synth_directed_homophily(10, 1, 0.5, 0.5, 2, 0.1, rng), ConfigError);
    CHECK_THROWS_AS(synth_directed_homophily(10, 3, 1.5, 0.5, 2, 0.1, rng), ConfigError);
}

TEST_CASE("link split never leaks held-out edges into the message graph") {
    Rng gen(404);
    auto ds = synth_directed_homophily(150, 3, 0.85, 0.2, 5, 0.3, gen);
    for (bool direction_task : {false, true}) {
        Rng rng(11);
        auto split = make_link_split(ds.graph, 0.8, 0.1, 0.1, direction_task, rng);
        auto in = [](const std::vector<Edge>& es, Edge e) {
            return std::find(es.begin(), es.end(), e) != es.end();
        };
        (void)in;
        // positives partition (existence) or subset (direction) of the edges
        std::set<Edge> all_pos;
        for (const auto* part : {&split.train_pos, &split.val_pos, &split.test_pos})
            for (auto e : *part) {
                CHECK(ds.graph.has_edge(e.first, e.second));
                CHECK(!all_pos.count(e));
                all_pos.insert(e);
            }
        if (!direction_task) CHECK((std::int64_t)all_pos.size() == ds.graph.num_edges());

        // message graph = training positives exactly
        CHECK(split.message_graph.num_edges() == (std::int64_t)split.train_pos.size());
        for (auto e : split.train_pos) CHECK(split.message_graph.has_edge(e.first, e.second));
        for (auto e : split.val_pos) CHECK(!split.message_graph.has_edge(e.first, e.second));
        for (auto e : split.test_pos) CHECK(!split.message_graph.has_edge(e.first, e.second));

        // negatives are true non-edges, distinct, and matched in count
        std::set<Edge> negs;
        for (const auto* part : {&split.train_neg, &split.val_neg, &split.test_neg})
            for (auto e : *part) {
                CHECK(!ds.graph.has_edge(e.first, e.second));
                CHECK(e.first != e.second);
                CHECK(!negs.count(e));
                negs.insert(e);
            }
        CHECK(split.train_neg.size() == split.train_pos.size());
        CHECK(split.val_neg.size() == split.val_pos.size());
        CHECK(split.test_neg.size() == split.test_pos.size());

        if (direction_task)
            for (const auto* parts : {&split.train_pos, &split.val_pos, &split.test_pos}) {
                const std::vector<Edge>& pos = *parts;
                const std::vector<Edge>& neg = *parts == split.train_pos ? split.train_neg
                                               : (*parts == split.val_pos ? split.val_neg
                                                                          : split.test_neg);
                REQUIRE(pos.size() == neg.size());
                for (std::size_t i = 0; i < pos.size(); ++i) {
                    CHECK(neg[i].first == pos[i].second);
                    CHECK(neg[i].second == pos[i].first);
                }
            }
    }
    // a complete digraph has no negatives to sample
    std::vector<Edge> full;
    for (int u = 0; u < 4; ++u)
        for (int v = 0; v < 4; ++v)
            if (u != v) full.push_back({u, v});
    auto k4 = DirectedGraph::from_edges(full, 4);
    Rng r2(1);
    CHECK_THROWS_AS(make_link_split(k4, 0.8, 0.1, 0.1, false, r2), MalformedInputError);
}

TEST_CASE("dropout keeps the expected value of its input") {
    Rng rng(888);
    const double p = 0.3;
    Tensor x = Tensor::full(1, 1, 2.0);
    double sum = 0.0;
    const int trials = 200000;
    for (int i = 0; i < trials; ++i) sum += dropout(nullptr, x, p, true, rng).at(0, 0);
    CHECK(std::abs(sum / trials - 2.0) < 0.02);  // within 1%
}

TEST_CASE("a tiny planted dataset is overfit to full training accuracy") {
    Rng gen(7);
    auto ds = synth_directed_homophily(50, 3, 0.9, 0.1, 4, 0.2, gen);
    TrainConfig cfg;
    cfg.lr = 0.05;
    cfg.weight_decay = 0.0;
    cfg.epochs = 150;
    cfg.patience = 150;
    cfg.hidden = 16;
    cfg.chunks = 4;
    cfg.layers = 2;
    cfg.imp_coef = 0.5;
    cfg.branch_coef = 0.9;
    cfg.noise_enabled = false;
    cfg.input_fc_dropout = 0.0;
    cfg.dropout = 0.0;
    SplitMasks split;
    for (int i = 0; i < 50; ++i) split.train.push_back(i);
    split.val = split.train;
    split.test = split.train;
    auto res = train_node_split(ds, split, cfg, Ablation{}, 1, 0);
    bool reached = false;
    for (const auto& em : res.history)
        if (em.train_acc == 1.0) reached = true;
    CHECK(reached);
}

TEST_CASE("training is insensitive to the number of worker threads") {
    Rng gen(12);
    auto ds = synth_directed_homophily(60, 3, 0.85, 0.2, 4, 0.4, gen);
    Rng srng(3);
    auto splits = make_node_splits(ds.labels, 2, 0.48, 0.32, srng);
    TrainConfig cfg;
    cfg.lr = 0.03;
    cfg.epochs = 15;
    cfg.patience = 15;
    cfg.hidden = 8;
    cfg.chunks = 4;
    cfg.imp_coef = 0.3;
    cfg.seed = 99;
    cfg.threads = 1;
    auto one = train_all_splits(ds, splits, cfg, Ablation{});
    cfg.threads = 2;
    auto two = train_all_splits(ds, splits, cfg, Ablation{});
    REQUIRE(one.splits.size() == two.splits.size());
    CHECK(one.mean_test_acc == two.mean_test_acc);
    for (std::size_t k = 0; k < one.splits.size(); ++k) {
        CHECK(one.splits[k].test_acc == two.splits[k].test_acc);
        CHECK(one.splits[k].best_epoch == two.splits[k].best_epoch);
        for (std::size_t i = 0; i < one.splits[k].best_params.values.size(); ++i)
            CHECK(one.splits[k].best_params.values[i].second ==
                  two.splits[k].best_params.values[i].second);
    }
}

TEST_CASE("a pure branch objective trains identically for any importance weight") {
    // at lambda2 = 1 the (1 - lambda2) factor zeroes the classification
    // composite, so lambda1 must not influence a single update
    Rng gen(21);
    auto ds = synth_directed_homophily(40, 3, 0.85, 0.2, 4, 0.4, gen);
    Rng srng(4);
    auto splits = make_node_splits(ds.labels, 1, 0.48, 0.32, srng);
    TrainConfig cfg;
    cfg.lr = 0.03;
    cfg.epochs = 10;
    cfg.patience = 10;
    cfg.hidden = 8;
    cfg.chunks = 4;
    cfg.branch_coef = 1.0;
    cfg.noise_enabled = false;
    cfg.imp_coef = 0.7;
    auto a = train_node_split(ds, splits[0], cfg, Ablation{}, 5, 0);
    cfg.imp_coef = 0.0;
    auto b = train_node_split(ds, splits[0], cfg, Ablation{}, 5, 0);
    REQUIRE(a.best_params.values.size() == b.best_params.values.size());
    for (std::size_t i = 0; i < a.best_params.values.size(); ++i)
        CHECK(a.best_params.values[i].second == b.best_params.values[i].second);
}

TEST_CASE("prediction takes the first maximal logit") {
    Tensor z = Tensor::from(2, 3, {0.2, 0.9, 0.9, -1.0, -1.0, -2.0});
    auto p = predict(z);
    CHECK(p[0] == 1);
    CHECK(p[1] == 0);
    CHECK(accuracy(z, {1, 0}, {0, 1}) == 1.0);
    CHECK(accuracy(z, {2, 0}, {0, 1}) == 0.5);
}

TEST_CASE("non-finite losses abort with a numerical error") {
    Rng gen(33);
    auto ds = synth_directed_homophily(30, 3, 0.8, 0.2, 3, 0.3, gen);
    Rng srng(1);
    auto splits = make_node_splits(ds.labels, 1, 0.48, 0.32, srng);
    TrainConfig cfg;
    cfg.lr = 1e200;  // guaranteed blow-up
    cfg.epochs = 30;
    cfg.patience = 30;
    cfg.hidden = 8;
    cfg.chunks = 4;
    CHECK_THROWS_AS(train_node_split(ds, splits[0], cfg, Ablation{}, 1, 0), NumericalError);
}

}  // TEST_SUITE
