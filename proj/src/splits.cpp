#include <algorithm>
#include <cmath>

#include "dhgnn/errors.hpp"
#include "dhgnn/train.hpp"

namespace dhgnn {

namespace {

void shuffle_in_place(std::vector<int>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.uniform_int(static_cast<int>(i))]);
}

// Cut a shuffled index list at rounded ratio points and append the pieces.
void cut_and_append(const std::vector<int>& pool, double train_ratio, double val_ratio, SplitMasks& out) {
    auto k = static_cast<long>(pool.size());
    long c1 = std::lround(train_ratio * k);
    long c2 = std::lround((train_ratio + val_ratio) * k);
    c1 = std::clamp(c1, 0L, k);
    c2 = std::clamp(c2, c1, k);
    out.train.insert(out.train.end(), pool.begin(), pool.begin() + c1);
    out.val.insert(out.val.end(), pool.begin() + c1, pool.begin() + c2);
    out.test.insert(out.test.end(), pool.begin() + c2, pool.end());
}

}  // namespace

std::vector<SplitMasks> make_node_splits(const std::vector<int>& labels, int num_splits,
                                         double train_ratio, double val_ratio, Rng& rng,
                                         std::string* warning) {
    if (num_splits < 1) throw ConfigError("split count must be >= 1");
    if (train_ratio <= 0.0 || val_ratio < 0.0 || train_ratio + val_ratio >= 1.0)
        throw ConfigError("split ratios must be positive and sum below 1");
    int num_classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::vector<int>> by_class(num_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(static_cast<int>(i));

    bool stratified = true;
    for (const auto& members : by_class) {
        if (members.size() < 3) {
            stratified = false;
            if (warning) *warning = "a class has fewer than 3 nodes; falling back to unstratified splits";
            break;
        }
    }

    std::vector<SplitMasks> splits;
    splits.reserve(num_splits);
    for (int s = 0; s < num_splits; ++s) {
        SplitMasks m;
        if (stratified) {
            for (const auto& members : by_class) {
                std::vector<int> pool = members;
                shuffle_in_place(pool, rng);
                cut_and_append(pool, train_ratio, val_ratio, m);
            }
        } else {
            std::vector<int> pool(labels.size());
            for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = static_cast<int>(i);
            shuffle_in_place(pool, rng);
            cut_and_append(pool, train_ratio, val_ratio, m);
        }
        std::sort(m.train.begin(), m.train.end());
        std::sort(m.val.begin(), m.val.end());
        std::sort(m.test.begin(), m.test.end());
        splits.push_back(std::move(m));
    }
    return splits;
}

}  // namespace dhgnn
