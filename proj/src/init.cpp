#include <cctype>
#include <cmath>

#include "dhgnn/errors.hpp"
#include "dhgnn/train.hpp"

namespace dhgnn {

namespace {

bool is_bias_name(const std::string& name) {
    auto pos = name.rfind('.');
    std::string last = pos == std::string::npos ? name : name.substr(pos + 1);
    if (last.empty() || last[0] != 'b') return false;
    for (std::size_t i = 1; i < last.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(last[i]))) return false;
    return true;
}

}  // namespace

void init_params(ModelParams& mp, Rng& rng) {
    for (auto& [name, p] : mp.named()) {
        if (is_bias_name(name)) continue;  // biases stay zero
        double limit = std::sqrt(6.0 / (p->rows + p->cols));
        for (auto& v : *p->data) v = rng.uniform(-limit, limit);
    }
}

ParamSnapshot snapshot_params(ModelParams& mp) {
    ParamSnapshot snap;
    for (auto& [name, p] : mp.named()) snap.values.emplace_back(name, *p->data);
    return snap;
}

void restore_params(ModelParams& mp, const ParamSnapshot& snap) {
    auto named = mp.named();
    if (named.size() != snap.values.size()) throw ContractError("restore_params: parameter count mismatch");
    for (std::size_t i = 0; i < named.size(); ++i) {
        if (named[i].first != snap.values[i].first || named[i].second->size() != snap.values[i].second.size())
            throw ContractError("restore_params: parameter layout mismatch");
        *named[i].second->data = snap.values[i].second;
    }
}

}  // namespace dhgnn
