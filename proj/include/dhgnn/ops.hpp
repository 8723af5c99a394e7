#pragma once

#include <vector>

#include "dhgnn/graph.hpp"
#include "dhgnn/rng.hpp"
#include "dhgnn/tensor.hpp"

// Differentiable operations. Every op takes the recording tape as its first
// argument; pass nullptr to run forward-only (inference). Inputs are never
// mutated. Gradients accumulate into parents, so diamond-shaped graphs and
// reused inputs are handled exactly.

namespace dhgnn {

// a (r x k) times b (k x c). Backed by the active kernel backend.
Tensor matmul(Tape* t, const Tensor& a, const Tensor& b);

// Elementwise a + b; b may also be a 1 x a.cols row vector (broadcast over rows).
Tensor add(Tape* t, const Tensor& a, const Tensor& b);
Tensor sub(Tape* t, const Tensor& a, const Tensor& b);
// Elementwise (Hadamard) product; same shape required.
Tensor mul(Tape* t, const Tensor& a, const Tensor& b);
Tensor scale(Tape* t, const Tensor& a, double s);

Tensor sigmoid(Tape* t, const Tensor& x);
Tensor relu(Tape* t, const Tensor& x);
Tensor softplus(Tape* t, const Tensor& x);
Tensor exp_elem(Tape* t, const Tensor& x);
// Elementwise x^e. When the upstream gradient of an entry is exactly zero the
// contribution is zero even if the local derivative is not finite there.
Tensor pow_const(Tape* t, const Tensor& x, double e);

// Row-wise softmax / log-softmax with max subtraction.
Tensor softmax_row(Tape* t, const Tensor& x);
Tensor log_softmax_row(Tape* t, const Tensor& x);

// out[i][j] = sum_{j' >= j} x[i][j']   (suffix sums along each row).
Tensor reverse_cumsum_row(Tape* t, const Tensor& x);

// [a | b] along columns; rows must match.
Tensor concat_cols(Tape* t, const Tensor& a, const Tensor& b);
// Column j as an n x 1 tensor.
Tensor slice_col(Tape* t, const Tensor& x, int j);

// out has g.num_nodes() rows; row v is the mean of x's rows over v's
// neighbors in direction dir, or zeros when v has none.
Tensor neighbor_mean(Tape* t, const Tensor& x, const DirectedGraph& g, Direction dir);

// Rows of w indexed by adjacency: out[v] = sum of w[u] over u in
// neighbors(v, dir). Equals A_dir * w without materializing A.
Tensor adj_linear(Tape* t, const DirectedGraph& g, Direction dir, const Tensor& w);

// Repeat each entry of each row `factor` times: n x q -> n x (q*factor),
// out[i][j] = x[i][j / factor].
Tensor expand_chunks(Tape* t, const Tensor& x, int factor);

// out[i] = s[i][0] * x[i]; s is n x 1.
Tensor scale_rows(Tape* t, const Tensor& x, const Tensor& s);

// Selected rows, in index order. Duplicate indices are allowed.
Tensor gather_rows(Tape* t, const Tensor& x, const std::vector<int>& idx);

// out[i][0] = x[i][cols[i]]; one column index per row (class selection).
Tensor pick_per_row(Tape* t, const Tensor& x, const std::vector<int>& cols);

// Mean of x[i][0] over i in idx; x is n x 1, result 1 x 1.
Tensor masked_mean(Tape* t, const Tensor& x, const std::vector<int>& idx);

// 1 x cols tensor of column sums.
Tensor col_sum(Tape* t, const Tensor& x);
Tensor sum_all(Tape* t, const Tensor& x);

// Squared coefficient of variation of a 1 x 2 tensor (a, b) with population
// std: ((a - b) / (a + b))^2. Requires a + b != 0.
Tensor cv2_pair(Tape* t, const Tensor& s);

// Inverted dropout: keep with probability 1-p and scale kept entries by
// 1/(1-p). Identity when training is false or p == 0.
Tensor dropout(Tape* t, const Tensor& x, double p, bool training, Rng& rng);

// Mean binary cross-entropy over logits z (k x 1) against targets in {0,1},
// computed in the numerically stable log1p form.
Tensor bce_with_logits(Tape* t, const Tensor& z, const std::vector<double>& y);

}  // namespace dhgnn
