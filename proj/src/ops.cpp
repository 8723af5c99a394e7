#include "dhgnn/ops.hpp"

#include <cmath>
#include <cstring>
#include <utility>

#include "dhgnn/errors.hpp"
#include "dhgnn/kernels.hpp"

namespace dhgnn {

namespace {

// Wires `out` to a new tape node whose backfn receives the node's own
// upstream gradient.
void attach(Tape* t, Tensor& out, std::function<void(Tape&, const double*)> back) {
    int id = t->add_node(out.rows, out.cols, nullptr);
    t->set_backfn(id, [id, back = std::move(back)](Tape& tp) {
        back(tp, tp.grad_of(id).data());
    });
    out.tape = t;
    out.node = id;
}

std::vector<double> transposed(const double* x, int r, int c) {
    std::vector<double> y(static_cast<std::size_t>(r) * c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) y[static_cast<std::size_t>(j) * r + i] = x[static_cast<std::size_t>(i) * c + j];
    return y;
}

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (a.rows != b.rows || a.cols != b.cols) throw ContractError(std::string(what) + ": shape mismatch");
}

}  // namespace

Tensor matmul(Tape* t, const Tensor& a, const Tensor& b) {
    if (a.cols != b.rows) throw ContractError("matmul: inner dimensions disagree");
    const auto& k = kernels::active();
    Tensor out = Tensor::zeros(a.rows, b.cols);
    k.matmul(a.ptr(), b.ptr(), out.ptr(), a.rows, a.cols, b.cols, false);
    int na = input_node(t, a), nb = input_node(t, b);
    if (t && (na >= 0 || nb >= 0)) {
        auto ad = a.data;
        auto bd = b.data;
        int r = a.rows, kk = a.cols, c = b.cols;
        attach(t, out, [=](Tape& tp, const double* g) {
            const auto& ker = kernels::active();
            if (na >= 0) {  // dA += G * B^T
                auto bt = transposed(bd->data(), kk, c);
                ker.matmul(g, bt.data(), tp.grad_of(na).data(), r, c, kk, true);
            }
            if (nb >= 0) {  // dB += A^T * G
                auto at = transposed(ad->data(), r, kk);
                ker.matmul(at.data(), g, tp.grad_of(nb).data(), kk, r, c, true);
            }
        });
    }
    return out;
}

Tensor add(Tape* t, const Tensor& a, const Tensor& b) {
    bool broadcast = (b.rows == 1 && a.rows != 1 && b.cols == a.cols);
    if (!broadcast) require_same_shape(a, b, "add");
    Tensor out = Tensor::zeros(a.rows, a.cols);
    const auto& k = kernels::active();
    if (broadcast) {
        for (int i = 0; i < a.rows; ++i)
            k.add(a.ptr() + static_cast<std::size_t>(i) * a.cols, b.ptr(), out.ptr() + static_cast<std::size_t>(i) * a.cols, a.cols);
    } else {
        k.add(a.ptr(), b.ptr(), out.ptr(), a.size());
    }
    int na = input_node(t, a), nb = input_node(t, b);
    if (t && (na >= 0 || nb >= 0)) {
        int r = a.rows, c = a.cols;
        attach(t, out, [=](Tape& tp, const double* g) {
            const auto& ker = kernels::active();
            if (na >= 0) ker.axpy(1.0, g, tp.grad_of(na).data(), static_cast<std::size_t>(r) * c);
            if (nb >= 0) {
                auto& gb = tp.grad_of(nb);
                if (broadcast) {
                    for (int i = 0; i < r; ++i)
                        for (int j = 0; j < c; ++j) gb[j] += g[static_cast<std::size_t>(i) * c + j];
                } else {
                    ker.axpy(1.0, g, gb.data(), static_cast<std::size_t>(r) * c);
                }
            }
        });
    }
    return out;
}

Tensor sub(Tape* t, const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    Tensor out = Tensor::zeros(a.rows, a.cols);
    kernels::active().sub(a.ptr(), b.ptr(), out.ptr(), a.size());
    int na = input_node(t, a), nb = input_node(t, b);
    if (t && (na >= 0 || nb >= 0)) {
        std::size_t n = a.size();
        attach(t, out, [=](Tape& tp, const double* g) {
            const auto& ker = kernels::active();
            if (na >= 0) ker.axpy(1.0, g, tp.grad_of(na).data(), n);
            if (nb >= 0) ker.axpy(-1.0, g, tp.grad_of(nb).data(), n);
        });
    }
    return out;
}

Tensor mul(Tape* t, const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    Tensor out = Tensor::zeros(a.rows, a.cols);
    kernels::active().mul(a.ptr(), b.ptr(), out.ptr(), a.size());
    int na = input_node(t, a), nb = input_node(t, b);
    if (t && (na >= 0 || nb >= 0)) {
        auto ad = a.data;
        auto bd = b.data;
        std::size_t n = a.size();
        attach(t, out, [=](Tape& tp, const double* g) {
            if (na >= 0) {
                auto& ga = tp.grad_of(na);
                const double* bv = bd->data();
                for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * bv[i];
            }
            if (nb >= 0) {
                auto& gb = tp.grad_of(nb);
                const double* av = ad->data();
                for (std::size_t i = 0; i < n; ++i) gb[i] += g[i] * av[i];
            }
        });
    }
    return out;
}

Tensor scale(Tape* t, const Tensor& a, double s) {
    Tensor out = Tensor::zeros(a.rows, a.cols);
    kernels::active().scale(s, a.ptr(), out.ptr(), a.size());
    int na = input_node(t, a);
    if (t && na >= 0) {
        std::size_t n = a.size();
        attach(t, out, [=](Tape& tp, const double* g) {
            kernels::active().axpy(s, g, tp.grad_of(na).data(), n);
        });
    }
    return out;
}

Tensor sigmoid(Tape* t, const Tensor& x) {
    Tensor out = Tensor::zeros(x.rows, x.cols);
    for (std::size_t i = 0; i < x.size(); ++i) (*out.data)[i] = stable_sigmoid((*x.data)[i]);
    int nx = input_node(t, x);
    if (t && nx >= 0) {
        auto od = out.data;
        std::size_t n = x.size();
        attach(t, out, [=](Tape& tp, const double* g) {
            auto& gx = tp.grad_of(nx);
            const double* s = od->data();
            for (std::size_t i = 0; i < n; ++i) gx[i] += g[i] * s[i] * (1.0 - s[i]);
        });
    }
    return out;
}

Tensor relu(Tape* t, const Tensor& x) {
    Tensor out = Tensor::zeros(x.rows, x.cols);
    for (std::size_t i = 0; i < x.size(); ++i) {
        double v = (*x.data)[i];
        (*out.data)[i] = v > 0.0 ? v : 0.0;
    }
    int nx = input_node(t, x);
    if (t && nx >= 0) {
        auto xd = x.data;
        std::size_t n = x.size();
        attach(t, out, [=](Tape& tp, const double* g) {
            auto& gx = tp.grad_of(nx);
            const double* xv = xd->data();
            for (std::size_t i = 0; i < n; ++i)
                if (xv[i] > 0.0) gx[i] += g[i];
        });
    }
    return out;
}

Tensor softplus(Tape* t, const Tensor& x) {
    Tensor out = Tensor::zeros(x.rows, x.cols);
    for (std::size_t i = 0; i < x.size(); ++i) {
        double v = (*x.data)[i];
        (*out.data)[i] = v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
    }
    int nx = input_node(t, x);
    if (t && nx >= 0) {
        auto xd = x.data;
        std::size_t n = x.size();
        attach(t, out, [=](Tape& tp, const double* g) {
            auto& gx = tp.grad_of(nx);
            const double* xv = xd->data();
            for (std::size_t i = 0; i < n; ++i) gx[i] += g[i] * stable_sigmoid(xv[i]);
        });
    }
    return out;
}

Tensor exp_elem(Tape* t, const Tensor& x) {
    Tensor out = Tensor::zeros(x.rows, x.cols);
    for (std::size_t i = 0; i < x.size(); ++i) (*out.data)[i] = std::exp((*x.data)[i]);
    int nx = input_node(t, x);
    if (t && nx >= 0) {
        auto od = out.data;
        std::size_t n = x.size();
        attach(t, out, [=](Tape& tp, const double* g) {
            auto& gx = tp.grad_of(nx);
            const double* e = od->data();
            for (std::size_t i = 0; i < n; ++i) gx[i] += g[i] * e[i];
        });
    }
    return out;
}

Tensor pow_const(Tape* t, const Tensor& x, double e) {
    Tensor out = Tensor::zeros(x.rows, x.cols);
    for (std::size_t i = 0; i < x.size(); ++i) (*out.data)[i] = std::pow((*x.data)[i], e);
    int nx = input_node(t, x);
    if (t && nx >= 0) {
        auto xd = x.data;
        std::size_t n = x.size();
        attach(t, out, [=](Tape& tp, const double* g) {
            auto& gx = tp.grad_of(nx);
            const double* xv = xd->data();
            for (std::size_t i = 0; i < n; ++i) {
                if (g[i] == 0.0) continue;  // avoid 0 * inf at the domain edge
                gx[i] += g[i] * e * std::pow(xv[i], e - 1.0);
            }
        });
    }
    return out;
}

Tensor softmax_row(Tape* t, const Tensor& x) {
    Tensor out = Tensor::zeros(x.rows, x.cols);
    int r = x.rows, c = x.cols;
    for (int i = 0; i < r; ++i) {
        const double* xi = x.ptr() + static_cast<std::size_t>(i) * c;
        double* oi = out.ptr() + static_cast<std::size_t>(i) * c;
        double m = xi[0];
        for (int j = 1; j < c; ++j) m = std::max(m, xi[j]);
        double s = 0.0;
        for (int j = 0; j < c; ++j) {
            oi[j] = std::exp(xi[j] - m);
            s += oi[j];
        }
        for (int j = 0; j < c; ++j) oi[j] /= s;
    }
    int nx = input_node(t, x);
    if (t && nx >= 0) {
        auto od = out.data;
        attach(t, out, [=](Tape& tp, const double* g) {
            auto& gx = tp.grad_of(nx);
            const double* p = od->data();
            for (int i = 0; i < r; ++i) {
                const double* gi = g + static_cast<std::size_t>(i) * c;
                const double* pi = p + static_cast<std::size_t>(i) * c;
                double dot = 0.0;
                for (int j = 0; j < c; ++j) dot += gi[j] * pi[j];
                double* gxi = gx.data() + static_cast<std::size_t>(i) * c;
                for (int j = 0; j < c; ++j) gxi[j] += pi[j] * (gi[j] - dot);
            }
        });
    }
    return out;
}

Tensor log_softmax_row(Tape* t, const Tensor& x) {
    Tensor out = Tensor::zeros(x.rows, x.cols);
    int r = x.rows, c = x.cols;
    for (int i = 0; i < r; ++i) {
        const double* xi = x.ptr() + static_cast<std::size_t>(i) * c;
        double* oi = out.ptr() + static_cast<std::size_t>(i) * c;
        double m = xi[0];
        for (int j = 1; j < c; ++j) m = std::max(m, xi[j]);
        double s = 0.0;
        for (int j = 0; j < c; ++j) s += std::exp(xi[j] - m);
        double lse = m + std::log(s);
        for (int j = 0; j < c; ++j) oi[j] = xi[j] - lse;
    }
    int nx = input_node(t, x);
    if (t && nx >= 0) {
        auto od = out.data;
        attach(t, out, [=](Tape& tp, const double* g) {
            auto& gx = tp.grad_of(nx);
            const double* lo = od->data();
            for (int i = 0; i < r; ++i) {
                const double* gi = g + static_cast<std::size_t>(i) * c;
                const double* li = lo + static_cast<std::size_t>(i) * c;
                double rs = 0.0;
                for (int j = 0; j < c; ++j) rs += gi[j];
                double* gxi = gx.data() + static_cast<std::size_t>(i) * c;
                for (int j = 0; j < c; ++j) gxi[j] += gi[j] - std::exp(li[j]) * rs;
            }
        });
    }
    return out;
}

Tensor reverse_cumsum_row(Tape* t, const Tensor& x) {
    Tensor out = Tensor::zeros(x.rows, x.cols);
    int r = x.rows, c = x.cols;
    for (int i = 0; i < r; ++i) {
        const double* xi = x.ptr() + static_cast<std::size_t>(i) * c;
        double* oi = out.ptr() + static_cast<std::size_t>(i) * c;
        double acc = 0.0;
        for (int j = c - 1; j >= 0; --j) {
            acc += xi[j];
            oi[j] = acc;
        }
    }
    int nx = input_node(t, x);
    if (t && nx >= 0) {
        attach(t, out, [=](Tape& tp, const double* g) {
            auto& gx = tp.grad_of(nx);
            for (int i = 0; i < r; ++i) {
                const double* gi = g + static_cast<std::size_t>(i) * c;
                double* gxi = gx.data() + static_cast<std::size_t>(i) * c;
                double acc = 0.0;
                for (int j = 0; j < c; ++j) {
                    acc += gi[j];
                    gxi[j] += acc;
                }
            }
        });
    }
    return out;
}

Tensor concat_cols(Tape* t, const Tensor& a, const Tensor& b) {
    if (a.rows != b.rows) throw ContractError("concat_cols: row counts differ");
    int r = a.rows, ca = a.cols, cb = b.cols;
    Tensor out = Tensor::zeros(r, ca + cb);
    for (int i = 0; i < r; ++i) {
        std::memcpy(out.ptr() + static_cast<std::size_t>(i) * (ca + cb), a.ptr() + static_cast<std::size_t>(i) * ca,
                    sizeof(double) * ca);
        std::memcpy(out.ptr() + static_cast<std::size_t>(i) * (ca + cb) + ca, b.ptr() + static_cast<std::size_t>(i) * cb,
                    sizeof(double) * cb);
    }
    int na = input_node(t, a), nb = input_node(t, b);
    if (t && (na >= 0 || nb >= 0)) {
        attach(t, out, [=](Tape& tp, const double* g) {
            for (int i = 0; i < r; ++i) {
                const double* gi = g + static_cast<std::size_t>(i) * (ca + cb);
                if (na >= 0) {
                    double* ga = tp.grad_of(na).data() + static_cast<std::size_t>(i) * ca;
                    for (int j = 0; j < ca; ++j) ga[j] += gi[j];
                }
                if (nb >= 0) {
                    double* gb = tp.grad_of(nb).data() + static_cast<std::size_t>(i) * cb;
                    for (int j = 0; j < cb; ++j) gb[j] += gi[ca + j];
                }
            }
        });
    }
    return out;
}

Tensor slice_col(Tape* t, const Tensor& x, int j) {
    if (j < 0 || j >= x.cols) throw ContractError("slice_col: column out of range");
    int r = x.rows, c = x.cols;
    Tensor out = Tensor::zeros(r, 1);
    for (int i = 0; i < r; ++i) (*out.data)[i] = x.at(i, j);
    int nx = input_node(t, x);
    if (t && nx >= 0) {
        attach(t, out, [=](Tape& tp, const double* g) {
            auto& gx = tp.grad_of(nx);
            for (int i = 0; i < r; ++i) gx[static_cast<std::size_t>(i) * c + j] += g[i];
        });
    }
    return out;
}

Tensor neighbor_mean(Tape* t, const Tensor& x, const DirectedGraph& g, Direction dir) {
    if (x.rows != g.num_nodes()) throw ContractError("neighbor_mean: row count must equal node count");
    int n = g.num_nodes(), p = x.cols;
    Tensor out = Tensor::zeros(n, p);
    for (int v = 0; v < n; ++v) {
        auto nb = g.neighbors(v, dir);
        if (nb.empty()) continue;
        double* ov = out.ptr() + static_cast<std::size_t>(v) * p;
        for (int u : nb) {
            const double* xu = x.ptr() + static_cast<std::size_t>(u) * p;
            for (int j = 0; j < p; ++j) ov[j] += xu[j];
        }
        double inv = 1.0 / static_cast<double>(nb.size());
        for (int j = 0; j < p; ++j) ov[j] *= inv;
    }
    int nx = input_node(t, x);
    if (t && nx >= 0) {
        const DirectedGraph* gp = &g;
        attach(t, out, [=](Tape& tp, const double* gr) {
            auto& gx = tp.grad_of(nx);
            for (int v = 0; v < n; ++v) {
                auto nb = gp->neighbors(v, dir);
                if (nb.empty()) continue;
                double inv = 1.0 / static_cast<double>(nb.size());
                const double* gv = gr + static_cast<std::size_t>(v) * p;
                for (int u : nb) {
                    double* gu = gx.data() + static_cast<std::size_t>(u) * p;
                    for (int j = 0; j < p; ++j) gu[j] += inv * gv[j];
                }
            }
        });
    }
    return out;
}

Tensor adj_linear(Tape* t, const DirectedGraph& g, Direction dir, const Tensor& w) {
    if (w.rows != g.num_nodes()) throw ContractError("adj_linear: weight row count must equal node count");
    int n = g.num_nodes(), p = w.cols;
    Tensor out = Tensor::zeros(n, p);
    for (int v = 0; v < n; ++v) {
        double* ov = out.ptr() + static_cast<std::size_t>(v) * p;
        for (int u : g.neighbors(v, dir)) {
            const double* wu = w.ptr() + static_cast<std::size_t>(u) * p;
            for (int j = 0; j < p; ++j) ov[j] += wu[j];
        }
    }
    int nw = input_node(t, w);
    if (t && nw >= 0) {
        const DirectedGraph* gp = &g;
        attach(t, out, [=](Tape& tp, const double* gr) {
            auto& gw = tp.grad_of(nw);
            for (int v = 0; v < n; ++v) {
                const double* gv = gr + static_cast<std::size_t>(v) * p;
                for (int u : gp->neighbors(v, dir)) {
                    double* gu = gw.data() + static_cast<std::size_t>(u) * p;
                    for (int j = 0; j < p; ++j) gu[j] += gv[j];
                }
            }
        });
    }
    return out;
}

Tensor expand_chunks(Tape* t, const Tensor& x, int factor) {
    if (factor < 1) throw ContractError("expand_chunks: factor must be positive");
    int r = x.rows, q = x.cols, c = q * factor;
    Tensor out = Tensor::zeros(r, c);
    for (int i = 0; i < r; ++i) {
        const double* xi = x.ptr() + static_cast<std::size_t>(i) * q;
        double* oi = out.ptr() + static_cast<std::size_t>(i) * c;
        for (int j = 0; j < c; ++j) oi[j] = xi[j / factor];
    }
    int nx = input_node(t, x);
    if (t && nx >= 0) {
        attach(t, out, [=](Tape& tp, const double* g) {
            auto& gx = tp.grad_of(nx);
            for (int i = 0; i < r; ++i) {
                const double* gi = g + static_cast<std::size_t>(i) * c;
                double* gxi = gx.data() + static_cast<std::size_t>(i) * q;
                for (int j = 0; j < c; ++j) gxi[j / factor] += gi[j];
            }
        });
    }
    return out;
}

Tensor scale_rows(Tape* t, const Tensor& x, const Tensor& s) {
    if (s.rows != x.rows || s.cols != 1) throw ContractError("scale_rows: scale must be n x 1");
    int r = x.rows, c = x.cols;
    Tensor out = Tensor::zeros(r, c);
    for (int i = 0; i < r; ++i) {
        double sv = (*s.data)[i];
        const double* xi = x.ptr() + static_cast<std::size_t>(i) * c;
        double* oi = out.ptr() + static_cast<std::size_t>(i) * c;
        for (int j = 0; j < c; ++j) oi[j] = sv * xi[j];
    }
    int nx = input_node(t, x), ns = input_node(t, s);
    if (t && (nx >= 0 || ns >= 0)) {
        auto xd = x.data;
        auto sd = s.data;
        attach(t, out, [=](Tape& tp, const double* g) {
            for (int i = 0; i < r; ++i) {
                const double* gi = g + static_cast<std::size_t>(i) * c;
                if (nx >= 0) {
                    double sv = (*sd)[i];
                    double* gxi = tp.grad_of(nx).data() + static_cast<std::size_t>(i) * c;
                    for (int j = 0; j < c; ++j) gxi[j] += sv * gi[j];
                }
                if (ns >= 0) {
                    const double* xi = xd->data() + static_cast<std::size_t>(i) * c;
                    double dot = 0.0;
                    for (int j = 0; j < c; ++j) dot += gi[j] * xi[j];
                    tp.grad_of(ns)[i] += dot;
                }
            }
        });
    }
    return out;
}

Tensor gather_rows(Tape* t, const Tensor& x, const std::vector<int>& idx) {
    int c = x.cols;
    Tensor out = Tensor::zeros(static_cast<int>(idx.size()), c);
    for (std::size_t r = 0; r < idx.size(); ++r) {
        int i = idx[r];
        if (i < 0 || i >= x.rows) throw ContractError("gather_rows: index out of range");
        std::memcpy(out.ptr() + r * c, x.ptr() + static_cast<std::size_t>(i) * c, sizeof(double) * c);
    }
    int nx = input_node(t, x);
    if (t && nx >= 0) {
        attach(t, out, [=, indices = idx](Tape& tp, const double* g) {
            auto& gx = tp.grad_of(nx);
            for (std::size_t r = 0; r < indices.size(); ++r) {
                double* gi = gx.data() + static_cast<std::size_t>(indices[r]) * c;
                const double* gr = g + r * c;
                for (int j = 0; j < c; ++j) gi[j] += gr[j];
            }
        });
    }
    return out;
}

Tensor pick_per_row(Tape* t, const Tensor& x, const std::vector<int>& cols) {
    if (cols.size() != static_cast<std::size_t>(x.rows)) throw ContractError("pick_per_row: one index per row required");
    int r = x.rows, c = x.cols;
    Tensor out = Tensor::zeros(r, 1);
    for (int i = 0; i < r; ++i) {
        if (cols[i] < 0 || cols[i] >= c) throw ContractError("pick_per_row: column index out of range");
        (*out.data)[i] = x.at(i, cols[i]);
    }
    int nx = input_node(t, x);
    if (t && nx >= 0) {
        attach(t, out, [=, indices = cols](Tape& tp, const double* g) {
            auto& gx = tp.grad_of(nx);
            for (int i = 0; i < r; ++i) gx[static_cast<std::size_t>(i) * c + indices[i]] += g[i];
        });
    }
    return out;
}

Tensor masked_mean(Tape* t, const Tensor& x, const std::vector<int>& idx) {
    if (x.cols != 1) throw ContractError("masked_mean: input must be n x 1");
    if (idx.empty()) throw ContractError("masked_mean: empty index set");
    Tensor out = Tensor::zeros(1, 1);
    double s = 0.0;
    for (int i : idx) {
        if (i < 0 || i >= x.rows) throw ContractError("masked_mean: index out of range");
        s += (*x.data)[i];
    }
    (*out.data)[0] = s / static_cast<double>(idx.size());
    int nx = input_node(t, x);
    if (t && nx >= 0) {
        attach(t, out, [=, indices = idx](Tape& tp, const double* g) {
            auto& gx = tp.grad_of(nx);
            double w = g[0] / static_cast<double>(indices.size());
            for (int i : indices) gx[i] += w;
        });
    }
    return out;
}

Tensor col_sum(Tape* t, const Tensor& x) {
    int r = x.rows, c = x.cols;
    Tensor out = Tensor::zeros(1, c);
    for (int i = 0; i < r; ++i) {
        const double* xi = x.ptr() + static_cast<std::size_t>(i) * c;
        for (int j = 0; j < c; ++j) (*out.data)[j] += xi[j];
    }
    int nx = input_node(t, x);
    if (t && nx >= 0) {
        attach(t, out, [=](Tape& tp, const double* g) {
            auto& gx = tp.grad_of(nx);
            for (int i = 0; i < r; ++i) {
                double* gxi = gx.data() + static_cast<std::size_t>(i) * c;
                for (int j = 0; j < c; ++j) gxi[j] += g[j];
            }
        });
    }
    return out;
}

Tensor sum_all(Tape* t, const Tensor& x) {
    Tensor out = Tensor::zeros(1, 1);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (*x.data)[i];
    (*out.data)[0] = s;
    int nx = input_node(t, x);
    if (t && nx >= 0) {
        std::size_t n = x.size();
        attach(t, out, [=](Tape& tp, const double* g) {
            auto& gx = tp.grad_of(nx);
            for (std::size_t i = 0; i < n; ++i) gx[i] += g[0];
        });
    }
    return out;
}

Tensor cv2_pair(Tape* t, const Tensor& s) {
    if (s.rows != 1 || s.cols != 2) throw ContractError("cv2_pair: input must be 1 x 2");
    double a = (*s.data)[0], b = (*s.data)[1];
    double tot = a + b;
    if (tot == 0.0) throw ContractError("cv2_pair: entries sum to zero");
    double d = (a - b) / tot;
    Tensor out = Tensor::zeros(1, 1);
    (*out.data)[0] = d * d;
    int ns = input_node(t, s);
    if (t && ns >= 0) {
        attach(t, out, [=](Tape& tp, const double* g) {
            auto& gs = tp.grad_of(ns);
            double inv2 = 1.0 / (tot * tot);
            gs[0] += g[0] * 2.0 * d * 2.0 * b * inv2;
            gs[1] -= g[0] * 2.0 * d * 2.0 * a * inv2;
        });
    }
    return out;
}

Tensor dropout(Tape* t, const Tensor& x, double p, bool training, Rng& rng) {
    if (p < 0.0 || p >= 1.0) throw ContractError("dropout: rate must be in [0, 1)");
    if (!training || p == 0.0) return x;
    std::size_t n = x.size();
    auto mask = std::make_shared<std::vector<double>>(n);
    double keep_scale = 1.0 / (1.0 - p);
    for (std::size_t i = 0; i < n; ++i) (*mask)[i] = rng.uniform() < p ? 0.0 : keep_scale;
    Tensor out = Tensor::zeros(x.rows, x.cols);
    kernels::active().mul(x.ptr(), mask->data(), out.ptr(), n);
    int nx = input_node(t, x);
    if (t && nx >= 0) {
        attach(t, out, [=](Tape& tp, const double* g) {
            auto& gx = tp.grad_of(nx);
            const double* m = mask->data();
            for (std::size_t i = 0; i < n; ++i) gx[i] += g[i] * m[i];
        });
    }
    return out;
}

Tensor bce_with_logits(Tape* t, const Tensor& z, const std::vector<double>& y) {
    if (z.cols != 1) throw ContractError("bce_with_logits: logits must be k x 1");
    if (y.size() != static_cast<std::size_t>(z.rows)) throw ContractError("bce_with_logits: target count mismatch");
    if (z.rows == 0) throw ContractError("bce_with_logits: empty batch");
    int k = z.rows;
    double loss = 0.0;
    for (int i = 0; i < k; ++i) {
        double zi = (*z.data)[i];
        loss += std::max(zi, 0.0) - zi * y[i] + std::log1p(std::exp(-std::abs(zi)));
    }
    Tensor out = Tensor::zeros(1, 1);
    (*out.data)[0] = loss / k;
    int nz = input_node(t, z);
    if (t && nz >= 0) {
        auto zd = z.data;
        auto yv = y;
        attach(t, out, [=](Tape& tp, const double* g) {
            auto& gz = tp.grad_of(nz);
            double w = g[0] / k;
            for (int i = 0; i < k; ++i) gz[i] += w * (stable_sigmoid((*zd)[i]) - yv[i]);
        });
    }
    return out;
}

}  // namespace dhgnn
