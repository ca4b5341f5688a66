#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tabr/graph.hpp"
#include "tabr/rng.hpp"

// The primitive set of the architecture: matmul, bias-add, elementwise
// add/sub/mul/scale, ReLU, LayerNorm, softmax (last axis), dropout, embedding
// lookup / row gather, pairwise squared-L2 distance, reductions, MSE and
// cross-entropy-from-logits losses, concatenation, sin/cos, plus the small
// row-shuffling ops the retrieval module needs (repeat/slice/weighted sum).
// Each op validates shapes, computes the value, and attaches a backward
// closure when any operand requires grad.

namespace tabr {
namespace ops {

template <class S>
using EMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using EVec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using MapM = Eigen::Map<EMat<S>>;
template <class S>
using CMapM = Eigen::Map<const EMat<S>>;
template <class S>
using MapV = Eigen::Map<EVec<S>>;
template <class S>
using CMapV = Eigen::Map<const EVec<S>>;

template <class S>
CMapM<S> mat(const Tensor<S>& t) {
    check(t.rank() == 2, "expected rank-2 tensor, got " + shape_str(t.shape()));
    return CMapM<S>(t.data(), t.dim(0), t.dim(1));
}

template <class S>
MapM<S> mat_mut(Tensor<S>& t) {
    check(t.rank() == 2, "expected rank-2 tensor, got " + shape_str(t.shape()));
    return MapM<S>(t.mutable_data(), t.dim(0), t.dim(1));
}

template <class S>
using Id = typename Graph<S>::Id;

// ---------------------------------------------------------------------------
// matmul / linear

template <class S>
Id<S> matmul(Graph<S>& g, Id<S> a, Id<S> b) {
    const Tensor<S>& A = g.value(a);
    const Tensor<S>& B = g.value(b);
    check(A.rank() == 2 && B.rank() == 2 && A.dim(1) == B.dim(0),
          "matmul: incompatible shapes " + shape_str(A.shape()) + " x " + shape_str(B.shape()));
    Tensor<S> C({A.dim(0), B.dim(1)});
    mat_mut(C).noalias() = mat(A) * mat(B);
    bool rg = g.requires_grad(a) || g.requires_grad(b);
    return g.make(std::move(C), rg, [a, b](Graph<S>& g, Id<S> self) {
        const Tensor<S>& dC = g.grad_ref(self);
        const Tensor<S>& A = g.value(a);
        const Tensor<S>& B = g.value(b);
        if (g.requires_grad(a)) mat_mut(g.grad_ref(a)).noalias() += mat(dC) * mat(B).transpose();
        if (g.requires_grad(b)) mat_mut(g.grad_ref(b)).noalias() += mat(A).transpose() * mat(dC);
    });
}

template <class S>
Id<S> bias_add(Graph<S>& g, Id<S> x, Id<S> b) {
    const Tensor<S>& X = g.value(x);
    const Tensor<S>& B = g.value(b);
    check(X.rank() == 2 && B.rank() == 1 && B.dim(0) == X.dim(1),
          "bias_add: bias " + shape_str(B.shape()) + " does not match " + shape_str(X.shape()));
    Tensor<S> Y = X.clone();
    {
        MapM<S> y = mat_mut(Y);
        CMapV<S> bv(B.data(), B.dim(0));
        y.rowwise() += bv.transpose();
    }
    bool rg = g.requires_grad(x) || g.requires_grad(b);
    return g.make(std::move(Y), rg, [x, b](Graph<S>& g, Id<S> self) {
        const Tensor<S>& dY = g.grad_ref(self);
        if (g.requires_grad(x)) axpy_into(g.grad_ref(x), dY);
        if (g.requires_grad(b)) {
            Tensor<S>& dB = g.grad_ref(b);
            MapV<S> db(dB.mutable_data(), dB.dim(0));
            db += mat(dY).colwise().sum().transpose();
        }
    });
}

template <class S>
Id<S> linear(Graph<S>& g, Id<S> x, Id<S> w, Id<S> b) {
    return bias_add(g, matmul(g, x, w), b);
}

// ---------------------------------------------------------------------------
// elementwise

template <class S, class Fwd, class Bwd>
Id<S> binary_elementwise(Graph<S>& g, Id<S> a, Id<S> b, Fwd fwd, Bwd bwd, const char* name) {
    const Tensor<S>& A = g.value(a);
    const Tensor<S>& B = g.value(b);
    check(A.shape() == B.shape(), std::string(name) + ": shape mismatch " + shape_str(A.shape()) +
                                      " vs " + shape_str(B.shape()));
    Tensor<S> Y(A.shape());
    const S* pa = A.data();
    const S* pb = B.data();
    S* py = Y.mutable_data();
    const int64_t n = A.numel();
    for (int64_t i = 0; i < n; ++i) py[i] = fwd(pa[i], pb[i]);
    bool rg = g.requires_grad(a) || g.requires_grad(b);
    return g.make(std::move(Y), rg, [a, b, bwd](Graph<S>& g, Id<S> self) {
        const Tensor<S>& dY = g.grad_ref(self);
        bwd(g, a, b, self, dY);
    });
}

template <class S>
Id<S> add(Graph<S>& g, Id<S> a, Id<S> b) {
    return binary_elementwise<S>(
        g, a, b, [](S x, S y) { return x + y; },
        [](Graph<S>& g, Id<S> a, Id<S> b, Id<S>, const Tensor<S>& dY) {
            if (g.requires_grad(a)) axpy_into(g.grad_ref(a), dY);
            if (g.requires_grad(b)) axpy_into(g.grad_ref(b), dY);
        },
        "add");
}

template <class S>
Id<S> sub(Graph<S>& g, Id<S> a, Id<S> b) {
    return binary_elementwise<S>(
        g, a, b, [](S x, S y) { return x - y; },
        [](Graph<S>& g, Id<S> a, Id<S> b, Id<S>, const Tensor<S>& dY) {
            if (g.requires_grad(a)) axpy_into(g.grad_ref(a), dY);
            if (g.requires_grad(b)) axpy_into(g.grad_ref(b), dY, S(-1));
        },
        "sub");
}

template <class S>
Id<S> mul(Graph<S>& g, Id<S> a, Id<S> b) {
    return binary_elementwise<S>(
        g, a, b, [](S x, S y) { return x * y; },
        [](Graph<S>& g, Id<S> a, Id<S> b, Id<S>, const Tensor<S>& dY) {
            const S* dy = dY.data();
            const int64_t n = dY.numel();
            if (g.requires_grad(a)) {
                S* da = g.grad_ref(a).mutable_data();
                const S* pb = g.value(b).data();
                for (int64_t i = 0; i < n; ++i) da[i] += dy[i] * pb[i];
            }
            if (g.requires_grad(b)) {
                S* db = g.grad_ref(b).mutable_data();
                const S* pa = g.value(a).data();
                for (int64_t i = 0; i < n; ++i) db[i] += dy[i] * pa[i];
            }
        },
        "mul");
}

template <class S>
Id<S> scale(Graph<S>& g, Id<S> x, double c) {
    const Tensor<S>& X = g.value(x);
    Tensor<S> Y(X.shape());
    const S* px = X.data();
    S* py = Y.mutable_data();
    const S sc = static_cast<S>(c);
    for (int64_t i = 0; i < X.numel(); ++i) py[i] = sc * px[i];
    return g.make(std::move(Y), g.requires_grad(x), [x, sc](Graph<S>& g, Id<S> self) {
        if (g.requires_grad(x)) axpy_into(g.grad_ref(x), g.grad_ref(self), sc);
    });
}

template <class S>
Id<S> relu(Graph<S>& g, Id<S> x) {
    const Tensor<S>& X = g.value(x);
    Tensor<S> Y(X.shape());
    const S* px = X.data();
    S* py = Y.mutable_data();
    for (int64_t i = 0; i < X.numel(); ++i) py[i] = px[i] > S(0) ? px[i] : S(0);
    return g.make(std::move(Y), g.requires_grad(x), [x](Graph<S>& g, Id<S> self) {
        if (!g.requires_grad(x)) return;
        const Tensor<S>& dY = g.grad_ref(self);
        S* dx = g.grad_ref(x).mutable_data();
        const S* px = g.value(x).data();
        const S* dy = dY.data();
        for (int64_t i = 0; i < dY.numel(); ++i)
            if (px[i] > S(0)) dx[i] += dy[i];
    });
}

template <class S>
Id<S> sin_op(Graph<S>& g, Id<S> x) {
    const Tensor<S>& X = g.value(x);
    Tensor<S> Y(X.shape());
    const S* px = X.data();
    S* py = Y.mutable_data();
    for (int64_t i = 0; i < X.numel(); ++i) py[i] = std::sin(px[i]);
    return g.make(std::move(Y), g.requires_grad(x), [x](Graph<S>& g, Id<S> self) {
        if (!g.requires_grad(x)) return;
        const S* dy = g.grad_ref(self).data();
        const S* px = g.value(x).data();
        S* dx = g.grad_ref(x).mutable_data();
        for (int64_t i = 0; i < g.value(x).numel(); ++i) dx[i] += dy[i] * std::cos(px[i]);
    });
}

template <class S>
Id<S> cos_op(Graph<S>& g, Id<S> x) {
    const Tensor<S>& X = g.value(x);
    Tensor<S> Y(X.shape());
    const S* px = X.data();
    S* py = Y.mutable_data();
    for (int64_t i = 0; i < X.numel(); ++i) py[i] = std::cos(px[i]);
    return g.make(std::move(Y), g.requires_grad(x), [x](Graph<S>& g, Id<S> self) {
        if (!g.requires_grad(x)) return;
        const S* dy = g.grad_ref(self).data();
        const S* px = g.value(x).data();
        S* dx = g.grad_ref(x).mutable_data();
        for (int64_t i = 0; i < g.value(x).numel(); ++i) dx[i] -= dy[i] * std::sin(px[i]);
    });
}

// ---------------------------------------------------------------------------
// normalization / softmax / dropout

template <class S>
Id<S> layer_norm(Graph<S>& g, Id<S> x, Id<S> gain, Id<S> bias, double eps = 1e-5) {
    const Tensor<S>& X = g.value(x);
    const Tensor<S>& G = g.value(gain);
    const Tensor<S>& B = g.value(bias);
    check(X.rank() == 2, "layer_norm: expected rank-2 input");
    const int64_t n = X.dim(0), d = X.dim(1);
    check(G.rank() == 1 && G.dim(0) == d && B.rank() == 1 && B.dim(0) == d,
          "layer_norm: gain/bias must have the normalized width");
    Tensor<S> Y({n, d});
    Tensor<S> xhat({n, d});
    Tensor<S> inv_std({n});
    {
        const S* px = X.data();
        const S* pg = G.data();
        const S* pb = B.data();
        S* py = Y.mutable_data();
        S* ph = xhat.mutable_data();
        S* pis = inv_std.mutable_data();
        for (int64_t i = 0; i < n; ++i) {
            const S* row = px + i * d;
            S mu = S(0);
            for (int64_t j = 0; j < d; ++j) mu += row[j];
            mu /= S(d);
            S var = S(0);
            for (int64_t j = 0; j < d; ++j) {
                S c = row[j] - mu;
                var += c * c;
            }
            var /= S(d);
            S is = S(1) / std::sqrt(var + static_cast<S>(eps));
            pis[i] = is;
            for (int64_t j = 0; j < d; ++j) {
                S h = (row[j] - mu) * is;
                ph[i * d + j] = h;
                py[i * d + j] = h * pg[j] + pb[j];
            }
        }
    }
    bool rg = g.requires_grad(x) || g.requires_grad(gain) || g.requires_grad(bias);
    return g.make(std::move(Y), rg,
                  [x, gain, bias, xhat, inv_std](Graph<S>& g, Id<S> self) {
                      const Tensor<S>& dY = g.grad_ref(self);
                      const int64_t n = dY.dim(0), d = dY.dim(1);
                      const S* dy = dY.data();
                      const S* ph = xhat.data();
                      if (g.requires_grad(gain)) {
                          S* dg = g.grad_ref(gain).mutable_data();
                          for (int64_t i = 0; i < n; ++i)
                              for (int64_t j = 0; j < d; ++j) dg[j] += dy[i * d + j] * ph[i * d + j];
                      }
                      if (g.requires_grad(bias)) {
                          S* db = g.grad_ref(bias).mutable_data();
                          for (int64_t i = 0; i < n; ++i)
                              for (int64_t j = 0; j < d; ++j) db[j] += dy[i * d + j];
                      }
                      if (g.requires_grad(x)) {
                          S* dx = g.grad_ref(x).mutable_data();
                          const S* pg = g.value(gain).data();
                          const S* pis = inv_std.data();
                          for (int64_t i = 0; i < n; ++i) {
                              S m1 = S(0), m2 = S(0);
                              for (int64_t j = 0; j < d; ++j) {
                                  S dh = dy[i * d + j] * pg[j];
                                  m1 += dh;
                                  m2 += dh * ph[i * d + j];
                              }
                              m1 /= S(d);
                              m2 /= S(d);
                              for (int64_t j = 0; j < d; ++j) {
                                  S dh = dy[i * d + j] * pg[j];
                                  dx[i * d + j] += (dh - m1 - ph[i * d + j] * m2) * pis[i];
                              }
                          }
                      }
                  });
}

// softmax over the last axis
template <class S>
Id<S> softmax(Graph<S>& g, Id<S> x) {
    const Tensor<S>& X = g.value(x);
    check(X.rank() >= 1, "softmax: expected rank >= 1");
    const int64_t k = X.dim(X.rank() - 1);
    const int64_t rows = X.numel() / k;
    Tensor<S> Y(X.shape());
    {
        const S* px = X.data();
        S* py = Y.mutable_data();
        for (int64_t i = 0; i < rows; ++i) {
            const S* row = px + i * k;
            S mx = row[0];
            for (int64_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
            S sum = S(0);
            for (int64_t j = 0; j < k; ++j) {
                S e = std::exp(row[j] - mx);
                py[i * k + j] = e;
                sum += e;
            }
            for (int64_t j = 0; j < k; ++j) py[i * k + j] /= sum;
        }
    }
    return g.make(std::move(Y), g.requires_grad(x), [x, k, rows](Graph<S>& g, Id<S> self) {
        if (!g.requires_grad(x)) return;
        const S* y = g.value(self).data();
        const S* dy = g.grad_ref(self).data();
        S* dx = g.grad_ref(x).mutable_data();
        for (int64_t i = 0; i < rows; ++i) {
            S dot = S(0);
            for (int64_t j = 0; j < k; ++j) dot += dy[i * k + j] * y[i * k + j];
            for (int64_t j = 0; j < k; ++j)
                dx[i * k + j] += (dy[i * k + j] - dot) * y[i * k + j];
        }
    });
}

// Inverted dropout: retained entries are scaled by 1/(1-rate) at train time,
// inference is the identity (the input node is returned unchanged).
template <class S>
Id<S> dropout(Graph<S>& g, Id<S> x, double rate, Rng& rng, bool train) {
    check(rate >= 0.0 && rate < 1.0, "dropout: rate must be in [0,1)");
    if (!train || rate == 0.0) return x;
    const Tensor<S>& X = g.value(x);
    const int64_t n = X.numel();
    auto mask = std::make_shared<std::vector<uint8_t>>(static_cast<size_t>(n));
    const S keep_scale = static_cast<S>(1.0 / (1.0 - rate));
    Tensor<S> Y(X.shape());
    {
        const S* px = X.data();
        S* py = Y.mutable_data();
        for (int64_t i = 0; i < n; ++i) {
            bool keep = rng.uniform() >= rate;
            (*mask)[static_cast<size_t>(i)] = keep;
            py[i] = keep ? px[i] * keep_scale : S(0);
        }
    }
    return g.make(std::move(Y), g.requires_grad(x), [x, mask, keep_scale](Graph<S>& g, Id<S> self) {
        if (!g.requires_grad(x)) return;
        const S* dy = g.grad_ref(self).data();
        S* dx = g.grad_ref(x).mutable_data();
        const int64_t n = g.value(x).numel();
        for (int64_t i = 0; i < n; ++i)
            if ((*mask)[static_cast<size_t>(i)]) dx[i] += dy[i] * keep_scale;
    });
}

// ---------------------------------------------------------------------------
// gather / layout ops

// Row gather; also serves as the embedding lookup (table rows by class id).
template <class S>
Id<S> gather_rows(Graph<S>& g, Id<S> x, std::vector<int64_t> idx) {
    const Tensor<S>& X = g.value(x);
    check(X.rank() == 2, "gather_rows: expected rank-2 input");
    const int64_t d = X.dim(1);
    const int64_t n = static_cast<int64_t>(idx.size());
    Tensor<S> Y({n, d});
    {
        const S* px = X.data();
        S* py = Y.mutable_data();
        const int64_t n_rows = X.dim(0);
        for (int64_t i = 0; i < n; ++i) {
            int64_t r = idx[static_cast<size_t>(i)];
            if (r < 0 || r >= n_rows) fatal("gather_rows: index out of range");
            std::copy(px + r * d, px + (r + 1) * d, py + i * d);
        }
    }
    auto ids = std::make_shared<std::vector<int64_t>>(std::move(idx));
    return g.make(std::move(Y), g.requires_grad(x), [x, ids, d](Graph<S>& g, Id<S> self) {
        if (!g.requires_grad(x)) return;
        const S* dy = g.grad_ref(self).data();
        S* dx = g.grad_ref(x).mutable_data();
        for (size_t i = 0; i < ids->size(); ++i) {
            const int64_t r = (*ids)[i];
            for (int64_t j = 0; j < d; ++j) dx[r * d + j] += dy[static_cast<int64_t>(i) * d + j];
        }
    });
}

template <class S>
Id<S> embedding(Graph<S>& g, Id<S> table, const std::vector<int64_t>& ids) {
    return gather_rows(g, table, ids);
}

// Each row repeated `times` times consecutively: [n,d] -> [n*times, d].
template <class S>
Id<S> repeat_rows(Graph<S>& g, Id<S> x, int64_t times) {
    const Tensor<S>& X = g.value(x);
    check(X.rank() == 2 && times >= 1, "repeat_rows: bad arguments");
    const int64_t n = X.dim(0), d = X.dim(1);
    Tensor<S> Y({n * times, d});
    {
        const S* px = X.data();
        S* py = Y.mutable_data();
        for (int64_t i = 0; i < n; ++i)
            for (int64_t t = 0; t < times; ++t)
                std::copy(px + i * d, px + (i + 1) * d, py + (i * times + t) * d);
    }
    return g.make(std::move(Y), g.requires_grad(x), [x, times, n, d](Graph<S>& g, Id<S> self) {
        if (!g.requires_grad(x)) return;
        const S* dy = g.grad_ref(self).data();
        S* dx = g.grad_ref(x).mutable_data();
        for (int64_t i = 0; i < n; ++i)
            for (int64_t t = 0; t < times; ++t)
                for (int64_t j = 0; j < d; ++j) dx[i * d + j] += dy[(i * times + t) * d + j];
    });
}

template <class S>
Id<S> concat_cols(Graph<S>& g, const std::vector<Id<S>>& xs) {
    check(!xs.empty(), "concat_cols: no inputs");
    const int64_t n = g.value(xs[0]).dim(0);
    int64_t total = 0;
    bool rg = false;
    for (Id<S> id : xs) {
        const Tensor<S>& T = g.value(id);
        check(T.rank() == 2 && T.dim(0) == n, "concat_cols: row mismatch");
        total += T.dim(1);
        rg = rg || g.requires_grad(id);
    }
    Tensor<S> Y({n, total});
    {
        S* py = Y.mutable_data();
        int64_t off = 0;
        for (Id<S> id : xs) {
            const Tensor<S>& T = g.value(id);
            const int64_t d = T.dim(1);
            const S* pt = T.data();
            for (int64_t i = 0; i < n; ++i)
                std::copy(pt + i * d, pt + (i + 1) * d, py + i * total + off);
            off += d;
        }
    }
    auto parts = std::make_shared<std::vector<Id<S>>>(xs);
    return g.make(std::move(Y), rg, [parts, n, total](Graph<S>& g, Id<S> self) {
        const S* dy = g.grad_ref(self).data();
        int64_t off = 0;
        for (Id<S> id : *parts) {
            const int64_t d = g.value(id).dim(1);
            if (g.requires_grad(id)) {
                S* dx = g.grad_ref(id).mutable_data();
                for (int64_t i = 0; i < n; ++i)
                    for (int64_t j = 0; j < d; ++j) dx[i * d + j] += dy[i * total + off + j];
            }
            off += d;
        }
    });
}

template <class S>
Id<S> slice_cols(Graph<S>& g, Id<S> x, int64_t c0, int64_t c1) {
    const Tensor<S>& X = g.value(x);
    check(X.rank() == 2 && 0 <= c0 && c0 < c1 && c1 <= X.dim(1), "slice_cols: bad range");
    const int64_t n = X.dim(0), d = X.dim(1), w = c1 - c0;
    Tensor<S> Y({n, w});
    {
        const S* px = X.data();
        S* py = Y.mutable_data();
        for (int64_t i = 0; i < n; ++i)
            std::copy(px + i * d + c0, px + i * d + c1, py + i * w);
    }
    return g.make(std::move(Y), g.requires_grad(x), [x, c0, w, n, d](Graph<S>& g, Id<S> self) {
        if (!g.requires_grad(x)) return;
        const S* dy = g.grad_ref(self).data();
        S* dx = g.grad_ref(x).mutable_data();
        for (int64_t i = 0; i < n; ++i)
            for (int64_t j = 0; j < w; ++j) dx[i * d + c0 + j] += dy[i * w + j];
    });
}

template <class S>
Id<S> reshape(Graph<S>& g, Id<S> x, Shape shape) {
    Tensor<S> Y = g.value(x).reshaped(std::move(shape));
    return g.make(std::move(Y), g.requires_grad(x), [x](Graph<S>& g, Id<S> self) {
        if (!g.requires_grad(x)) return;
        const Tensor<S>& dY = g.grad_ref(self);
        axpy_into(g.grad_ref(x), dY.reshaped(g.value(x).shape()));
    });
}

// out[i,:] = x[i,:] * s[i]
template <class S>
Id<S> rowwise_scale(Graph<S>& g, Id<S> x, Id<S> s) {
    const Tensor<S>& X = g.value(x);
    const Tensor<S>& Sv = g.value(s);
    check(X.rank() == 2 && Sv.numel() == X.dim(0), "rowwise_scale: bad scale length");
    const int64_t n = X.dim(0), d = X.dim(1);
    Tensor<S> Y({n, d});
    {
        const S* px = X.data();
        const S* ps = Sv.data();
        S* py = Y.mutable_data();
        for (int64_t i = 0; i < n; ++i)
            for (int64_t j = 0; j < d; ++j) py[i * d + j] = px[i * d + j] * ps[i];
    }
    bool rg = g.requires_grad(x) || g.requires_grad(s);
    return g.make(std::move(Y), rg, [x, s, n, d](Graph<S>& g, Id<S> self) {
        const S* dy = g.grad_ref(self).data();
        if (g.requires_grad(x)) {
            const S* ps = g.value(s).data();
            S* dx = g.grad_ref(x).mutable_data();
            for (int64_t i = 0; i < n; ++i)
                for (int64_t j = 0; j < d; ++j) dx[i * d + j] += dy[i * d + j] * ps[i];
        }
        if (g.requires_grad(s)) {
            const S* px = g.value(x).data();
            S* ds = g.grad_ref(s).mutable_data();
            for (int64_t i = 0; i < n; ++i) {
                S acc = S(0);
                for (int64_t j = 0; j < d; ++j) acc += dy[i * d + j] * px[i * d + j];
                ds[i] += acc;
            }
        }
    });
}

// r[i,:] = sum_j w[i,j] * v[i*m+j,:]  -- the context aggregation.
template <class S>
Id<S> weighted_sum_rows(Graph<S>& g, Id<S> w, Id<S> v) {
    const Tensor<S>& W = g.value(w);
    const Tensor<S>& V = g.value(v);
    check(W.rank() == 2 && V.rank() == 2 && V.dim(0) == W.dim(0) * W.dim(1),
          "weighted_sum_rows: value rows must equal weight entries");
    const int64_t n = W.dim(0), m = W.dim(1), d = V.dim(1);
    Tensor<S> Y({n, d});
    {
        const S* pw = W.data();
        const S* pv = V.data();
        S* py = Y.mutable_data();
        for (int64_t i = 0; i < n; ++i) {
            S* out = py + i * d;
            for (int64_t j = 0; j < m; ++j) {
                const S wij = pw[i * m + j];
                const S* row = pv + (i * m + j) * d;
                for (int64_t c = 0; c < d; ++c) out[c] += wij * row[c];
            }
        }
    }
    bool rg = g.requires_grad(w) || g.requires_grad(v);
    return g.make(std::move(Y), rg, [w, v, n, m, d](Graph<S>& g, Id<S> self) {
        const S* dy = g.grad_ref(self).data();
        if (g.requires_grad(w)) {
            const S* pv = g.value(v).data();
            S* dw = g.grad_ref(w).mutable_data();
            for (int64_t i = 0; i < n; ++i)
                for (int64_t j = 0; j < m; ++j) {
                    const S* row = pv + (i * m + j) * d;
                    S acc = S(0);
                    for (int64_t c = 0; c < d; ++c) acc += dy[i * d + c] * row[c];
                    dw[i * m + j] += acc;
                }
        }
        if (g.requires_grad(v)) {
            const S* pw = g.value(w).data();
            S* dv = g.grad_ref(v).mutable_data();
            for (int64_t i = 0; i < n; ++i)
                for (int64_t j = 0; j < m; ++j) {
                    const S wij = pw[i * m + j];
                    S* row = dv + (i * m + j) * d;
                    for (int64_t c = 0; c < d; ++c) row[c] += wij * dy[i * d + c];
                }
        }
    });
}

// ---------------------------------------------------------------------------
// distances

// D[i,j] = ||a_i - b_j||^2, via norms + GEMM.
template <class S>
Id<S> pairwise_sqdist(Graph<S>& g, Id<S> a, Id<S> b) {
    const Tensor<S>& A = g.value(a);
    const Tensor<S>& B = g.value(b);
    check(A.rank() == 2 && B.rank() == 2 && A.dim(1) == B.dim(1),
          "pairwise_sqdist: feature dims differ");
    const int64_t n = A.dim(0), m = B.dim(0);
    Tensor<S> D({n, m});
    {
        MapM<S> dm = mat_mut(D);
        dm.noalias() = mat(A) * mat(B).transpose();
        EVec<S> an = mat(A).rowwise().squaredNorm();
        EVec<S> bn = mat(B).rowwise().squaredNorm();
        dm = (-2 * dm).colwise() + an;
        dm.rowwise() += bn.transpose();
    }
    bool rg = g.requires_grad(a) || g.requires_grad(b);
    return g.make(std::move(D), rg, [a, b](Graph<S>& g, Id<S> self) {
        const Tensor<S>& dD = g.grad_ref(self);
        CMapM<S> dm = mat(dD);
        CMapM<S> am = mat(g.value(a));
        CMapM<S> bm = mat(g.value(b));
        if (g.requires_grad(a)) {
            // da_i = 2 * (sum_j dD_ij * a_i - dD_i: * B)
            MapM<S> da = mat_mut(g.grad_ref(a));
            EVec<S> rs = dm.rowwise().sum();
            da.noalias() += S(2) * (rs.asDiagonal() * am - dm * bm);
        }
        if (g.requires_grad(b)) {
            MapM<S> db = mat_mut(g.grad_ref(b));
            EVec<S> cs = dm.colwise().sum().transpose();
            db.noalias() += S(2) * (cs.asDiagonal() * bm - dm.transpose() * am);
        }
    });
}

// ---------------------------------------------------------------------------
// reductions

template <class S>
Id<S> sum_all(Graph<S>& g, Id<S> x) {
    const Tensor<S>& X = g.value(x);
    S acc = S(0);
    const S* px = X.data();
    for (int64_t i = 0; i < X.numel(); ++i) acc += px[i];
    Tensor<S> Y({1}, {acc});
    return g.make(std::move(Y), g.requires_grad(x), [x](Graph<S>& g, Id<S> self) {
        if (!g.requires_grad(x)) return;
        axpy_into(g.grad_ref(x), Tensor<S>::full(g.value(x).shape(), g.grad_ref(self).at(0)));
    });
}

template <class S>
Id<S> mean_all(Graph<S>& g, Id<S> x) {
    const int64_t n = g.value(x).numel();
    return scale(g, sum_all(g, x), 1.0 / static_cast<double>(n));
}

// [n,d] -> [n], sum over the last axis
template <class S>
Id<S> sum_cols(Graph<S>& g, Id<S> x) {
    const Tensor<S>& X = g.value(x);
    check(X.rank() == 2, "sum_cols: expected rank-2 input");
    const int64_t n = X.dim(0), d = X.dim(1);
    Tensor<S> Y({n});
    {
        const S* px = X.data();
        S* py = Y.mutable_data();
        for (int64_t i = 0; i < n; ++i) {
            S acc = S(0);
            for (int64_t j = 0; j < d; ++j) acc += px[i * d + j];
            py[i] = acc;
        }
    }
    return g.make(std::move(Y), g.requires_grad(x), [x, n, d](Graph<S>& g, Id<S> self) {
        if (!g.requires_grad(x)) return;
        const S* dy = g.grad_ref(self).data();
        S* dx = g.grad_ref(x).mutable_data();
        for (int64_t i = 0; i < n; ++i)
            for (int64_t j = 0; j < d; ++j) dx[i * d + j] += dy[i];
    });
}

// ---------------------------------------------------------------------------
// losses

template <class S>
Id<S> mse_loss(Graph<S>& g, Id<S> pred, Id<S> target) {
    const Tensor<S>& P = g.value(pred);
    const Tensor<S>& T = g.value(target);
    check(P.numel() == T.numel(), "mse_loss: length mismatch");
    const int64_t n = P.numel();
    S acc = S(0);
    {
        const S* pp = P.data();
        const S* pt = T.data();
        for (int64_t i = 0; i < n; ++i) {
            S e = pp[i] - pt[i];
            acc += e * e;
        }
    }
    Tensor<S> Y({1}, {acc / S(n)});
    bool rg = g.requires_grad(pred) || g.requires_grad(target);
    return g.make(std::move(Y), rg, [pred, target, n](Graph<S>& g, Id<S> self) {
        const S dl = g.grad_ref(self).at(0);
        const S* pp = g.value(pred).data();
        const S* pt = g.value(target).data();
        const S c = S(2) / S(n) * dl;
        if (g.requires_grad(pred)) {
            S* dp = g.grad_ref(pred).mutable_data();
            for (int64_t i = 0; i < n; ++i) dp[i] += c * (pp[i] - pt[i]);
        }
        if (g.requires_grad(target)) {
            S* dt = g.grad_ref(target).mutable_data();
            for (int64_t i = 0; i < n; ++i) dt[i] -= c * (pp[i] - pt[i]);
        }
    });
}

// Mean over rows of [logsumexp(z_i) - z_i[label_i]].
template <class S>
Id<S> cross_entropy_logits(Graph<S>& g, Id<S> logits, const std::vector<int64_t>& labels) {
    const Tensor<S>& Z = g.value(logits);
    check(Z.rank() == 2, "cross_entropy_logits: expected [n,C] logits");
    const int64_t n = Z.dim(0), C = Z.dim(1);
    check(static_cast<int64_t>(labels.size()) == n, "cross_entropy_logits: label count mismatch");
    Tensor<S> probs({n, C});
    S acc = S(0);
    {
        const S* pz = Z.data();
        S* pp = probs.mutable_data();
        for (int64_t i = 0; i < n; ++i) {
            const int64_t y = labels[static_cast<size_t>(i)];
            check(y >= 0 && y < C, "cross_entropy_logits: label out of range");
            const S* row = pz + i * C;
            S mx = row[0];
            for (int64_t j = 1; j < C; ++j) mx = std::max(mx, row[j]);
            S sum = S(0);
            for (int64_t j = 0; j < C; ++j) {
                S e = std::exp(row[j] - mx);
                pp[i * C + j] = e;
                sum += e;
            }
            for (int64_t j = 0; j < C; ++j) pp[i * C + j] /= sum;
            acc += std::log(sum) + mx - row[y];
        }
    }
    Tensor<S> Y({1}, {acc / S(n)});
    auto lab = std::make_shared<std::vector<int64_t>>(labels);
    return g.make(std::move(Y), g.requires_grad(logits),
                  [logits, probs, lab, n, C](Graph<S>& g, Id<S> self) {
                      if (!g.requires_grad(logits)) return;
                      const S dl = g.grad_ref(self).at(0);
                      const S* pp = probs.data();
                      S* dz = g.grad_ref(logits).mutable_data();
                      const S c = dl / S(n);
                      for (int64_t i = 0; i < n; ++i) {
                          for (int64_t j = 0; j < C; ++j) dz[i * C + j] += c * pp[i * C + j];
                          dz[i * C + (*lab)[static_cast<size_t>(i)]] -= c;
                      }
                  });
}

// Binary cross-entropy from a single logit per row.
template <class S>
Id<S> bce_logits(Graph<S>& g, Id<S> logit, const std::vector<int64_t>& labels) {
    const Tensor<S>& Z = g.value(logit);
    const int64_t n = Z.numel();
    check(static_cast<int64_t>(labels.size()) == n, "bce_logits: label count mismatch");
    S acc = S(0);
    {
        const S* pz = Z.data();
        for (int64_t i = 0; i < n; ++i) {
            const S z = pz[i];
            const S y = static_cast<S>(labels[static_cast<size_t>(i)]);
            acc += std::max(z, S(0)) - z * y + std::log1p(std::exp(-std::abs(z)));
        }
    }
    Tensor<S> Y({1}, {acc / S(n)});
    auto lab = std::make_shared<std::vector<int64_t>>(labels);
    return g.make(std::move(Y), g.requires_grad(logit), [logit, lab, n](Graph<S>& g, Id<S> self) {
        if (!g.requires_grad(logit)) return;
        const S dl = g.grad_ref(self).at(0);
        const S* pz = g.value(logit).data();
        S* dz = g.grad_ref(logit).mutable_data();
        for (int64_t i = 0; i < n; ++i) {
            const S sig = S(1) / (S(1) + std::exp(-pz[i]));
            dz[i] += dl / S(n) * (sig - static_cast<S>((*lab)[static_cast<size_t>(i)]));
        }
    });
}

}  // namespace ops
}  // namespace tabr
