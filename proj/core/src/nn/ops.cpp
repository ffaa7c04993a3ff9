#include "fluhost/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace fluhost::nn {

// ---- graph ------------------------------------------------------------------

Tensor& Node::grad_buffer() {
    if (grad.size() != value.size() || grad.shape() != value.shape()) grad = Tensor(value.shape());
    return grad;
}

Var Var::constant(Tensor value) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    return Var(std::move(n));
}

Var Var::parameter(Tensor value) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->requires_grad = true;
    return Var(std::move(n));
}

Var Var::from_op(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    for (const auto& p : parents)
        if (p.requires_grad()) n->requires_grad = true;
    if (n->requires_grad) {
        n->parents.reserve(parents.size());
        for (auto& p : parents) n->parents.push_back(p.node_);
        n->backward = std::move(backward);
    }
    return Var(std::move(n));
}

void Var::zero_grad() {
    if (node_->grad.size()) node_->grad.fill(0.0);
}

void Var::backward() {
    if (node_->value.size() != 1) throw ShapeError("backward() needs a single-element output");
    // Iterative post-order DFS gives a topological order.
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
    seen.insert(node_.get());
    while (!stack.empty()) {
        auto& [n, next] = stack.back();
        if (next < n->parents.size()) {
            Node* p = n->parents[next++].get();
            if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }
    node_->grad_buffer()[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backward && (*it)->grad.size()) (*it)->backward(**it);
}

// ---- helpers ----------------------------------------------------------------

namespace {

std::size_t last_dim(const Tensor& t) {
    if (t.rank() == 0) throw ShapeError("expected a tensor of rank >= 1");
    return t.shape().back();
}

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
    if (t.rank() != rank)
        throw ShapeError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got shape " +
                         to_string(t.shape()));
}

Shape with_last(Shape s, std::size_t last) {
    s.back() = last;
    return s;
}

}  // namespace

// ---- ops --------------------------------------------------------------------

Var dense(const Var& x, const Var& W, const Var& b) {
    const auto& xv = x.value();
    const auto& wv = W.value();
    require_rank(wv, 2, "dense weights");
    const std::size_t in = wv.dim(0), out = wv.dim(1);
    if (last_dim(xv) != in || b.value().size() != out)
        throw ShapeError("dense: input " + to_string(xv.shape()) + " incompatible with weights " +
                         to_string(wv.shape()) + " and bias " + to_string(b.value().shape()));
    const std::size_t rows = xv.size() / in;
    Tensor y(with_last(xv.shape(), out));
    const double* xp = xv.data();
    const double* wp = wv.data();
    const double* bp = b.value().data();
    double* yp = y.data();
    for (std::size_t n = 0; n < rows; ++n) {
        double* yr = yp + n * out;
        std::copy(bp, bp + out, yr);
        for (std::size_t i = 0; i < in; ++i) {
            const double a = xp[n * in + i];
            const double* wr = wp + i * out;
            for (std::size_t o = 0; o < out; ++o) yr[o] += a * wr[o];
        }
    }
    return Var::from_op(std::move(y), {x, W, b}, [rows, in, out](Node& self) {
        auto& px = *self.parents[0];
        auto& pw = *self.parents[1];
        auto& pb = *self.parents[2];
        const double* g = self.grad.data();
        if (px.requires_grad) {
            double* gx = px.grad_buffer().data();
            const double* wp = pw.value.data();
            for (std::size_t n = 0; n < rows; ++n)
                for (std::size_t i = 0; i < in; ++i) {
                    const double* wr = wp + i * out;
                    const double* gr = g + n * out;
                    double s = 0.0;
                    for (std::size_t o = 0; o < out; ++o) s += gr[o] * wr[o];
                    gx[n * in + i] += s;
                }
        }
        if (pw.requires_grad) {
            double* gw = pw.grad_buffer().data();
            const double* xp = px.value.data();
            for (std::size_t n = 0; n < rows; ++n)
                for (std::size_t i = 0; i < in; ++i) {
                    const double a = xp[n * in + i];
                    double* gwr = gw + i * out;
                    const double* gr = g + n * out;
                    for (std::size_t o = 0; o < out; ++o) gwr[o] += a * gr[o];
                }
        }
        if (pb.requires_grad) {
            double* gb = pb.grad_buffer().data();
            for (std::size_t n = 0; n < rows; ++n)
                for (std::size_t o = 0; o < out; ++o) gb[o] += g[n * out + o];
        }
    });
}

Var relu(const Var& x) {
    Tensor y = x.value();
    for (auto& v : y.values()) v = v > 0.0 ? v : 0.0;
    return Var::from_op(std::move(y), {x}, [](Node& self) {
        auto& px = *self.parents[0];
        double* gx = px.grad_buffer().data();
        const double* xv = px.value.data();
        const double* g = self.grad.data();
        for (std::size_t i = 0; i < self.grad.size(); ++i)
            if (xv[i] > 0.0) gx[i] += g[i];
    });
}

Var add(const Var& a, const Var& b) {
    if (a.shape() != b.shape())
        throw ShapeError("add: shapes " + to_string(a.shape()) + " and " + to_string(b.shape()) + " differ");
    Tensor y = a.value();
    const double* bp = b.value().data();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += bp[i];
    return Var::from_op(std::move(y), {a, b}, [](Node& self) {
        for (auto& p : self.parents) {
            if (!p->requires_grad) continue;
            double* gp = p->grad_buffer().data();
            for (std::size_t i = 0; i < self.grad.size(); ++i) gp[i] += self.grad[i];
        }
    });
}

Var softmax(const Var& x) {
    const std::size_t C = last_dim(x.value());
    const std::size_t rows = x.value().size() / C;
    Tensor y = x.value();
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = y.data() + r * C;
        const double mx = *std::max_element(row, row + C);
        double s = 0.0;
        for (std::size_t c = 0; c < C; ++c) s += (row[c] = std::exp(row[c] - mx));
        for (std::size_t c = 0; c < C; ++c) row[c] /= s;
    }
    return Var::from_op(y, {x}, [y, rows, C](Node& self) {
        double* gx = self.parents[0]->grad_buffer().data();
        for (std::size_t r = 0; r < rows; ++r) {
            const double* yr = y.data() + r * C;
            const double* gr = self.grad.data() + r * C;
            double dot = 0.0;
            for (std::size_t c = 0; c < C; ++c) dot += gr[c] * yr[c];
            for (std::size_t c = 0; c < C; ++c) gx[r * C + c] += yr[c] * (gr[c] - dot);
        }
    });
}

Var softmax_cross_entropy(const Var& logits, std::span<const int> labels) {
    const auto& z = logits.value();
    require_rank(z, 2, "softmax_cross_entropy logits");
    const std::size_t N = z.dim(0), C = z.dim(1);
    if (labels.size() != N)
        throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(N) + " rows");
    if (N == 0) throw ShapeError("softmax_cross_entropy: empty batch");
    Tensor probs(z.shape());
    double loss = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        const int y = labels[n];
        if (y < 0 || static_cast<std::size_t>(y) >= C)
            throw DataError("label " + std::to_string(y) + " outside [0, " + std::to_string(C) + ")");
        const double* zr = z.data() + n * C;
        double* pr = probs.data() + n * C;
        const double mx = *std::max_element(zr, zr + C);
        double s = 0.0;
        for (std::size_t c = 0; c < C; ++c) s += (pr[c] = std::exp(zr[c] - mx));
        for (std::size_t c = 0; c < C; ++c) pr[c] /= s;
        loss += std::log(s) + mx - zr[y];
    }
    loss /= static_cast<double>(N);
    std::vector<int> y(labels.begin(), labels.end());
    return Var::from_op(Tensor({1}, {loss}), {logits}, [probs = std::move(probs), y = std::move(y), N, C](Node& self) {
        double* gz = self.parents[0]->grad_buffer().data();
        const double g = self.grad[0] / static_cast<double>(N);
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t c = 0; c < C; ++c)
                gz[n * C + c] += g * (probs[n * C + c] - (static_cast<int>(c) == y[n] ? 1.0 : 0.0));
    });
}

Var embedding(std::span<const int> ids, std::size_t batch, std::size_t seq_len, const Var& table) {
    const auto& tv = table.value();
    require_rank(tv, 2, "embedding table");
    if (ids.size() != batch * seq_len)
        throw ShapeError("embedding: " + std::to_string(ids.size()) + " ids for batch " + std::to_string(batch) +
                         " x " + std::to_string(seq_len));
    const std::size_t V = tv.dim(0), D = tv.dim(1);
    Tensor y({batch, seq_len, D});
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= V)
            throw DataError("token id " + std::to_string(ids[i]) + " outside vocabulary of size " + std::to_string(V));
        const double* src = tv.data() + static_cast<std::size_t>(ids[i]) * D;
        std::copy(src, src + D, y.data() + i * D);
    }
    std::vector<int> idv(ids.begin(), ids.end());
    return Var::from_op(std::move(y), {table}, [idv = std::move(idv), D](Node& self) {
        double* gt = self.parents[0]->grad_buffer().data();
        const double* g = self.grad.data();
        for (std::size_t i = 0; i < idv.size(); ++i) {
            double* dst = gt + static_cast<std::size_t>(idv[i]) * D;
            for (std::size_t d = 0; d < D; ++d) dst[d] += g[i * D + d];
        }
    });
}

Var conv1d(const Var& x, const Var& filters, const Var& bias) {
    const auto& xv = x.value();
    const auto& wv = filters.value();
    require_rank(xv, 3, "conv1d input");
    require_rank(wv, 3, "conv1d filters");
    const std::size_t B = xv.dim(0), T = xv.dim(1), Cin = xv.dim(2);
    const std::size_t K = wv.dim(0), Cout = wv.dim(2);
    if (wv.dim(1) != Cin || bias.value().size() != Cout)
        throw ShapeError("conv1d: input " + to_string(xv.shape()) + " incompatible with filters " +
                         to_string(wv.shape()));
    if (T < K)
        throw DataError("conv1d: sequence length " + std::to_string(T) + " is shorter than kernel size " +
                        std::to_string(K));
    const std::size_t To = T - K + 1;
    Tensor y({B, To, Cout});
    const double* bp = bias.value().data();
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < To; ++t) {
            double* yr = y.data() + (b * To + t) * Cout;
            std::copy(bp, bp + Cout, yr);
            for (std::size_t k = 0; k < K; ++k)
                for (std::size_t c = 0; c < Cin; ++c) {
                    const double a = xv.data()[(b * T + t + k) * Cin + c];
                    const double* wr = wv.data() + (k * Cin + c) * Cout;
                    for (std::size_t o = 0; o < Cout; ++o) yr[o] += a * wr[o];
                }
        }
    return Var::from_op(std::move(y), {x, filters, bias}, [B, T, Cin, K, Cout, To](Node& self) {
        auto& px = *self.parents[0];
        auto& pw = *self.parents[1];
        auto& pb = *self.parents[2];
        const double* g = self.grad.data();
        double* gx = px.requires_grad ? px.grad_buffer().data() : nullptr;
        double* gw = pw.requires_grad ? pw.grad_buffer().data() : nullptr;
        const double* xp = px.value.data();
        const double* wp = pw.value.data();
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t t = 0; t < To; ++t) {
                const double* gr = g + (b * To + t) * Cout;
                for (std::size_t k = 0; k < K; ++k)
                    for (std::size_t c = 0; c < Cin; ++c) {
                        const std::size_t xi = (b * T + t + k) * Cin + c;
                        const std::size_t wi = (k * Cin + c) * Cout;
                        if (gx) {
                            double s = 0.0;
                            for (std::size_t o = 0; o < Cout; ++o) s += gr[o] * wp[wi + o];
                            gx[xi] += s;
                        }
                        if (gw) {
                            const double a = xp[xi];
                            for (std::size_t o = 0; o < Cout; ++o) gw[wi + o] += a * gr[o];
                        }
                    }
            }
        if (pb.requires_grad) {
            double* gb = pb.grad_buffer().data();
            for (std::size_t i = 0; i < B * To; ++i)
                for (std::size_t o = 0; o < Cout; ++o) gb[o] += g[i * Cout + o];
        }
    });
}

Var maxpool1d(const Var& x, std::size_t width) {
    const auto& xv = x.value();
    require_rank(xv, 3, "maxpool1d input");
    if (width == 0) throw ShapeError("maxpool1d: width must be positive");
    const std::size_t B = xv.dim(0), T = xv.dim(1), C = xv.dim(2);
    if (T < width)
        throw DataError("maxpool1d: sequence length " + std::to_string(T) + " is shorter than pool width " +
                        std::to_string(width));
    const std::size_t To = T / width;
    Tensor y({B, To, C});
    std::vector<std::size_t> src(y.size());
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < To; ++t)
            for (std::size_t c = 0; c < C; ++c) {
                std::size_t best = (b * T + t * width) * C + c;
                for (std::size_t i = 1; i < width; ++i) {
                    const std::size_t cand = (b * T + t * width + i) * C + c;
                    if (xv[cand] > xv[best]) best = cand;
                }
                const std::size_t yi = (b * To + t) * C + c;
                y[yi] = xv[best];
                src[yi] = best;
            }
    return Var::from_op(std::move(y), {x}, [src = std::move(src)](Node& self) {
        double* gx = self.parents[0]->grad_buffer().data();
        for (std::size_t i = 0; i < src.size(); ++i) gx[src[i]] += self.grad[i];
    });
}

Tensor attention_weights(const Tensor& Q, const Tensor& K) {
    require_rank(Q, 3, "attention query");
    require_rank(K, 3, "attention key");
    const std::size_t B = Q.dim(0), Tq = Q.dim(1), d = Q.dim(2), Tk = K.dim(1);
    if (K.dim(0) != B || K.dim(2) != d)
        throw ShapeError("attention: query " + to_string(Q.shape()) + " and key " + to_string(K.shape()) +
                         " disagree");
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    Tensor A({B, Tq, Tk});
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t i = 0; i < Tq; ++i) {
            const double* q = Q.data() + (b * Tq + i) * d;
            double* a = A.data() + (b * Tq + i) * Tk;
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < Tk; ++j) {
                const double* k = K.data() + (b * Tk + j) * d;
                double s = 0.0;
                for (std::size_t e = 0; e < d; ++e) s += q[e] * k[e];
                a[j] = s * scale;
                mx = std::max(mx, a[j]);
            }
            double sum = 0.0;
            for (std::size_t j = 0; j < Tk; ++j) sum += (a[j] = std::exp(a[j] - mx));
            for (std::size_t j = 0; j < Tk; ++j) a[j] /= sum;
        }
    return A;
}

Var scaled_dot_product_attention(const Var& Q, const Var& K, const Var& V) {
    const auto& vv = V.value();
    require_rank(vv, 3, "attention value");
    if (vv.dim(0) != K.value().dim(0) || vv.dim(1) != K.value().dim(1))
        throw ShapeError("attention: key " + to_string(K.shape()) + " and value " + to_string(V.shape()) +
                         " disagree");
    Tensor A = attention_weights(Q.value(), K.value());
    const std::size_t B = A.dim(0), Tq = A.dim(1), Tk = A.dim(2), dv = vv.dim(2), dk = Q.value().dim(2);
    Tensor out({B, Tq, dv});
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t i = 0; i < Tq; ++i) {
            double* o = out.data() + (b * Tq + i) * dv;
            const double* a = A.data() + (b * Tq + i) * Tk;
            for (std::size_t j = 0; j < Tk; ++j) {
                const double* v = vv.data() + (b * Tk + j) * dv;
                for (std::size_t e = 0; e < dv; ++e) o[e] += a[j] * v[e];
            }
        }
    return Var::from_op(std::move(out), {Q, K, V}, [A = std::move(A), B, Tq, Tk, dv, dk](Node& self) {
        auto& pq = *self.parents[0];
        auto& pk = *self.parents[1];
        auto& pv = *self.parents[2];
        const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
        const double* g = self.grad.data();
        std::vector<double> gs(Tk);
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t i = 0; i < Tq; ++i) {
                const double* a = A.data() + (b * Tq + i) * Tk;
                const double* gr = g + (b * Tq + i) * dv;
                // d/dA, then through the row softmax.
                double dot = 0.0;
                for (std::size_t j = 0; j < Tk; ++j) {
                    const double* v = pv.value.data() + (b * Tk + j) * dv;
                    double s = 0.0;
                    for (std::size_t e = 0; e < dv; ++e) s += gr[e] * v[e];
                    gs[j] = s;
                    dot += s * a[j];
                }
                for (std::size_t j = 0; j < Tk; ++j) gs[j] = a[j] * (gs[j] - dot) * scale;
                if (pv.requires_grad) {
                    double* gv = pv.grad_buffer().data();
                    for (std::size_t j = 0; j < Tk; ++j)
                        for (std::size_t e = 0; e < dv; ++e) gv[(b * Tk + j) * dv + e] += a[j] * gr[e];
                }
                if (pq.requires_grad) {
                    double* gq = pq.grad_buffer().data() + (b * Tq + i) * dk;
                    for (std::size_t j = 0; j < Tk; ++j) {
                        const double* k = pk.value.data() + (b * Tk + j) * dk;
                        for (std::size_t e = 0; e < dk; ++e) gq[e] += gs[j] * k[e];
                    }
                }
                if (pk.requires_grad) {
                    double* gk = pk.grad_buffer().data();
                    const double* q = pq.value.data() + (b * Tq + i) * dk;
                    for (std::size_t j = 0; j < Tk; ++j)
                        for (std::size_t e = 0; e < dk; ++e) gk[(b * Tk + j) * dk + e] += gs[j] * q[e];
                }
            }
    });
}

Var multi_head_attention(const Var& x, const AttentionParams& p, std::size_t num_heads) {
    require_rank(x.value(), 3, "multi_head_attention input");
    const std::size_t D = x.value().dim(2);
    if (num_heads == 0 || D % num_heads != 0)
        throw ConfigError("embed_dim " + std::to_string(D) + " is not divisible by num_heads " +
                          std::to_string(num_heads));
    const std::size_t dh = D / num_heads;
    Var q = dense(x, p.wq, p.bq);
    Var k = dense(x, p.wk, p.bk);
    Var v = dense(x, p.wv, p.bv);
    if (num_heads == 1) return dense(scaled_dot_product_attention(q, k, v), p.wo, p.bo);
    std::vector<Var> heads;
    heads.reserve(num_heads);
    for (std::size_t h = 0; h < num_heads; ++h)
        heads.push_back(scaled_dot_product_attention(slice_last(q, h * dh, dh), slice_last(k, h * dh, dh),
                                                     slice_last(v, h * dh, dh)));
    return dense(concat_last(heads), p.wo, p.bo);
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
    const auto& xv = x.value();
    const std::size_t D = last_dim(xv);
    if (gamma.value().size() != D || beta.value().size() != D)
        throw ShapeError("layer_norm: scale/shift size differs from last axis " + std::to_string(D));
    const std::size_t rows = xv.size() / D;
    Tensor y(xv.shape());
    Tensor xhat(xv.shape());
    std::vector<double> inv_std(rows);
    const double* gp = gamma.value().data();
    const double* bp = beta.value().data();
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = xv.data() + r * D;
        double mean = 0.0;
        for (std::size_t d = 0; d < D; ++d) mean += xr[d];
        mean /= static_cast<double>(D);
        double var = 0.0;
        for (std::size_t d = 0; d < D; ++d) var += (xr[d] - mean) * (xr[d] - mean);
        var /= static_cast<double>(D);
        inv_std[r] = 1.0 / std::sqrt(var + eps);
        for (std::size_t d = 0; d < D; ++d) {
            const double h = (xr[d] - mean) * inv_std[r];
            xhat[r * D + d] = h;
            y[r * D + d] = h * gp[d] + bp[d];
        }
    }
    return Var::from_op(std::move(y), {x, gamma, beta},
                        [xhat = std::move(xhat), inv_std = std::move(inv_std), rows, D](Node& self) {
        auto& px = *self.parents[0];
        auto& pg = *self.parents[1];
        auto& pb = *self.parents[2];
        const double* g = self.grad.data();
        const double* gam = pg.value.data();
        if (pg.requires_grad) {
            double* gg = pg.grad_buffer().data();
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t d = 0; d < D; ++d) gg[d] += g[r * D + d] * xhat[r * D + d];
        }
        if (pb.requires_grad) {
            double* gb = pb.grad_buffer().data();
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t d = 0; d < D; ++d) gb[d] += g[r * D + d];
        }
        if (px.requires_grad) {
            double* gx = px.grad_buffer().data();
            const double n = static_cast<double>(D);
            for (std::size_t r = 0; r < rows; ++r) {
                double sum_g = 0.0, sum_gx = 0.0;
                for (std::size_t d = 0; d < D; ++d) {
                    const double gh = g[r * D + d] * gam[d];
                    sum_g += gh;
                    sum_gx += gh * xhat[r * D + d];
                }
                for (std::size_t d = 0; d < D; ++d) {
                    const double gh = g[r * D + d] * gam[d];
                    gx[r * D + d] += inv_std[r] / n * (n * gh - sum_g - xhat[r * D + d] * sum_gx);
                }
            }
        }
    });
}

Var mean_pool(const Var& x) {
    const auto& xv = x.value();
    require_rank(xv, 3, "mean_pool input");
    const std::size_t B = xv.dim(0), T = xv.dim(1), D = xv.dim(2);
    if (T == 0) throw ShapeError("mean_pool: empty sequence axis");
    Tensor y({B, D});
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t d = 0; d < D; ++d) y[b * D + d] += xv[(b * T + t) * D + d];
    for (auto& v : y.values()) v /= static_cast<double>(T);
    return Var::from_op(std::move(y), {x}, [B, T, D](Node& self) {
        double* gx = self.parents[0]->grad_buffer().data();
        const double inv = 1.0 / static_cast<double>(T);
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t t = 0; t < T; ++t)
                for (std::size_t d = 0; d < D; ++d) gx[(b * T + t) * D + d] += self.grad[b * D + d] * inv;
    });
}

Var reshape(const Var& x, Shape shape) {
    return Var::from_op(x.value().reshaped(std::move(shape)), {x}, [](Node& self) {
        double* gx = self.parents[0]->grad_buffer().data();
        for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i];
    });
}

Var slice_last(const Var& x, std::size_t offset, std::size_t width) {
    const auto& xv = x.value();
    const std::size_t D = last_dim(xv);
    if (offset + width > D) throw ShapeError("slice_last: range exceeds last axis " + std::to_string(D));
    const std::size_t rows = xv.size() / D;
    Tensor y(with_last(xv.shape(), width));
    for (std::size_t r = 0; r < rows; ++r)
        std::copy(xv.data() + r * D + offset, xv.data() + r * D + offset + width, y.data() + r * width);
    return Var::from_op(std::move(y), {x}, [rows, D, offset, width](Node& self) {
        double* gx = self.parents[0]->grad_buffer().data();
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < width; ++c) gx[r * D + offset + c] += self.grad[r * width + c];
    });
}

Var concat_last(const std::vector<Var>& parts) {
    if (parts.empty()) throw ShapeError("concat_last: nothing to concatenate");
    Shape lead = parts[0].shape();
    lead.pop_back();
    std::size_t total = 0;
    std::vector<std::size_t> widths;
    for (const auto& p : parts) {
        Shape s = p.shape();
        widths.push_back(s.back());
        s.pop_back();
        if (s != lead) throw ShapeError("concat_last: leading dimensions differ");
        total += widths.back();
    }
    const std::size_t rows = shape_size(lead);
    Shape out_shape = lead;
    out_shape.push_back(total);
    Tensor y(out_shape);
    std::size_t off = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto& pv = parts[i].value();
        for (std::size_t r = 0; r < rows; ++r)
            std::copy(pv.data() + r * widths[i], pv.data() + (r + 1) * widths[i], y.data() + r * total + off);
        off += widths[i];
    }
    return Var::from_op(std::move(y), parts, [rows, total, widths](Node& self) {
        std::size_t off = 0;
        for (std::size_t i = 0; i < widths.size(); ++i) {
            auto& p = *self.parents[i];
            if (p.requires_grad) {
                double* gp = p.grad_buffer().data();
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t c = 0; c < widths[i]; ++c) gp[r * widths[i] + c] += self.grad[r * total + off + c];
            }
            off += widths[i];
        }
    });
}

Var weighted_sum(const Var& x, const Tensor& weights) {
    if (weights.size() != x.value().size()) throw ShapeError("weighted_sum: weight count differs from input size");
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) s += x.value()[i] * weights[i];
    return Var::from_op(Tensor({1}, {s}), {x}, [weights](Node& self) {
        double* gx = self.parents[0]->grad_buffer().data();
        for (std::size_t i = 0; i < weights.size(); ++i) gx[i] += self.grad[0] * weights[i];
    });
}

}  // namespace fluhost::nn
