#include "cpn/nn/tape.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace cpn::nn {
namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<EMat>;
using CMap = Eigen::Map<const EMat>;

Map map(Tensor& t) { return {t.data.data(), t.rows, t.cols}; }
CMap cmap(const Tensor& t) { return {t.data.data(), t.rows, t.cols}; }

constexpr double kBnEps = 1e-5;

void require(bool ok, const char* msg) {
    if (!ok) throw ShapeMismatch(msg);
}

} // namespace

Value* Tape::make(Tensor&& val) {
    // grad buffers stay unallocated until backward: eval-mode forwards never
    // pay for them.
    nodes_.emplace_back();
    Value& v = nodes_.back();
    v.val = std::move(val);
    return &v;
}

Value* Tape::leaf(const Tensor& t) {
    Tensor copy = t;
    return make(std::move(copy));
}

Value* Tape::affine(Value* x, Value* w, Value* b) {
    require(x->val.cols == w->val.rows, "affine: inner dimensions differ");
    require(b->val.rows == 1 && b->val.cols == w->val.cols,
            "affine: bias must be 1 x out_dim");
    Tensor out(x->val.rows, w->val.cols);
    map(out).noalias() = cmap(x->val) * cmap(w->val);
    map(out).rowwise() += cmap(b->val).row(0);
    Value* node = make(std::move(out));
    node->back = [x, w, b](const Value& self) {
        map(x->grad).noalias() += cmap(self.grad) * cmap(w->val).transpose();
        map(w->grad).noalias() += cmap(x->val).transpose() * cmap(self.grad);
        map(b->grad).row(0) += cmap(self.grad).colwise().sum();
    };
    return node;
}

Value* Tape::relu(Value* x) {
    Tensor out = x->val;
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    Value* node = make(std::move(out));
    node->back = [x](const Value& self) {
        const size_t sz = self.grad.data.size();
        for (size_t i = 0; i < sz; ++i)
            if (x->val.data[i] > 0.0) x->grad.data[i] += self.grad.data[i];
    };
    return node;
}

Value* Tape::add(Value* a, Value* b) {
    require(a->val.same_shape(b->val), "add: shapes differ");
    Tensor out = a->val;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += b->val.data[i];
    Value* node = make(std::move(out));
    node->back = [a, b](const Value& self) {
        for (size_t i = 0; i < self.grad.data.size(); ++i) {
            a->grad.data[i] += self.grad.data[i];
            b->grad.data[i] += self.grad.data[i];
        }
    };
    return node;
}

Value* Tape::batch_norm(Value* x, Value* gamma, Value* beta, BatchNormState& state,
                        bool training, double momentum) {
    const int n = x->val.rows, c = x->val.cols;
    require(gamma->val.rows == 1 && gamma->val.cols == c, "batch_norm: gamma shape");
    require(beta->val.rows == 1 && beta->val.cols == c, "batch_norm: beta shape");
    require(state.run_mean.cols == c, "batch_norm: state width");

    Tensor mean(1, c), inv_std(1, c);
    if (training) {
        // row-major passes: column-wise Eigen reductions stride badly here
        Tensor var(1, c);
        for (int i = 0; i < n; ++i) {
            const double* row = x->val.data.data() + static_cast<size_t>(i) * c;
            for (int j = 0; j < c; ++j) mean(0, j) += row[j];
        }
        for (int j = 0; j < c; ++j) mean(0, j) /= n;
        for (int i = 0; i < n; ++i) {
            const double* row = x->val.data.data() + static_cast<size_t>(i) * c;
            for (int j = 0; j < c; ++j) {
                const double d = row[j] - mean(0, j);
                var(0, j) += d * d;
            }
        }
        for (int j = 0; j < c; ++j) var(0, j) /= n;
        for (int j = 0; j < c; ++j) {
            state.run_mean(0, j) =
                momentum * state.run_mean(0, j) + (1.0 - momentum) * mean(0, j);
            state.run_var(0, j) =
                momentum * state.run_var(0, j) + (1.0 - momentum) * var(0, j);
            inv_std(0, j) = 1.0 / std::sqrt(var(0, j) + kBnEps);
        }
    } else {
        mean = state.run_mean;
        for (int j = 0; j < c; ++j)
            inv_std(0, j) = 1.0 / std::sqrt(state.run_var(0, j) + kBnEps);
    }

    Tensor out(n, c);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j)
            out(i, j) = gamma->val(0, j) * (x->val(i, j) - mean(0, j)) * inv_std(0, j) +
                        beta->val(0, j);
    Value* node = make(std::move(out));

    node->back = [x, gamma, beta, mean, inv_std, training, n, c](const Value& self) {
        // x_hat recomputed from cached mean / inv_std; all loops row-major.
        std::vector<double> sum_g(static_cast<size_t>(c), 0.0);
        std::vector<double> sum_gx(static_cast<size_t>(c), 0.0);
        for (int i = 0; i < n; ++i) {
            const double* xr = x->val.data.data() + static_cast<size_t>(i) * c;
            const double* gr = self.grad.data.data() + static_cast<size_t>(i) * c;
            for (int j = 0; j < c; ++j) {
                const double xh = (xr[j] - mean(0, j)) * inv_std(0, j);
                sum_g[static_cast<size_t>(j)] += gr[j];
                sum_gx[static_cast<size_t>(j)] += gr[j] * xh;
            }
        }
        for (int j = 0; j < c; ++j) {
            gamma->grad(0, j) += sum_gx[static_cast<size_t>(j)];
            beta->grad(0, j) += sum_g[static_cast<size_t>(j)];
        }
        if (training) {
            for (int i = 0; i < n; ++i) {
                const double* xr = x->val.data.data() + static_cast<size_t>(i) * c;
                const double* gr = self.grad.data.data() + static_cast<size_t>(i) * c;
                double* xg = x->grad.data.data() + static_cast<size_t>(i) * c;
                for (int j = 0; j < c; ++j) {
                    const double xh = (xr[j] - mean(0, j)) * inv_std(0, j);
                    const double k = gamma->val(0, j) * inv_std(0, j);
                    xg[j] += k * (gr[j] - sum_g[static_cast<size_t>(j)] / n -
                                  xh * sum_gx[static_cast<size_t>(j)] / n);
                }
            }
        } else {
            for (int i = 0; i < n; ++i) {
                const double* gr = self.grad.data.data() + static_cast<size_t>(i) * c;
                double* xg = x->grad.data.data() + static_cast<size_t>(i) * c;
                for (int j = 0; j < c; ++j)
                    xg[j] += gamma->val(0, j) * inv_std(0, j) * gr[j];
            }
        }
    };
    return node;
}

Value* Tape::dropout(Value* x, double p, Rng& rng, bool training) {
    if (!(p >= 0.0 && p < 1.0))
        throw ValidationError("dropout: p must be in [0, 1)");
    if (!training || p == 0.0) {
        Tensor out = x->val;
        Value* node = make(std::move(out));
        node->back = [x](const Value& self) {
            for (size_t i = 0; i < self.grad.data.size(); ++i)
                x->grad.data[i] += self.grad.data[i];
        };
        return node;
    }
    const double scale = 1.0 / (1.0 - p);
    std::vector<char> mask(x->val.data.size());
    Tensor out = x->val;
    for (size_t i = 0; i < mask.size(); ++i) {
        mask[i] = rng.uniform() >= p ? 1 : 0;
        out.data[i] = mask[i] ? out.data[i] * scale : 0.0;
    }
    Value* node = make(std::move(out));
    node->back = [x, mask = std::move(mask), scale](const Value& self) {
        for (size_t i = 0; i < self.grad.data.size(); ++i)
            if (mask[i]) x->grad.data[i] += self.grad.data[i] * scale;
    };
    return node;
}

Value* Tape::edge_features(Value* x, const std::vector<int>& neighbors, int k) {
    const int n = x->val.rows, c = x->val.cols;
    require(static_cast<int>(neighbors.size()) == n * k,
            "edge_features: neighbor table must be n x k");
    Tensor out(n * k, 3 * c);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j) {
            const int e = i * k + j;
            const int nbr = neighbors[static_cast<size_t>(e)];
            double* row = out.data.data() + static_cast<size_t>(e) * 3 * c;
            const double* xi = x->val.data.data() + static_cast<size_t>(i) * c;
            const double* xj = x->val.data.data() + static_cast<size_t>(nbr) * c;
            for (int f = 0; f < c; ++f) {
                const double diff = xj[f] - xi[f];
                row[f] = xi[f];
                row[c + f] = diff;
                row[2 * c + f] = diff * diff;
            }
        }
    }
    Value* node = make(std::move(out));
    node->back = [x, neighbors, k, n, c](const Value& self) {
        for (int i = 0; i < n; ++i) {
            double* gi = x->grad.data.data() + static_cast<size_t>(i) * c;
            const double* xi = x->val.data.data() + static_cast<size_t>(i) * c;
            for (int j = 0; j < k; ++j) {
                const int e = i * k + j;
                const int nbr = neighbors[static_cast<size_t>(e)];
                double* gj = x->grad.data.data() + static_cast<size_t>(nbr) * c;
                const double* xj = x->val.data.data() + static_cast<size_t>(nbr) * c;
                const double* g = self.grad.data.data() + static_cast<size_t>(e) * 3 * c;
                for (int f = 0; f < c; ++f) {
                    const double diff = xj[f] - xi[f];
                    const double gdiff = g[c + f] + 2.0 * diff * g[2 * c + f];
                    gi[f] += g[f] - gdiff;
                    gj[f] += gdiff;
                }
            }
        }
    };
    return node;
}

Value* Tape::block_max(Value* x, int k) {
    require(k >= 1 && x->val.rows % k == 0, "block_max: rows not divisible by k");
    const int n = x->val.rows / k;
    std::vector<int> offsets(static_cast<size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) offsets[static_cast<size_t>(i)] = i * k;
    return segment_max(x, offsets);
}

Value* Tape::segment_max(Value* x, const std::vector<int>& offsets) {
    const int b = static_cast<int>(offsets.size()) - 1;
    const int c = x->val.cols;
    require(b >= 1 && offsets.front() == 0 && offsets.back() == x->val.rows,
            "segment_max: bad offsets");
    Tensor out(b, c);
    std::vector<int> arg(static_cast<size_t>(b) * c);
    for (int s = 0; s < b; ++s) {
        const int lo = offsets[static_cast<size_t>(s)];
        const int hi = offsets[static_cast<size_t>(s) + 1];
        require(hi > lo, "segment_max: empty segment");
        double* out_row = out.data.data() + static_cast<size_t>(s) * c;
        int* arg_row = arg.data() + static_cast<size_t>(s) * c;
        std::copy(x->val.row(lo).begin(), x->val.row(lo).end(), out_row);
        std::fill(arg_row, arg_row + c, lo);
        for (int i = lo + 1; i < hi; ++i) {
            const double* row = x->val.data.data() + static_cast<size_t>(i) * c;
            for (int j = 0; j < c; ++j) {
                if (row[j] > out_row[j]) {
                    out_row[j] = row[j];
                    arg_row[j] = i;
                }
            }
        }
    }
    Value* node = make(std::move(out));
    node->back = [x, arg = std::move(arg), b, c](const Value& self) {
        for (int s = 0; s < b; ++s)
            for (int j = 0; j < c; ++j)
                x->grad(arg[static_cast<size_t>(s) * c + j], j) += self.grad(s, j);
    };
    return node;
}

Value* Tape::global_max_pool(Value* x) {
    return segment_max(x, {0, x->val.rows});
}

Value* Tape::gather_rows(Value* x, std::vector<int> indices) {
    const int c = x->val.cols;
    Tensor out(static_cast<int>(indices.size()), c);
    for (size_t i = 0; i < indices.size(); ++i) {
        const int r = indices[i];
        require(r >= 0 && r < x->val.rows, "gather_rows: index out of range");
        std::copy(x->val.row(r).begin(), x->val.row(r).end(),
                  out.row(static_cast<int>(i)).begin());
    }
    Value* node = make(std::move(out));
    node->back = [x, indices = std::move(indices), c](const Value& self) {
        for (size_t i = 0; i < indices.size(); ++i) {
            const int r = indices[i];
            for (int j = 0; j < c; ++j)
                x->grad(r, j) += self.grad(static_cast<int>(i), j);
        }
    };
    return node;
}

Value* Tape::concat_cols(Value* a, Value* b) {
    require(a->val.rows == b->val.rows, "concat_cols: row counts differ");
    const int n = a->val.rows, ca = a->val.cols, cb = b->val.cols;
    Tensor out(n, ca + cb);
    for (int i = 0; i < n; ++i) {
        std::copy(a->val.row(i).begin(), a->val.row(i).end(), out.row(i).begin());
        std::copy(b->val.row(i).begin(), b->val.row(i).end(),
                  out.row(i).begin() + ca);
    }
    Value* node = make(std::move(out));
    node->back = [a, b, n, ca, cb](const Value& self) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < ca; ++j) a->grad(i, j) += self.grad(i, j);
            for (int j = 0; j < cb; ++j) b->grad(i, j) += self.grad(i, ca + j);
        }
    };
    return node;
}

Value* Tape::softmax_cross_entropy(Value* logits, const std::vector<int>& labels) {
    const int bsz = logits->val.rows, classes = logits->val.cols;
    require(static_cast<int>(labels.size()) == bsz,
            "softmax_cross_entropy: label count != batch size");
    Tensor probs = softmax_rows(logits->val);
    double loss = 0.0;
    for (int i = 0; i < bsz; ++i) {
        const int y = labels[static_cast<size_t>(i)];
        require(y >= 0 && y < classes, "softmax_cross_entropy: label out of range");
        loss -= std::log(std::max(probs(i, y), 1e-300));
    }
    Tensor out(1, 1);
    out(0, 0) = loss / bsz;
    Value* node = make(std::move(out));
    node->back = [logits, probs = std::move(probs), labels, bsz, classes](const Value& self) {
        const double g = self.grad(0, 0) / bsz;
        for (int i = 0; i < bsz; ++i)
            for (int j = 0; j < classes; ++j)
                logits->grad(i, j) +=
                    g * (probs(i, j) - (labels[static_cast<size_t>(i)] == j ? 1.0 : 0.0));
    };
    return node;
}

void Tape::backward(Value* root) {
    require(root->val.rows == 1 && root->val.cols == 1,
            "backward: root must be scalar");
    for (Value& v : nodes_)
        if (v.grad.data.empty()) v.grad = Tensor(v.val.rows, v.val.cols);
    root->grad(0, 0) = 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it)
        if (it->back) it->back(*it);
}

Tensor softmax_rows(const Tensor& logits) {
    Tensor probs(logits.rows, logits.cols);
    for (int i = 0; i < logits.rows; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < logits.cols; ++j) mx = std::max(mx, logits(i, j));
        double sum = 0.0;
        for (int j = 0; j < logits.cols; ++j) {
            probs(i, j) = std::exp(logits(i, j) - mx);
            sum += probs(i, j);
        }
        for (int j = 0; j < logits.cols; ++j) probs(i, j) /= sum;
    }
    return probs;
}

} // namespace cpn::nn
