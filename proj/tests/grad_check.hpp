// Central finite-difference gradient checking for the tape ops. The same
// suite backs both the unit tests and the acceptance gate.
#ifndef CPN_TESTS_GRAD_CHECK_HPP
#define CPN_TESTS_GRAD_CHECK_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <functional>
#include <vector>

#include "cpn/core/rng.hpp"
#include "cpn/nn/knn.hpp"
#include "cpn/nn/tape.hpp"

namespace gradcheck {

struct Stats {
    int instances = 0;
    int entries = 0;
    int failures = 0;
    double worst = 0.0;  // worst relative deviation seen
    std::map<std::string, int> fail_by_op;
    std::string current_op;

    void merge(const Stats& o) {
        instances += o.instances;
        entries += o.entries;
        failures += o.failures;
        worst = std::max(worst, o.worst);
        for (const auto& [op, count] : o.fail_by_op) fail_by_op[op] += count;
    }
};

using Build =
    std::function<cpn::nn::Value*(cpn::nn::Tape&, std::vector<cpn::nn::Value*>&)>;

/// Compares the tape gradient of a scalar-valued graph against central
/// differences for every entry of every input.
inline void check_one(const std::vector<cpn::Matrix>& inputs, const Build& build,
                      Stats& stats, double h = 1e-4, double tol = 1e-3) {
    using cpn::nn::Tape;
    using cpn::nn::Value;

    const auto eval = [&](const std::vector<cpn::Matrix>& xs) {
        Tape tape;
        std::vector<Value*> leaves;
        leaves.reserve(xs.size());
        for (const auto& x : xs) leaves.push_back(tape.leaf(x));
        return build(tape, leaves)->val(0, 0);
    };

    Tape tape;
    std::vector<Value*> leaves;
    for (const auto& x : inputs) leaves.push_back(tape.leaf(x));
    tape.backward(build(tape, leaves));

    ++stats.instances;
    for (size_t i = 0; i < inputs.size(); ++i) {
        for (size_t e = 0; e < inputs[i].data.size(); ++e) {
            auto plus = inputs, minus = inputs;
            plus[i].data[e] += h;
            minus[i].data[e] -= h;
            const double numeric = (eval(plus) - eval(minus)) / (2.0 * h);
            const double analytic = leaves[i]->grad.data[e];
            const double denom =
                std::max({std::fabs(numeric), std::fabs(analytic), 1e-2});
            const double rel = std::fabs(numeric - analytic) / denom;
            ++stats.entries;
            stats.worst = std::max(stats.worst, rel);
            if (!(rel <= tol)) {
                ++stats.failures;
                ++stats.fail_by_op[stats.current_op];
            }
        }
    }
}

/// Values that are pairwise separated by >= 0.03 so max/relu kinks stay far
/// from the finite-difference probes.
inline cpn::Matrix spread_values(int rows, int cols, cpn::Rng& rng) {
    const size_t total = static_cast<size_t>(rows) * cols;
    std::vector<size_t> perm(total);
    for (size_t i = 0; i < total; ++i) perm[i] = i;
    for (size_t i = total; i > 1; --i)
        std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
    cpn::Matrix m(rows, cols);
    // Half-step offset: with the ladder roughly centered, no rung can land
    // exactly on zero (the relu kink) for either parity of `total`.
    const double center = 0.037 * static_cast<double>(total) / 2.0;
    for (size_t i = 0; i < total; ++i)
        m.data[i] = 0.037 * static_cast<double>(perm[i]) - center + 0.00925;
    return m;
}

inline cpn::Matrix gaussian(int rows, int cols, cpn::Rng& rng) {
    cpn::Matrix m(rows, cols);
    for (double& v : m.data) v = rng.normal();
    return m;
}

/// Appends a zero column so one-column outputs still yield a smooth,
/// non-constant cross-entropy scalar. Takes the rng by value: the build is
/// re-evaluated many times during differencing and the labels must not move.
inline cpn::nn::Value* scalar_head(cpn::nn::Tape& tape, cpn::nn::Value* y,
                                   cpn::Rng rng) {
    if (y->val.cols < 2) {
        y = tape.concat_cols(y, tape.leaf(cpn::Matrix(y->val.rows, 1)));
    }
    std::vector<int> labels(static_cast<size_t>(y->val.rows));
    for (int& l : labels)
        l = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(y->val.cols)));
    return tape.softmax_cross_entropy(y, labels);
}

/// Runs per_op instances of every differentiable op and a composite chain.
inline Stats run_suite(int per_op, uint64_t seed) {
    using namespace cpn;
    using nn::Tape;
    using nn::Value;
    Rng rng(seed);
    Stats stats;

    for (int it = 0; it < per_op; ++it) {
        const int n = 2 + static_cast<int>(rng.uniform_index(4));
        const int c = 1 + static_cast<int>(rng.uniform_index(4));
        const int c2 = 1 + static_cast<int>(rng.uniform_index(4));
        const int k = 1 + static_cast<int>(rng.uniform_index(3));
        Rng label_rng = rng.child(0x100u + static_cast<uint64_t>(it));

        // affine
        stats.current_op = "affine";
        check_one({gaussian(n, c, rng), gaussian(c, c2, rng), gaussian(1, c2, rng)},
                  [&](Tape& t, std::vector<Value*>& in) {
                      return scalar_head(t, t.affine(in[0], in[1], in[2]), label_rng);
                  },
                  stats);

        // relu
        stats.current_op = "relu";
        check_one({spread_values(n, c, rng)},
                  [&](Tape& t, std::vector<Value*>& in) {
                      return scalar_head(t, t.relu(in[0]), label_rng);
                  },
                  stats);

        // add
        stats.current_op = "add";
        check_one({gaussian(n, c, rng), gaussian(n, c, rng)},
                  [&](Tape& t, std::vector<Value*>& in) {
                      return scalar_head(t, t.add(in[0], in[1]), label_rng);
                  },
                  stats);

        // batch norm, training statistics
        stats.current_op = "bn_train";
        {
            Matrix gamma = gaussian(1, c, rng), beta = gaussian(1, c, rng);
            for (double& g : gamma.data) g += (g >= 0 ? 1.0 : -1.0);
            check_one({gaussian(n, c, rng), gamma, beta},
                      [&](Tape& t, std::vector<Value*>& in) {
                          nn::BatchNormState state(c);
                          Value* y = t.batch_norm(in[0], in[1], in[2], state,
                                                  /*training=*/true, 0.9);
                          return scalar_head(t, y, label_rng);
                      },
                      stats);
        }

        // batch norm, eval statistics
        stats.current_op = "bn_eval";
        {
            nn::BatchNormState state(c);
            for (int j = 0; j < c; ++j) {
                state.run_mean(0, j) = rng.uniform(-1, 1);
                state.run_var(0, j) = rng.uniform(0.5, 2.0);
            }
            check_one({gaussian(n, c, rng), gaussian(1, c, rng), gaussian(1, c, rng)},
                      [&](Tape& t, std::vector<Value*>& in) {
                          Value* y = t.batch_norm(in[0], in[1], in[2], state,
                                                  /*training=*/false, 0.9);
                          return scalar_head(t, y, label_rng);
                      },
                      stats);
        }

        // dropout (fixed mask via fixed seed)
        stats.current_op = "dropout";
        check_one({gaussian(n, c, rng)},
                  [&, it](Tape& t, std::vector<Value*>& in) {
                      Rng mask_rng(static_cast<uint64_t>(it) * 31u + 7u);
                      return scalar_head(
                          t, t.dropout(in[0], 0.3, mask_rng, /*training=*/true),
                          label_rng);
                  },
                  stats);

        // edge features over a random neighbor table
        stats.current_op = "edge_features";
        {
            std::vector<int> nbr(static_cast<size_t>(n) * k);
            for (size_t e = 0; e < nbr.size(); ++e) {
                const int self = static_cast<int>(e) / k;
                int j;
                do {
                    j = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(n)));
                } while (n > 1 && j == self);
                nbr[e] = j;
            }
            check_one({spread_values(n, c, rng)},
                      [&](Tape& t, std::vector<Value*>& in) {
                          return scalar_head(t, t.edge_features(in[0], nbr, k),
                                             label_rng);
                      },
                      stats);
        }

        // block max
        stats.current_op = "block_max";
        check_one({spread_values(n * k, c, rng)},
                  [&](Tape& t, std::vector<Value*>& in) {
                      return scalar_head(t, t.block_max(in[0], k), label_rng);
                  },
                  stats);

        // segment max over uneven segments
        stats.current_op = "segment_max";
        {
            std::vector<int> offsets = {0};
            int total = 0;
            for (int b = 0; b < 2; ++b) {
                total += 1 + static_cast<int>(rng.uniform_index(3));
                offsets.push_back(total);
            }
            check_one({spread_values(total, c, rng)},
                      [&](Tape& t, std::vector<Value*>& in) {
                          return scalar_head(t, t.segment_max(in[0], offsets),
                                             label_rng);
                      },
                      stats);
        }

        // global max pool
        stats.current_op = "global_max_pool";
        check_one({spread_values(n, c, rng)},
                  [&](Tape& t, std::vector<Value*>& in) {
                      return scalar_head(t, t.global_max_pool(in[0]), label_rng);
                  },
                  stats);

        // gather with repeated indices
        stats.current_op = "gather";
        {
            std::vector<int> idx(static_cast<size_t>(n + 2));
            for (int& v : idx)
                v = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(n)));
            check_one({gaussian(n, c, rng)},
                      [&](Tape& t, std::vector<Value*>& in) {
                          return scalar_head(t, t.gather_rows(in[0], idx), label_rng);
                      },
                      stats);
        }

        // concat
        stats.current_op = "concat";
        check_one({gaussian(n, c, rng), gaussian(n, c2, rng)},
                  [&](Tape& t, std::vector<Value*>& in) {
                      return scalar_head(t, t.concat_cols(in[0], in[1]), label_rng);
                  },
                  stats);

        // softmax cross entropy as the root itself
        stats.current_op = "softmax_ce";
        {
            const int classes = 2 + static_cast<int>(rng.uniform_index(4));
            std::vector<int> labels(static_cast<size_t>(n));
            for (int& l : labels)
                l = static_cast<int>(
                    rng.uniform_index(static_cast<uint64_t>(classes)));
            check_one({gaussian(n, classes, rng)},
                      [&](Tape& t, std::vector<Value*>& in) {
                          return t.softmax_cross_entropy(in[0], labels);
                      },
                      stats);
        }

        stats.current_op = "composite";
        // composite chain: affine -> batch norm -> block max. No relu here:
        // batch norm recenters at zero, and a probe entry shifts the whole
        // normalized column, so finite differences would straddle the kink.
        // relu is covered standalone on well-separated inputs above.
        check_one({spread_values(n * k, c, rng), gaussian(c, c2, rng),
                   gaussian(1, c2, rng), gaussian(1, c2, rng), gaussian(1, c2, rng)},
                  [&](Tape& t, std::vector<Value*>& in) {
                      nn::BatchNormState state(c2);
                      Value* y = t.affine(in[0], in[1], in[2]);
                      y = t.batch_norm(y, in[3], in[4], state, true, 0.9);
                      y = t.block_max(y, k);
                      return scalar_head(t, y, label_rng);
                  },
                  stats);
    }
    return stats;
}

} // namespace gradcheck

#endif
