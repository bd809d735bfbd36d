#ifndef CPN_NN_TAPE_HPP
#define CPN_NN_TAPE_HPP

#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "cpn/core/errors.hpp"
#include "cpn/core/matrix.hpp"
#include "cpn/core/rng.hpp"

namespace cpn::nn {

using Tensor = Matrix;

class ShapeMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Node in the reverse-mode graph. val is the forward result; grad is the
/// same-shape adjoint, accumulated additively by consumers.
struct Value {
    Tensor val;
    Tensor grad;
    std::function<void(const Value&)> back;  // pushes grad into parents
};

/// Per-layer batch-norm running statistics (eval-mode normalizers).
struct BatchNormState {
    Tensor run_mean;  // 1 x c
    Tensor run_var;   // 1 x c

    explicit BatchNormState(int c = 0) : run_mean(1, c), run_var(1, c) {
        for (int i = 0; i < c; ++i) run_var(0, i) = 1.0;
    }
};

/// Records forward operations in creation order (a valid topological order)
/// and replays adjoints in reverse. Single-threaded by contract; distinct
/// tapes may run concurrently.
class Tape {
public:
    Value* leaf(const Tensor& t);

    /// x (n x c) * W (c x c') + broadcast bias b (1 x c').
    Value* affine(Value* x, Value* w, Value* b);

    Value* relu(Value* x);

    Value* add(Value* a, Value* b);

    /// Column-axis feature normalization over all rows. Training mode uses
    /// batch statistics and updates `state` with `momentum`; eval mode uses
    /// the stored running statistics. gamma/beta are 1 x c.
    Value* batch_norm(Value* x, Value* gamma, Value* beta, BatchNormState& state,
                      bool training, double momentum);

    /// Inverted dropout: zeros entries with probability p and scales the
    /// survivors by 1/(1-p) in training mode; identity in eval mode.
    Value* dropout(Value* x, double p, Rng& rng, bool training);

    /// Triple-kernel edge features. neighbors is row-major n x k; edge
    /// e = i*k + j yields [x_i, x_nbr - x_i, (x_nbr - x_i)^2], shape E x 3c.
    Value* edge_features(Value* x, const std::vector<int>& neighbors, int k);

    /// Per-column max over fixed-size row blocks (n*k rows -> n rows).
    /// Gradient routes to the argmax row only, smallest index on ties.
    Value* block_max(Value* x, int k);

    /// Per-column max over row segments given by offsets (size B+1) -> B rows.
    Value* segment_max(Value* x, const std::vector<int>& offsets);

    /// Whole-matrix column max (n x d -> 1 x d).
    Value* global_max_pool(Value* x);

    /// out row i = x row indices[i]; backward scatter-adds, so repeated
    /// indices accumulate their gradients.
    Value* gather_rows(Value* x, std::vector<int> indices);

    /// Column-wise concatenation.
    Value* concat_cols(Value* a, Value* b);

    /// Mean over the batch of -log softmax(logits)[label]; 1 x 1 output.
    /// Stabilized by row-max subtraction.
    Value* softmax_cross_entropy(Value* logits, const std::vector<int>& labels);

    /// Seeds the root with unit gradient and propagates to all parents.
    void backward(Value* root);

    size_t node_count() const { return nodes_.size(); }

private:
    Value* make(Tensor&& val);
    std::deque<Value> nodes_;
};

/// Row-wise softmax of a plain tensor (prediction readout).
Tensor softmax_rows(const Tensor& logits);

} // namespace cpn::nn

#endif
