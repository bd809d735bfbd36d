#ifndef CPN_NN_LAYERS_HPP
#define CPN_NN_LAYERS_HPP

#include <string>
#include <vector>

#include "cpn/nn/knn.hpp"
#include "cpn/nn/tape.hpp"

namespace cpn::nn {

/// Trainable tensor plus its Adam moment accumulators. `node` is the leaf
/// created for the current tape and is where gradients land after backward.
struct Param {
    std::string name;
    Tensor value;
    Tensor m, v;  // Adam first/second moments
    Value* node = nullptr;

    Param() = default;
    Param(std::string n, Tensor t)
        : name(std::move(n)), value(std::move(t)),
          m(value.rows, value.cols), v(value.rows, value.cols) {}

    Value* push(Tape& tape) { return node = tape.leaf(value); }
    const Tensor& grad() const { return node->grad; }
};

/// Fan-in scaled uniform init: U(-sqrt(1/fan_in), sqrt(1/fan_in)).
Tensor init_uniform(int rows, int cols, int fan_in, Rng& rng);

/// Affine map, optionally followed by batch norm and ReLU.
class Dense {
public:
    Dense() = default;
    Dense(const std::string& name, int in_dim, int out_dim, Rng& rng);

    Value* forward(Tape& tape, Value* x);

    void collect(std::vector<Param*>& out);

    Param w, b;
};

/// Batch norm with learnable scale/shift and running statistics.
class BatchNorm {
public:
    BatchNorm() = default;
    BatchNorm(const std::string& name, int dim);

    Value* forward(Tape& tape, Value* x, bool training, double momentum);

    void collect(std::vector<Param*>& out);
    std::vector<std::pair<std::string, Tensor*>> state_tensors();

    Param gamma, beta;
    BatchNormState state;
};

/// Triple-kernel edge convolution: per edge (i, j) the feature
/// [x_i, x_j - x_i, (x_j - x_i)^2] goes through affine -> BN -> ReLU, then
/// each point takes the max over its k edges.
class EdgeConv {
public:
    EdgeConv() = default;
    EdgeConv(const std::string& name, int in_dim, int out_dim, Rng& rng);

    Value* forward(Tape& tape, Value* x, const KnnGraph& graph, bool training,
                   double momentum);

    void collect(std::vector<Param*>& out);

    Dense lin;
    BatchNorm bn;
};

/// Per-point MLP: a chain of Dense -> BN -> ReLU blocks.
class SharedMlp {
public:
    SharedMlp() = default;
    SharedMlp(const std::string& name, int in_dim, const std::vector<int>& dims,
              Rng& rng);

    Value* forward(Tape& tape, Value* x, bool training, double momentum);

    void collect(std::vector<Param*>& out);

    std::vector<Dense> blocks;
    std::vector<BatchNorm> norms;
};

/// One Adam update on a single tensor; t is the 1-based step count.
void adam_step(Tensor& p, const Tensor& g, Tensor& m, Tensor& v, long long t,
               double lr, double beta1 = 0.9, double beta2 = 0.999,
               double eps = 1e-8);

/// Adam over a parameter set with continuous exponential lr decay:
/// lr(t) = lr0 * decay_rate^(t / decay_steps).
class Adam {
public:
    Adam() = default;
    Adam(double lr0, long long decay_steps, double decay_rate = 0.5)
        : lr0_(lr0), decay_steps_(decay_steps), decay_rate_(decay_rate) {}

    void step(const std::vector<Param*>& params);

    double current_lr() const;
    long long t() const { return t_; }
    void set_t(long long t) { t_ = t; }

private:
    double lr0_ = 1e-3;
    long long decay_steps_ = 1;
    double decay_rate_ = 0.5;
    long long t_ = 0;
};

} // namespace cpn::nn

#endif
