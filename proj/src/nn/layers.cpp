#include "cpn/nn/layers.hpp"

#include <cmath>

namespace cpn::nn {

Tensor init_uniform(int rows, int cols, int fan_in, Rng& rng) {
    Tensor t(rows, cols);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : t.data) v = rng.uniform(-bound, bound);
    return t;
}

Dense::Dense(const std::string& name, int in_dim, int out_dim, Rng& rng)
    : w(name + ".w", init_uniform(in_dim, out_dim, in_dim, rng)),
      b(name + ".b", Tensor(1, out_dim)) {}

Value* Dense::forward(Tape& tape, Value* x) {
    return tape.affine(x, w.push(tape), b.push(tape));
}

void Dense::collect(std::vector<Param*>& out) {
    out.push_back(&w);
    out.push_back(&b);
}

BatchNorm::BatchNorm(const std::string& name, int dim)
    : gamma(name + ".gamma", Tensor(1, dim)), beta(name + ".beta", Tensor(1, dim)),
      state(dim) {
    for (int j = 0; j < dim; ++j) gamma.value(0, j) = 1.0;
}

Value* BatchNorm::forward(Tape& tape, Value* x, bool training, double momentum) {
    return tape.batch_norm(x, gamma.push(tape), beta.push(tape), state, training,
                           momentum);
}

void BatchNorm::collect(std::vector<Param*>& out) {
    out.push_back(&gamma);
    out.push_back(&beta);
}

std::vector<std::pair<std::string, Tensor*>> BatchNorm::state_tensors() {
    return {{gamma.name + ".run_mean", &state.run_mean},
            {gamma.name + ".run_var", &state.run_var}};
}

EdgeConv::EdgeConv(const std::string& name, int in_dim, int out_dim, Rng& rng)
    : lin(name + ".lin", 3 * in_dim, out_dim, rng), bn(name + ".bn", out_dim) {}

Value* EdgeConv::forward(Tape& tape, Value* x, const KnnGraph& graph, bool training,
                         double momentum) {
    Value* e = tape.edge_features(x, graph.neighbors, graph.k);
    Value* h = lin.forward(tape, e);
    h = bn.forward(tape, h, training, momentum);
    h = tape.relu(h);
    return tape.block_max(h, graph.k);
}

void EdgeConv::collect(std::vector<Param*>& out) {
    lin.collect(out);
    bn.collect(out);
}

SharedMlp::SharedMlp(const std::string& name, int in_dim, const std::vector<int>& dims,
                     Rng& rng) {
    int cur = in_dim;
    for (size_t i = 0; i < dims.size(); ++i) {
        const std::string block = name + "." + std::to_string(i);
        blocks.emplace_back(block, cur, dims[i], rng);
        norms.emplace_back(block + ".bn", dims[i]);
        cur = dims[i];
    }
}

Value* SharedMlp::forward(Tape& tape, Value* x, bool training, double momentum) {
    for (size_t i = 0; i < blocks.size(); ++i) {
        x = blocks[i].forward(tape, x);
        x = norms[i].forward(tape, x, training, momentum);
        x = tape.relu(x);
    }
    return x;
}

void SharedMlp::collect(std::vector<Param*>& out) {
    for (size_t i = 0; i < blocks.size(); ++i) {
        blocks[i].collect(out);
        norms[i].collect(out);
    }
}

void adam_step(Tensor& p, const Tensor& g, Tensor& m, Tensor& v, long long t,
               double lr, double beta1, double beta2, double eps) {
    if (!p.same_shape(g) || !p.same_shape(m) || !p.same_shape(v))
        throw ShapeMismatch("adam_step: tensor shapes differ");
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (size_t i = 0; i < p.data.size(); ++i) {
        m.data[i] = beta1 * m.data[i] + (1.0 - beta1) * g.data[i];
        v.data[i] = beta2 * v.data[i] + (1.0 - beta2) * g.data[i] * g.data[i];
        const double mh = m.data[i] / bc1;
        const double vh = v.data[i] / bc2;
        p.data[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
}

double Adam::current_lr() const {
    return lr0_ * std::pow(decay_rate_,
                           static_cast<double>(t_) / static_cast<double>(decay_steps_));
}

void Adam::step(const std::vector<Param*>& params) {
    ++t_;
    const double lr = current_lr();
    for (Param* p : params)
        adam_step(p->value, p->grad(), p->m, p->v, t_, lr);
}

} // namespace cpn::nn
