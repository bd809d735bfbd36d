#include "cpn/net/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "cpn/io/sample.hpp"

namespace cpn::net {
namespace {

std::vector<const Matrix*> batch_ptrs(const std::vector<LabeledCloud>& clouds,
                                      const std::vector<int>& order, size_t lo,
                                      size_t hi) {
    std::vector<const Matrix*> out;
    out.reserve(hi - lo);
    for (size_t i = lo; i < hi; ++i)
        out.push_back(&clouds[static_cast<size_t>(order[i])].cloud.points);
    return out;
}

} // namespace

nn::Adam make_optimizer(const NetworkConfig& cfg, size_t train_size) {
    long long decay_steps = cfg.lr_decay_steps;
    if (decay_steps <= 0) {
        // default: half of the planned step count
        const long long steps_per_epoch =
            (static_cast<long long>(train_size) + cfg.batch_size - 1) / cfg.batch_size;
        decay_steps = std::max<long long>(1, steps_per_epoch * cfg.epochs / 2);
    }
    return nn::Adam(cfg.lr, decay_steps, cfg.lr_decay_rate);
}

Tensor eval_logits(Classifier& model, const std::vector<const Matrix*>& clouds,
                   uint64_t sampler_seed) {
    nn::Tape tape;
    ForwardOptions opt;
    opt.training = false;
    opt.sampler_seed = sampler_seed;
    return model.forward(tape, clouds, opt)->val;
}

std::vector<int> predict(Classifier& model, const std::vector<LabeledCloud>& clouds,
                         uint64_t sampler_seed) {
    std::vector<int> labels;
    labels.reserve(clouds.size());
    const size_t bsz = static_cast<size_t>(model.config().batch_size);
    for (size_t lo = 0; lo < clouds.size(); lo += bsz) {
        const size_t hi = std::min(clouds.size(), lo + bsz);
        std::vector<const Matrix*> batch;
        for (size_t i = lo; i < hi; ++i) batch.push_back(&clouds[i].cloud.points);
        const Tensor logits = eval_logits(model, batch, sampler_seed);
        for (int r = 0; r < logits.rows; ++r) {
            int best = 0;
            for (int c = 1; c < logits.cols; ++c)
                if (logits(r, c) > logits(r, best)) best = c;
            labels.push_back(best);
        }
    }
    return labels;
}

EvalResult evaluate(Classifier& model, const std::vector<LabeledCloud>& clouds,
                    int classes, uint64_t sampler_seed) {
    const std::vector<int> pred = predict(model, clouds, sampler_seed);
    EvalResult res;
    res.confusion.assign(static_cast<size_t>(classes),
                         std::vector<int>(static_cast<size_t>(classes), 0));
    int correct = 0;
    for (size_t i = 0; i < clouds.size(); ++i) {
        const int t = clouds[i].label, p = pred[i];
        res.confusion[static_cast<size_t>(t)][static_cast<size_t>(p)] += 1;
        if (t == p) ++correct;
    }
    res.overall_acc = static_cast<double>(correct) / static_cast<double>(clouds.size());
    double recall_sum = 0.0;
    int seen_classes = 0;
    for (int c = 0; c < classes; ++c) {
        const int total = std::accumulate(res.confusion[static_cast<size_t>(c)].begin(),
                                          res.confusion[static_cast<size_t>(c)].end(), 0);
        if (total > 0) {
            recall_sum += static_cast<double>(res.confusion[static_cast<size_t>(c)]
                                                           [static_cast<size_t>(c)]) /
                          total;
            ++seen_classes;
        }
    }
    res.mean_class_acc = seen_classes > 0 ? recall_sum / seen_classes : 0.0;
    return res;
}

std::vector<EpochMetrics> train(Classifier& model, nn::Adam& opt, const Dataset& ds,
                                int* epoch_counter) {
    const NetworkConfig& cfg = model.config();
    const std::vector<nn::Param*> params = model.params();
    std::vector<EpochMetrics> log;

    const int total_epochs = cfg.epochs;
    std::vector<int> order(ds.train.size());
    std::iota(order.begin(), order.end(), 0);

    const int start_epoch = epoch_counter ? *epoch_counter : 0;
    for (int epoch = start_epoch; epoch < start_epoch + total_epochs; ++epoch) {
        // seeded shuffle, decoupled from every other stream
        Rng shuffle_rng = Rng(cfg.seed).child(0x5u + static_cast<uint64_t>(epoch));
        for (size_t i = order.size(); i > 1; --i) {
            const size_t j = shuffle_rng.uniform_index(i);
            std::swap(order[i - 1], order[j]);
        }

        const double ramp =
            total_epochs > 1
                ? static_cast<double>(epoch - start_epoch) / (total_epochs - 1)
                : 0.0;
        const double momentum =
            cfg.bn_momentum + ramp * (cfg.bn_momentum_final - cfg.bn_momentum);

        double loss_sum = 0.0;
        long long batches = 0;
        for (size_t lo = 0; lo < ds.train.size(); lo += static_cast<size_t>(cfg.batch_size)) {
            const size_t hi =
                std::min(ds.train.size(), lo + static_cast<size_t>(cfg.batch_size));
            std::vector<const Matrix*> batch = batch_ptrs(ds.train, order, lo, hi);
            std::vector<int> labels;
            for (size_t i = lo; i < hi; ++i)
                labels.push_back(ds.train[static_cast<size_t>(order[i])].label);

            std::vector<Matrix> augmented;
            if (cfg.augment) {
                augmented.reserve(batch.size());
                Rng aug_rng = Rng(cfg.seed).child(
                    0xA06u + static_cast<uint64_t>(opt.t()));
                for (const Matrix* m : batch) {
                    io::PointCloud pc;
                    pc.points = *m;
                    augmented.push_back(
                        io::augment(pc, io::AugmentConfig{}, aug_rng.next_u64())
                            .points);
                }
                for (size_t i = 0; i < batch.size(); ++i) batch[i] = &augmented[i];
            }

            nn::Tape tape;
            Rng drop_rng = Rng(cfg.seed).child(0xD0u + static_cast<uint64_t>(opt.t()));
            ForwardOptions fwd;
            fwd.training = true;
            fwd.bn_momentum = momentum;
            fwd.dropout_rng = &drop_rng;
            fwd.sampler_seed = Rng(cfg.seed)
                                   .child(0x7A0du + static_cast<uint64_t>(opt.t()))
                                   .next_u64();
            nn::Value* logits = model.forward(tape, batch, fwd);
            nn::Value* loss = tape.softmax_cross_entropy(logits, labels);
            const double loss_val = loss->val(0, 0);
            if (!std::isfinite(loss_val))
                throw Error("training diverged: non-finite loss at epoch " +
                            std::to_string(epoch) + ", step " +
                            std::to_string(opt.t()) + " (lr " +
                            std::to_string(opt.current_lr()) + ")");
            loss_sum += loss_val;
            ++batches;
            tape.backward(loss);
            opt.step(params);
        }

        const EvalResult ev = evaluate(model, ds.test, ds.classes);
        log.push_back({epoch, loss_sum / static_cast<double>(batches), ev.overall_acc,
                       ev.mean_class_acc});
        if (epoch_counter) *epoch_counter = epoch + 1;
    }
    return log;
}

std::string metrics_csv(const std::vector<EpochMetrics>& log) {
    std::string out = "epoch,loss,overall_acc,mean_class_acc\n";
    char buf[160];
    for (const EpochMetrics& m : log) {
        std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f\n", m.epoch, m.loss,
                      m.overall_acc, m.mean_class_acc);
        out += buf;
    }
    return out;
}

std::string ablate(const AblateGrid& grid) {
    std::string csv =
        "sampler,ratio,bottleneck,seed,overall_acc,mean_class_acc,rerun_overall_acc\n";
    char buf[200];
    for (Sampler sampler : grid.samplers) {
        for (int ratio : grid.ratios) {
            for (int bottleneck : grid.bottlenecks) {
                for (uint64_t seed : grid.seeds) {
                    NetworkConfig cfg = grid.base;
                    cfg.sampler = sampler;
                    cfg.ratios = {ratio};
                    cfg.bottleneck = bottleneck;
                    cfg.seed = seed;
                    cfg.validate();

                    const Dataset ds =
                        make_splits(cfg.train_clouds, cfg.test_clouds,
                                    cfg.input_points, cfg.noise_sigma,
                                    cfg.dataset_seed);
                    Classifier model(cfg);
                    nn::Adam opt = make_optimizer(cfg, ds.train.size());
                    train(model, opt, ds);
                    const EvalResult ev = evaluate(model, ds.test, ds.classes, 1);
                    const EvalResult rerun = evaluate(model, ds.test, ds.classes, 2);
                    std::snprintf(buf, sizeof buf, "%s,%d,%d,%llu,%.6f,%.6f,%.6f\n",
                                  to_string(sampler).c_str(), ratio, bottleneck,
                                  static_cast<unsigned long long>(seed),
                                  ev.overall_acc, ev.mean_class_acc,
                                  rerun.overall_acc);
                    csv += buf;
                }
            }
        }
    }
    return csv;
}

} // namespace cpn::net
