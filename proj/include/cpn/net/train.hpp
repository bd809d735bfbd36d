#ifndef CPN_NET_TRAIN_HPP
#define CPN_NET_TRAIN_HPP

#include <string>
#include <vector>

#include "cpn/net/model.hpp"
#include "cpn/net/shapes.hpp"

namespace cpn::net {

struct EpochMetrics {
    int epoch = 0;
    double loss = 0.0;
    double overall_acc = 0.0;
    double mean_class_acc = 0.0;
};

struct EvalResult {
    double overall_acc = 0.0;
    double mean_class_acc = 0.0;
    std::vector<std::vector<int>> confusion;  // [true][predicted]
};

/// Adam configured from the config; a zero decay interval defaults to half
/// of the planned total step count.
nn::Adam make_optimizer(const NetworkConfig& cfg, size_t train_size);

/// Per-cloud predicted labels, eval mode. sampler_seed only matters for the
/// random baseline sampler.
std::vector<int> predict(Classifier& model, const std::vector<LabeledCloud>& clouds,
                         uint64_t sampler_seed = 0);

/// Logits for a batch of clouds, eval mode.
Tensor eval_logits(Classifier& model, const std::vector<const Matrix*>& clouds,
                   uint64_t sampler_seed = 0);

EvalResult evaluate(Classifier& model, const std::vector<LabeledCloud>& clouds,
                    int classes, uint64_t sampler_seed = 0);

/// Deterministic training loop: seeded shuffling, dropout and sampler draws
/// all derive from the config seed. Appends one row per epoch (test metrics).
/// Throws Error if the loss turns non-finite.
std::vector<EpochMetrics> train(Classifier& model, nn::Adam& opt, const Dataset& ds,
                                int* epoch_counter = nullptr);

/// "epoch,loss,overall_acc,mean_class_acc" CSV.
std::string metrics_csv(const std::vector<EpochMetrics>& log);

/// Runs the grid and returns a CSV report, one row per cell:
/// sampler,ratio,bottleneck,seed,overall_acc,mean_class_acc,rerun_overall_acc
/// where the rerun re-evaluates with a different sampler seed.
std::string ablate(const AblateGrid& grid);

} // namespace cpn::net

#endif
