#ifndef CPN_NET_MODEL_HPP
#define CPN_NET_MODEL_HPP

#include <optional>
#include <vector>

#include "cpn/cpl/cpl.hpp"
#include "cpn/net/config.hpp"
#include "cpn/nn/layers.hpp"

namespace cpn::net {

using Tensor = nn::Tensor;

/// Options for one forward pass over a batch of clouds.
struct ForwardOptions {
    bool training = false;
    double bn_momentum = 0.9;
    Rng* dropout_rng = nullptr;        // required when training and dropout > 0
    uint64_t sampler_seed = 0;         // random-sampler draws derive from this
    std::vector<cpl::CriticalSelection>* explain = nullptr;  // per cloud, stage 0
};

/// CP-Net classifier: EdgeConv(3 -> w1) -> shared MLP(w1 -> bottleneck) ->
/// per-stage [down-sample -> EdgeConv(bottleneck -> bottleneck)] ->
/// global max pool -> FC head. The k-NN graph for each stage is rebuilt on
/// the retained points' 3D coordinates.
class Classifier {
public:
    explicit Classifier(const NetworkConfig& cfg);

    /// Batched forward; every cloud must have cfg.input_points rows.
    /// Returns the logits node (batch x classes).
    nn::Value* forward(nn::Tape& tape, const std::vector<const Matrix*>& clouds,
                       const ForwardOptions& opt);

    /// Selection features (post-MLP, eval mode) for a single cloud; the F_S a
    /// trained network feeds its first down-sampling stage.
    Matrix stage_features(const Matrix& cloud);

    std::vector<nn::Param*> params();
    std::vector<std::pair<std::string, Tensor*>> state_tensors();

    const NetworkConfig& config() const { return cfg_; }

private:
    NetworkConfig cfg_;
    nn::EdgeConv ec1_;
    nn::SharedMlp mlp_;
    std::vector<nn::EdgeConv> stage_convs_;
    std::vector<nn::Dense> fc_;
    std::vector<nn::BatchNorm> fc_bns_;
    nn::Dense fc_out_;
};

/// Generic CP-Net cascade stage (Fig-2 style): convolution then down-sample,
/// optionally concatenating the gathered input features of the stage onto its
/// output (same retained points).
struct CascadeStage {
    int conv_width = 64;
    int ratio = 2;
    bool concat_input = false;
};

/// Alternating EdgeConv / CPL feature extractor. Returns per-point features
/// for the final retained points.
class Cascade {
public:
    Cascade(int input_points, int knn_k, Sampler sampler,
            const std::vector<CascadeStage>& stages, uint64_t seed);

    nn::Value* forward(nn::Tape& tape, const Matrix& cloud,
                       const ForwardOptions& opt);

    int output_points() const;
    int output_width() const;

    std::vector<nn::Param*> params();

private:
    int input_points_;
    int knn_k_;
    Sampler sampler_;
    std::vector<CascadeStage> stages_;
    std::vector<nn::EdgeConv> convs_;
};

} // namespace cpn::net

#endif
