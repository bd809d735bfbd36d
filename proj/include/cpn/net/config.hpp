#ifndef CPN_NET_CONFIG_HPP
#define CPN_NET_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cpn/core/errors.hpp"

namespace cpn::net {

class ConfigInvalid : public ValidationError {
public:
    using ValidationError::ValidationError;
};

enum class Sampler { CPL, WCPL, Random, FPS, None };

std::string to_string(Sampler s);
Sampler sampler_from_string(const std::string& s);

/// Declarative network shape plus optimizer settings. Serialized as flat
/// key=value lines (one per field; '#' comments allowed).
struct NetworkConfig {
    int input_points = 256;
    int knn_k = 10;
    int edgeconv1_width = 128;
    int bottleneck = 1024;
    Sampler sampler = Sampler::CPL;
    std::vector<int> ratios = {4};     // down-sampling denominators per stage
    std::vector<int> fc_dims = {512, 256};
    int classes = 4;
    double dropout = 0.5;
    uint64_t seed = 1;

    // training
    int epochs = 30;
    int batch_size = 16;
    double lr = 1e-3;
    double lr_decay_rate = 0.5;
    long long lr_decay_steps = 0;      // 0: half of the total step count
    double bn_momentum = 0.9;
    double bn_momentum_final = 0.9;    // ramp target; equal = fixed momentum
    bool augment = false;

    // synthetic dataset
    int train_clouds = 512;
    int test_clouds = 128;
    double noise_sigma = 0.02;
    uint64_t dataset_seed = 7;

    /// Point count after stage j (0-based); input_points / (k_0 ... k_j).
    int points_after_stage(size_t stage) const;
    int output_points() const { return points_after_stage(ratios.size() - 1); }

    /// Throws ConfigInvalid on non-integer ratio chains, classes < 2, etc.
    void validate() const;

    std::string serialize() const;
    static NetworkConfig parse(const std::string& text);
    static NetworkConfig load(const std::string& path);
};

/// Ablation grid: cross product of samplers, ratios, bottlenecks and seeds
/// over a base config.
struct AblateGrid {
    NetworkConfig base;
    std::vector<Sampler> samplers = {Sampler::CPL};
    std::vector<int> ratios = {4};
    std::vector<int> bottlenecks = {256};
    std::vector<uint64_t> seeds = {1};

    static AblateGrid load(const std::string& path);
};

} // namespace cpn::net

#endif
