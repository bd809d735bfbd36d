#ifndef CPN_NET_SHAPES_HPP
#define CPN_NET_SHAPES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cpn/io/types.hpp"

namespace cpn::net {

/// Synthetic 4-class shape dataset: sphere, cube, cylinder, torus surfaces
/// with Gaussian noise, normalized to the unit sphere.
struct ShapeDatasetSpec {
    std::vector<std::string> class_names = {"sphere", "cube", "cylinder", "torus"};
    int clouds_per_class = 128;
    int points_per_cloud = 256;
    double noise_sigma = 0.02;
    uint64_t seed = 7;
};

struct LabeledCloud {
    io::PointCloud cloud;
    int label = 0;
};

/// Deterministic per (spec.seed); class counts exactly balanced.
std::vector<LabeledCloud> gen_shapes(const ShapeDatasetSpec& spec);

/// Convenience: train/test splits with disjoint derived seeds.
struct Dataset {
    std::vector<LabeledCloud> train;
    std::vector<LabeledCloud> test;
    int classes = 4;
};

Dataset make_splits(int train_clouds, int test_clouds, int points_per_cloud,
                    double noise_sigma, uint64_t seed);

} // namespace cpn::net

#endif
