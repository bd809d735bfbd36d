#include "cpn/net/shapes.hpp"

#include <cmath>
#include <numbers>

#include "cpn/core/rng.hpp"
#include "cpn/io/sample.hpp"

namespace cpn::net {
namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

void sample_sphere(Rng& rng, double* p) {
    // uniform direction via normalized Gaussian
    double x, y, z, n2;
    do {
        x = rng.normal();
        y = rng.normal();
        z = rng.normal();
        n2 = x * x + y * y + z * z;
    } while (n2 < 1e-12);
    const double inv = 1.0 / std::sqrt(n2);
    p[0] = x * inv;
    p[1] = y * inv;
    p[2] = z * inv;
}

void sample_cube(Rng& rng, double* p) {
    const auto face = static_cast<int>(rng.uniform_index(6));
    const double u = rng.uniform(-1.0, 1.0);
    const double v = rng.uniform(-1.0, 1.0);
    const double s = face % 2 == 0 ? 1.0 : -1.0;
    switch (face / 2) {
        case 0: p[0] = s; p[1] = u; p[2] = v; break;
        case 1: p[0] = u; p[1] = s; p[2] = v; break;
        default: p[0] = u; p[1] = v; p[2] = s; break;
    }
}

void sample_cylinder(Rng& rng, double* p) {
    // radius 0.6, half-height 1; lateral surface and caps area-weighted
    const double r = 0.6, h = 2.0;
    const double lateral = kTau * r * h;
    const double caps = 2.0 * std::numbers::pi * r * r;
    if (rng.uniform() * (lateral + caps) < lateral) {
        const double a = rng.uniform(0.0, kTau);
        p[0] = r * std::cos(a);
        p[1] = rng.uniform(-1.0, 1.0);
        p[2] = r * std::sin(a);
    } else {
        const double a = rng.uniform(0.0, kTau);
        const double rr = r * std::sqrt(rng.uniform());
        p[0] = rr * std::cos(a);
        p[1] = rng.uniform() < 0.5 ? 1.0 : -1.0;
        p[2] = rr * std::sin(a);
    }
}

void sample_torus(Rng& rng, double* p) {
    // major radius 0.7, minor 0.3; rejection keeps surface density uniform
    const double big_r = 0.7, small_r = 0.3;
    double theta;
    for (;;) {
        theta = rng.uniform(0.0, kTau);
        const double density = (big_r + small_r * std::cos(theta)) / (big_r + small_r);
        if (rng.uniform() < density) break;
    }
    const double phi = rng.uniform(0.0, kTau);
    const double ring = big_r + small_r * std::cos(theta);
    p[0] = ring * std::cos(phi);
    p[1] = small_r * std::sin(theta);
    p[2] = ring * std::sin(phi);
}

} // namespace

std::vector<LabeledCloud> gen_shapes(const ShapeDatasetSpec& spec) {
    std::vector<LabeledCloud> out;
    out.reserve(static_cast<size_t>(spec.class_names.size()) * spec.clouds_per_class);
    const int classes = static_cast<int>(spec.class_names.size());
    for (int label = 0; label < classes; ++label) {
        for (int c = 0; c < spec.clouds_per_class; ++c) {
            Rng rng = Rng(spec.seed).child(
                static_cast<uint64_t>(label) * 1'000'003 + static_cast<uint64_t>(c));
            LabeledCloud lc;
            lc.label = label;
            lc.cloud.label = label;
            lc.cloud.points = Matrix(spec.points_per_cloud, 3);
            for (int i = 0; i < spec.points_per_cloud; ++i) {
                double p[3];
                switch (label % 4) {
                    case 0: sample_sphere(rng, p); break;
                    case 1: sample_cube(rng, p); break;
                    case 2: sample_cylinder(rng, p); break;
                    default: sample_torus(rng, p); break;
                }
                for (int d = 0; d < 3; ++d)
                    lc.cloud.points(i, d) = p[d] + spec.noise_sigma * rng.normal();
            }
            lc.cloud = io::normalize_unit_sphere(lc.cloud);
            out.push_back(std::move(lc));
        }
    }
    // interleave classes so mini-batches stay mixed even without shuffling
    std::vector<LabeledCloud> mixed;
    mixed.reserve(out.size());
    for (int c = 0; c < spec.clouds_per_class; ++c)
        for (int label = 0; label < classes; ++label)
            mixed.push_back(std::move(out[static_cast<size_t>(label) * spec.clouds_per_class + c]));
    return mixed;
}

Dataset make_splits(int train_clouds, int test_clouds, int points_per_cloud,
                    double noise_sigma, uint64_t seed) {
    ShapeDatasetSpec spec;
    spec.points_per_cloud = points_per_cloud;
    spec.noise_sigma = noise_sigma;
    const int classes = static_cast<int>(spec.class_names.size());
    if (train_clouds % classes != 0 || test_clouds % classes != 0)
        throw ValidationError("split sizes must be divisible by the class count");

    Dataset ds;
    ds.classes = classes;
    spec.clouds_per_class = train_clouds / classes;
    spec.seed = Rng(seed).child(1).next_u64();
    ds.train = gen_shapes(spec);
    spec.clouds_per_class = test_clouds / classes;
    spec.seed = Rng(seed).child(2).next_u64();
    ds.test = gen_shapes(spec);
    return ds;
}

} // namespace cpn::net
