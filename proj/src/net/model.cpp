#include "cpn/net/model.hpp"

#include <cmath>

#include "cpn/nn/knn.hpp"

namespace cpn::net {
namespace {

/// Per-cloud k-NN graphs merged into one block-diagonal neighbor table.
nn::KnnGraph batched_knn(const Matrix& coords, int clouds, int points_per_cloud,
                         int k) {
    nn::KnnGraph merged;
    merged.n = coords.rows;
    merged.k = k;
    merged.neighbors.resize(static_cast<size_t>(coords.rows) * k);
    for (int b = 0; b < clouds; ++b) {
        Matrix segment(points_per_cloud, 3);
        std::copy(coords.data.begin() + static_cast<size_t>(b) * points_per_cloud * 3,
                  coords.data.begin() + static_cast<size_t>(b + 1) * points_per_cloud * 3,
                  segment.data.begin());
        const nn::KnnGraph g = nn::knn_build(segment, k);
        const int base = b * points_per_cloud;
        for (size_t e = 0; e < g.neighbors.size(); ++e)
            merged.neighbors[static_cast<size_t>(base) * k + e] = g.neighbors[e] + base;
    }
    return merged;
}

std::vector<int> segment_offsets(int clouds, int points_per_cloud) {
    std::vector<int> offsets(static_cast<size_t>(clouds) + 1);
    for (int b = 0; b <= clouds; ++b)
        offsets[static_cast<size_t>(b)] = b * points_per_cloud;
    return offsets;
}

} // namespace

Classifier::Classifier(const NetworkConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    Rng rng = Rng(cfg_.seed).child(0xC0DE);
    ec1_ = nn::EdgeConv("ec1", 3, cfg_.edgeconv1_width, rng);
    mlp_ = nn::SharedMlp("mlp", cfg_.edgeconv1_width, {cfg_.bottleneck}, rng);
    for (size_t j = 0; j < cfg_.ratios.size(); ++j)
        stage_convs_.emplace_back("stage" + std::to_string(j) + ".ec",
                                  cfg_.bottleneck, cfg_.bottleneck, rng);
    int cur = cfg_.bottleneck;
    for (size_t i = 0; i < cfg_.fc_dims.size(); ++i) {
        const std::string name = "fc" + std::to_string(i);
        fc_.emplace_back(name, cur, cfg_.fc_dims[i], rng);
        fc_bns_.emplace_back(name + ".bn", cfg_.fc_dims[i]);
        cur = cfg_.fc_dims[i];
    }
    fc_out_ = nn::Dense("fc_out", cur, cfg_.classes, rng);
}

nn::Value* Classifier::forward(nn::Tape& tape, const std::vector<const Matrix*>& clouds,
                               const ForwardOptions& opt) {
    const int bsz = static_cast<int>(clouds.size());
    const int n = cfg_.input_points;
    if (bsz < 1)
        throw ValidationError("forward: empty batch");
    for (const Matrix* c : clouds)
        if (c->rows != n || c->cols != 3)
            throw nn::ShapeMismatch("forward: every cloud must be input_points x 3");

    Matrix coords(bsz * n, 3);
    for (int b = 0; b < bsz; ++b)
        std::copy(clouds[static_cast<size_t>(b)]->data.begin(),
                  clouds[static_cast<size_t>(b)]->data.end(),
                  coords.data.begin() + static_cast<size_t>(b) * n * 3);

    const nn::KnnGraph g0 = batched_knn(coords, bsz, n, cfg_.knn_k);
    nn::Value* x = tape.leaf(coords);
    nn::Value* h = ec1_.forward(tape, x, g0, opt.training, opt.bn_momentum);
    h = mlp_.forward(tape, h, opt.training, opt.bn_momentum);

    int cur_pts = n;
    for (size_t stage = 0; stage < cfg_.ratios.size(); ++stage) {
        const int k_out = cur_pts / cfg_.ratios[stage];
        if (cfg_.sampler != Sampler::None) {
            std::vector<int> gathered;
            gathered.reserve(static_cast<size_t>(bsz) * k_out);
            for (int b = 0; b < bsz; ++b) {
                const int base = b * cur_pts;
                std::vector<int> local;
                switch (cfg_.sampler) {
                    case Sampler::CPL:
                    case Sampler::WCPL: {
                        Matrix f_sel(cur_pts, h->val.cols);
                        std::copy(h->val.data.begin() +
                                      static_cast<size_t>(base) * h->val.cols,
                                  h->val.data.begin() +
                                      static_cast<size_t>(base + cur_pts) * h->val.cols,
                                  f_sel.data.begin());
                        cpl::CriticalSelection sel = cpl::cpl_select(
                            f_sel, k_out,
                            cfg_.sampler == Sampler::CPL ? cpl::Mode::CPL
                                                         : cpl::Mode::WCPL);
                        local = sel.resized;
                        if (opt.explain && stage == 0)
                            opt.explain->push_back(std::move(sel));
                        break;
                    }
                    case Sampler::Random: {
                        const uint64_t s = Rng(opt.sampler_seed)
                                               .child(stage * 65536 +
                                                      static_cast<uint64_t>(b))
                                               .next_u64();
                        local = cpl::downsample_random(cur_pts, k_out, s);
                        break;
                    }
                    case Sampler::FPS: {
                        Matrix seg(cur_pts, 3);
                        std::copy(coords.data.begin() + static_cast<size_t>(base) * 3,
                                  coords.data.begin() +
                                      static_cast<size_t>(base + cur_pts) * 3,
                                  seg.data.begin());
                        local = cpl::downsample_fps(seg, k_out);
                        break;
                    }
                    case Sampler::None:
                        break;
                }
                for (int idx : local) gathered.push_back(base + idx);
            }
            h = tape.gather_rows(h, gathered);
            Matrix new_coords(bsz * k_out, 3);
            for (size_t i = 0; i < gathered.size(); ++i)
                for (int d = 0; d < 3; ++d)
                    new_coords(static_cast<int>(i), d) = coords(gathered[i], d);
            coords = std::move(new_coords);
            cur_pts = k_out;
        }
        const nn::KnnGraph g = batched_knn(coords, bsz, cur_pts, cfg_.knn_k);
        h = stage_convs_[stage].forward(tape, h, g, opt.training, opt.bn_momentum);
    }

    nn::Value* pooled = tape.segment_max(h, segment_offsets(bsz, cur_pts));

    nn::Value* v = pooled;
    Rng fallback_rng(0);
    Rng* drop_rng = opt.dropout_rng ? opt.dropout_rng : &fallback_rng;
    for (size_t i = 0; i < fc_.size(); ++i) {
        v = fc_[i].forward(tape, v);
        v = fc_bns_[i].forward(tape, v, opt.training, opt.bn_momentum);
        v = tape.relu(v);
        v = tape.dropout(v, cfg_.dropout, *drop_rng, opt.training);
    }
    return fc_out_.forward(tape, v);
}

Matrix Classifier::stage_features(const Matrix& cloud) {
    nn::Tape tape;
    const nn::KnnGraph g = batched_knn(cloud, 1, cloud.rows, cfg_.knn_k);
    nn::Value* x = tape.leaf(cloud);
    nn::Value* h = ec1_.forward(tape, x, g, false, cfg_.bn_momentum);
    h = mlp_.forward(tape, h, false, cfg_.bn_momentum);
    return h->val;
}

std::vector<nn::Param*> Classifier::params() {
    std::vector<nn::Param*> out;
    ec1_.collect(out);
    mlp_.collect(out);
    for (auto& ec : stage_convs_) ec.collect(out);
    for (size_t i = 0; i < fc_.size(); ++i) {
        fc_[i].collect(out);
        fc_bns_[i].collect(out);
    }
    fc_out_.collect(out);
    return out;
}

std::vector<std::pair<std::string, Tensor*>> Classifier::state_tensors() {
    std::vector<std::pair<std::string, Tensor*>> out;
    auto push = [&out](std::vector<std::pair<std::string, Tensor*>> v) {
        out.insert(out.end(), v.begin(), v.end());
    };
    push(ec1_.bn.state_tensors());
    for (auto& bn : mlp_.norms) push(bn.state_tensors());
    for (auto& ec : stage_convs_) push(ec.bn.state_tensors());
    for (auto& bn : fc_bns_) push(bn.state_tensors());
    return out;
}

Cascade::Cascade(int input_points, int knn_k, Sampler sampler,
                 const std::vector<CascadeStage>& stages, uint64_t seed)
    : input_points_(input_points), knn_k_(knn_k), sampler_(sampler), stages_(stages) {
    if (stages.empty())
        throw ConfigInvalid("cascade: need at least one stage");
    Rng rng = Rng(seed).child(0xCA5C);
    int cur_width = 3;
    int cur_pts = input_points;
    for (size_t j = 0; j < stages_.size(); ++j) {
        convs_.emplace_back("cascade" + std::to_string(j), cur_width,
                            stages_[j].conv_width, rng);
        if (cur_pts % stages_[j].ratio != 0)
            throw ConfigInvalid("cascade: ratio chain must divide the point count");
        cur_pts /= stages_[j].ratio;
        cur_width = stages_[j].conv_width + (stages_[j].concat_input ? cur_width : 0);
    }
}

int Cascade::output_points() const {
    int pts = input_points_;
    for (const auto& s : stages_) pts /= s.ratio;
    return pts;
}

int Cascade::output_width() const {
    int width = 3;
    for (const auto& s : stages_) {
        const int in_width = width;
        width = s.conv_width + (s.concat_input ? in_width : 0);
    }
    return width;
}

nn::Value* Cascade::forward(nn::Tape& tape, const Matrix& cloud,
                            const ForwardOptions& opt) {
    if (cloud.rows != input_points_ || cloud.cols != 3)
        throw nn::ShapeMismatch("cascade: cloud must be input_points x 3");
    Matrix coords = cloud;
    nn::Value* h = tape.leaf(cloud);
    int cur_pts = input_points_;
    for (size_t j = 0; j < stages_.size(); ++j) {
        const nn::KnnGraph g = batched_knn(coords, 1, cur_pts, knn_k_);
        nn::Value* conv = convs_[j].forward(tape, h, g, opt.training, opt.bn_momentum);
        const int k_out = cur_pts / stages_[j].ratio;
        std::vector<int> indices;
        if (sampler_ == Sampler::Random || sampler_ == Sampler::FPS)
            throw ConfigInvalid("cascade: only cpl, wcpl or none samplers");
        if (sampler_ == Sampler::None) {
            indices.resize(static_cast<size_t>(k_out));
            for (int i = 0; i < k_out; ++i) indices[static_cast<size_t>(i)] = i;
        } else {
            const cpl::CriticalSelection sel = cpl::cpl_select(
                conv->val, k_out,
                sampler_ == Sampler::CPL ? cpl::Mode::CPL : cpl::Mode::WCPL);
            indices = sel.resized;
        }
        nn::Value* gathered = tape.gather_rows(conv, indices);
        if (stages_[j].concat_input) {
            // features from the stage input, same retained points
            nn::Value* carried = tape.gather_rows(h, indices);
            gathered = tape.concat_cols(gathered, carried);
        }
        h = gathered;
        Matrix new_coords(k_out, 3);
        for (int i = 0; i < k_out; ++i)
            for (int d = 0; d < 3; ++d)
                new_coords(i, d) = coords(indices[static_cast<size_t>(i)], d);
        coords = std::move(new_coords);
        cur_pts = k_out;
    }
    return h;
}

std::vector<nn::Param*> Cascade::params() {
    std::vector<nn::Param*> out;
    for (auto& c : convs_) c.collect(out);
    return out;
}

} // namespace cpn::net
