#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "cpn/cpl/cpl.hpp"
#include "cpn/io/off.hpp"
#include "cpn/io/ply.hpp"
#include "cpn/io/sample.hpp"
#include "cpn/io/xyz.hpp"
#include "cpn/net/bench.hpp"
#include "cpn/net/checkpoint.hpp"
#include "cpn/net/config.hpp"
#include "cpn/net/shapes.hpp"
#include "cpn/net/train.hpp"

namespace {

using namespace cpn;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::string cur;
    for (char c : s + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(std::stoi(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (out.empty()) throw ValidationError("expected a comma-separated list");
    return out;
}

double parse_ratio(const std::string& s) {
    const size_t slash = s.find('/');
    if (slash != std::string::npos) {
        const double num = std::stod(s.substr(0, slash));
        const double den = std::stod(s.substr(slash + 1));
        if (!(den > 0)) throw ValidationError("ratio denominator must be positive");
        return num / den;
    }
    return std::stod(s);
}

int cmd_sample(const std::string& in, int n, uint64_t seed, const std::string& out) {
    std::cerr << "seed: " << seed << "\n";
    const io::TriangleMesh mesh = io::read_off(in);
    io::PointCloud cloud = io::sample_surface(mesh, n, seed);
    cloud = io::normalize_unit_sphere(cloud);
    io::write_xyz(cloud, out);
    return 0;
}

int cmd_downsample(const std::string& in, const std::string& ratio_text,
                   const std::string& mode, uint64_t seed,
                   const std::string& features_from, bool explain,
                   const std::string& out, const std::string& ply) {
    std::cerr << "seed: " << seed << "\n";
    const io::PointCloud cloud = io::read_xyz(in);
    const int n = cloud.size();
    const double ratio = parse_ratio(ratio_text);
    if (!(ratio > 0.0) || ratio > 1.0)
        throw ValidationError("ratio must be in (0, 1]");
    const int k = std::max(1, static_cast<int>(std::lround(n * ratio)));

    std::vector<int> indices;
    if (mode == "cpl" || mode == "wcpl") {
        Matrix f_sel = cloud.points;  // raw coordinates, diagnostic mode
        if (!features_from.empty()) {
            net::LoadedModel lm = net::checkpoint_load(features_from);
            f_sel = lm.model->stage_features(cloud.points);
        }
        const cpl::CriticalSelection sel = cpl::cpl_select(
            f_sel, k, mode == "cpl" ? cpl::Mode::CPL : cpl::Mode::WCPL);
        if (explain) std::cout << sel.to_json() << "\n";
        indices = sel.resized;
    } else if (mode == "random") {
        indices = cpl::downsample_random(n, k, seed);
    } else if (mode == "fps") {
        indices = cpl::downsample_fps(cloud.points, k);
    } else {
        throw ValidationError("mode must be cpl, wcpl, random or fps");
    }

    io::PointCloud small;
    small.points = cpl::gather_rows(cloud.points, indices);
    io::write_xyz(small, out);
    if (!ply.empty()) io::write_ply_depth_colored(small, ply);
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& ckpt_path,
              const std::string& log_path) {
    const net::NetworkConfig cfg = net::NetworkConfig::load(config_path);
    std::cerr << "seed: " << cfg.seed << "\n";
    const net::Dataset ds = net::make_splits(cfg.train_clouds, cfg.test_clouds,
                                             cfg.input_points, cfg.noise_sigma,
                                             cfg.dataset_seed);
    net::Classifier model(cfg);
    nn::Adam opt = net::make_optimizer(cfg, ds.train.size());
    const std::vector<net::EpochMetrics> log = net::train(model, opt, ds);
    net::checkpoint_save(ckpt_path, model, cfg.epochs, opt.t());
    if (!log_path.empty()) write_text(log_path, net::metrics_csv(log));
    if (!log.empty()) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "final overall_acc=%.4f mean_class_acc=%.4f\n",
                      log.back().overall_acc, log.back().mean_class_acc);
        std::cout << buf;
    }
    return 0;
}

int cmd_eval(const std::string& ckpt_path, uint64_t dataset_seed,
             uint64_t sampler_seed) {
    net::LoadedModel lm = net::checkpoint_load(ckpt_path);
    net::NetworkConfig cfg = lm.model->config();
    std::cerr << "seed: " << sampler_seed << "\n";
    const net::Dataset ds = net::make_splits(cfg.train_clouds, cfg.test_clouds,
                                             cfg.input_points, cfg.noise_sigma,
                                             dataset_seed);
    const net::EvalResult ev =
        net::evaluate(*lm.model, ds.test, ds.classes, sampler_seed);
    char buf[128];
    std::snprintf(buf, sizeof buf, "overall_acc,mean_class_acc\n%.6f,%.6f\n",
                  ev.overall_acc, ev.mean_class_acc);
    std::cout << buf;
    return 0;
}

int cmd_ablate(const std::string& grid_path, const std::string& out_path) {
    const net::AblateGrid grid = net::AblateGrid::load(grid_path);
    std::cerr << "seed: " << grid.base.seed << "\n";
    write_text(out_path, net::ablate(grid));
    return 0;
}

int cmd_bench(const std::string& op, const std::string& n_list,
              const std::string& d_list, const std::string& k_text, int repeats,
              uint64_t seed, const std::string& out_path) {
    std::cerr << "seed: " << seed << "\n";
    std::vector<net::BenchRow> rows;
    for (int n : parse_int_list(n_list)) {
        for (int d : parse_int_list(d_list)) {
            int k;
            if (k_text == "auto")
                k = op == "knn" ? 20 : std::max(1, n / 4);
            else
                k = std::stoi(k_text);
            rows.push_back(net::bench_op(op, n, d, k, repeats, seed));
        }
    }
    const std::string csv = net::bench_csv(rows);
    if (out_path.empty())
        std::cout << csv;
    else
        write_text(out_path, csv);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Critical-points down-sampling and CP-Net classification"};
    app.require_subcommand(1);

    // sample
    auto* sample = app.add_subcommand("sample", "Sample a normalized cloud from an OFF mesh");
    std::string s_in, s_out;
    int s_n = 1024;
    uint64_t s_seed = 1;
    sample->add_option("--in", s_in, "input OFF mesh")->required();
    sample->add_option("--n", s_n, "point count");
    sample->add_option("--seed", s_seed, "RNG seed");
    sample->add_option("--out", s_out, "output XYZ file")->required();

    // downsample
    auto* down = app.add_subcommand("downsample", "Down-sample a cloud (cpl|wcpl|random|fps)");
    std::string d_in, d_ratio = "1/4", d_mode = "cpl", d_ckpt, d_out, d_ply;
    uint64_t d_seed = 1;
    bool d_explain = false;
    down->add_option("--in", d_in, "input XYZ cloud")->required();
    down->add_option("--ratio", d_ratio, "keep ratio, e.g. 0.25 or 1/4");
    down->add_option("--mode", d_mode, "cpl|wcpl|random|fps");
    down->add_option("--seed", d_seed, "seed (random mode)");
    down->add_option("--features-from", d_ckpt, "checkpoint providing learned selection features");
    down->add_flag("--explain", d_explain, "print the selection diagnostics as JSON");
    down->add_option("--out", d_out, "output XYZ file")->required();
    down->add_option("--ply", d_ply, "also write a depth-colored PLY");

    // train
    auto* train = app.add_subcommand("train", "Train CP-Net on the synthetic shape set");
    std::string t_cfg, t_out, t_log;
    train->add_option("--config", t_cfg, "flat key=value config file")->required();
    train->add_option("--out", t_out, "output checkpoint")->required();
    train->add_option("--log", t_log, "metrics CSV path");

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
    std::string e_ckpt;
    uint64_t e_dataset_seed = 7, e_sampler_seed = 1;
    eval->add_option("--ckpt", e_ckpt, "checkpoint path")->required();
    eval->add_option("--dataset-seed", e_dataset_seed, "synthetic dataset seed");
    eval->add_option("--sampler-seed", e_sampler_seed, "random-sampler seed");

    // ablate
    auto* ablate = app.add_subcommand("ablate", "Run a sampler/ratio/bottleneck grid");
    std::string a_grid, a_out;
    ablate->add_option("--grid", a_grid, "grid config file")->required();
    ablate->add_option("--out", a_out, "report CSV path")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "Micro-benchmarks (cpl|wcpl|fps|knn)");
    std::string b_op = "cpl", b_n = "65536", b_d = "64", b_k = "auto", b_out;
    int b_repeats = 5;
    uint64_t b_seed = 1;
    bench->add_option("--op", b_op, "cpl|wcpl|fps|knn");
    bench->add_option("--n", b_n, "comma-separated point counts");
    bench->add_option("--d", b_d, "comma-separated feature dims");
    bench->add_option("--k", b_k, "output size or 'auto' (n/4; 20 for knn)");
    bench->add_option("--repeat", b_repeats, "runs per configuration");
    bench->add_option("--seed", b_seed, "RNG seed");
    bench->add_option("--out", b_out, "CSV path (stdout when omitted)");

    try {
        app.parse(argc, argv);
        if (*sample) return cmd_sample(s_in, s_n, s_seed, s_out);
        if (*down)
            return cmd_downsample(d_in, d_ratio, d_mode, d_seed, d_ckpt, d_explain,
                                  d_out, d_ply);
        if (*train) return cmd_train(t_cfg, t_out, t_log);
        if (*eval) return cmd_eval(e_ckpt, e_dataset_seed, e_sampler_seed);
        if (*ablate) return cmd_ablate(a_grid, a_out);
        if (*bench)
            return cmd_bench(b_op, b_n, b_d, b_k, b_repeats, b_seed, b_out);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const cpn::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const cpn::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
