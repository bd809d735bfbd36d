#include "cpn/net/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cpn::net {
namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigInvalid("config line " + std::to_string(line_no) +
                                ": expected key=value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

long long to_ll(const std::string& key, const std::string& v) {
    long long out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigInvalid("config: bad integer for " + key + ": '" + v + "'");
    return out;
}

double to_dbl(const std::string& key, const std::string& v) {
    double out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigInvalid("config: bad number for " + key + ": '" + v + "'");
    return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    for (const std::string& part : split(v, ','))
        out.push_back(static_cast<int>(to_ll(key, trim(part))));
    return out;
}

std::string join(const std::vector<int>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string to_string(Sampler s) {
    switch (s) {
        case Sampler::CPL: return "cpl";
        case Sampler::WCPL: return "wcpl";
        case Sampler::Random: return "random";
        case Sampler::FPS: return "fps";
        case Sampler::None: return "none";
    }
    return "cpl";
}

Sampler sampler_from_string(const std::string& s) {
    if (s == "cpl") return Sampler::CPL;
    if (s == "wcpl") return Sampler::WCPL;
    if (s == "random") return Sampler::Random;
    if (s == "fps") return Sampler::FPS;
    if (s == "none") return Sampler::None;
    throw ConfigInvalid("unknown sampler mode '" + s + "'");
}

int NetworkConfig::points_after_stage(size_t stage) const {
    int n = input_points;
    for (size_t j = 0; j <= stage && j < ratios.size(); ++j) n /= ratios[j];
    return n;
}

void NetworkConfig::validate() const {
    if (input_points < 1) throw ConfigInvalid("input_points must be >= 1");
    if (classes < 2) throw ConfigInvalid("classes must be >= 2");
    if (knn_k < 1 || knn_k >= input_points)
        throw ConfigInvalid("knn_k must be in [1, input_points)");
    if (edgeconv1_width < 1 || bottleneck < 1)
        throw ConfigInvalid("layer widths must be >= 1");
    if (ratios.empty()) throw ConfigInvalid("need at least one ratio stage");
    long long denom = 1;
    for (int r : ratios) {
        if (r < 1) throw ConfigInvalid("ratio denominators must be >= 1");
        denom *= r;
    }
    if (input_points % denom != 0)
        throw ConfigInvalid("ratio chain must divide input_points evenly");
    if (input_points / denom < 1)
        throw ConfigInvalid("ratio chain leaves no points");
    if (!(dropout >= 0.0 && dropout < 1.0))
        throw ConfigInvalid("dropout must be in [0, 1)");
    if (batch_size < 1 || epochs < 0) throw ConfigInvalid("bad training sizes");
    if (!(lr > 0.0)) throw ConfigInvalid("lr must be positive");
    if (train_clouds < 1 || test_clouds < 1)
        throw ConfigInvalid("dataset sizes must be >= 1");
    const int out_pts = input_points / static_cast<int>(denom);
    if (sampler != Sampler::None && knn_k >= out_pts)
        throw ConfigInvalid("knn_k must stay below the down-sampled point count");
}

std::string NetworkConfig::serialize() const {
    std::string s;
    s += "input_points=" + std::to_string(input_points) + "\n";
    s += "knn_k=" + std::to_string(knn_k) + "\n";
    s += "edgeconv1_width=" + std::to_string(edgeconv1_width) + "\n";
    s += "bottleneck=" + std::to_string(bottleneck) + "\n";
    s += "sampler=" + to_string(sampler) + "\n";
    s += "ratios=" + join(ratios) + "\n";
    s += "fc_dims=" + join(fc_dims) + "\n";
    s += "classes=" + std::to_string(classes) + "\n";
    s += "dropout=" + fmt(dropout) + "\n";
    s += "seed=" + std::to_string(seed) + "\n";
    s += "epochs=" + std::to_string(epochs) + "\n";
    s += "batch_size=" + std::to_string(batch_size) + "\n";
    s += "lr=" + fmt(lr) + "\n";
    s += "lr_decay_rate=" + fmt(lr_decay_rate) + "\n";
    s += "lr_decay_steps=" + std::to_string(lr_decay_steps) + "\n";
    s += "bn_momentum=" + fmt(bn_momentum) + "\n";
    s += "bn_momentum_final=" + fmt(bn_momentum_final) + "\n";
    s += "augment=" + std::string(augment ? "1" : "0") + "\n";
    s += "train_clouds=" + std::to_string(train_clouds) + "\n";
    s += "test_clouds=" + std::to_string(test_clouds) + "\n";
    s += "noise_sigma=" + fmt(noise_sigma) + "\n";
    s += "dataset_seed=" + std::to_string(dataset_seed) + "\n";
    return s;
}

NetworkConfig NetworkConfig::parse(const std::string& text) {
    NetworkConfig cfg;
    for (const auto& [key, v] : parse_kv(text)) {
        if (key == "input_points") cfg.input_points = static_cast<int>(to_ll(key, v));
        else if (key == "knn_k") cfg.knn_k = static_cast<int>(to_ll(key, v));
        else if (key == "edgeconv1_width") cfg.edgeconv1_width = static_cast<int>(to_ll(key, v));
        else if (key == "bottleneck") cfg.bottleneck = static_cast<int>(to_ll(key, v));
        else if (key == "sampler") cfg.sampler = sampler_from_string(v);
        else if (key == "ratios") cfg.ratios = to_int_list(key, v);
        else if (key == "fc_dims") cfg.fc_dims = to_int_list(key, v);
        else if (key == "classes") cfg.classes = static_cast<int>(to_ll(key, v));
        else if (key == "dropout") cfg.dropout = to_dbl(key, v);
        else if (key == "seed") cfg.seed = static_cast<uint64_t>(to_ll(key, v));
        else if (key == "epochs") cfg.epochs = static_cast<int>(to_ll(key, v));
        else if (key == "batch_size") cfg.batch_size = static_cast<int>(to_ll(key, v));
        else if (key == "lr") cfg.lr = to_dbl(key, v);
        else if (key == "lr_decay_rate") cfg.lr_decay_rate = to_dbl(key, v);
        else if (key == "lr_decay_steps") cfg.lr_decay_steps = to_ll(key, v);
        else if (key == "bn_momentum") cfg.bn_momentum = to_dbl(key, v);
        else if (key == "bn_momentum_final") cfg.bn_momentum_final = to_dbl(key, v);
        else if (key == "augment") cfg.augment = to_ll(key, v) != 0;
        else if (key == "train_clouds") cfg.train_clouds = static_cast<int>(to_ll(key, v));
        else if (key == "test_clouds") cfg.test_clouds = static_cast<int>(to_ll(key, v));
        else if (key == "noise_sigma") cfg.noise_sigma = to_dbl(key, v);
        else if (key == "dataset_seed") cfg.dataset_seed = static_cast<uint64_t>(to_ll(key, v));
        else throw ConfigInvalid("unknown config key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

NetworkConfig NetworkConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

AblateGrid AblateGrid::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();

    AblateGrid grid;
    std::string base_text;
    for (const auto& [key, v] : parse_kv(ss.str())) {
        if (key == "grid_samplers") {
            grid.samplers.clear();
            for (const std::string& part : split(v, ','))
                grid.samplers.push_back(sampler_from_string(trim(part)));
        } else if (key == "grid_ratios") {
            grid.ratios = to_int_list(key, v);
        } else if (key == "grid_bottlenecks") {
            grid.bottlenecks = to_int_list(key, v);
        } else if (key == "grid_seeds") {
            grid.seeds.clear();
            for (const std::string& part : split(v, ','))
                grid.seeds.push_back(static_cast<uint64_t>(to_ll(key, trim(part))));
        } else {
            base_text += key + "=" + v + "\n";
        }
    }
    grid.base = NetworkConfig::parse(base_text);
    if (grid.samplers.empty() || grid.ratios.empty() || grid.bottlenecks.empty() ||
        grid.seeds.empty())
        throw ConfigInvalid("ablation grid axes must be non-empty");
    return grid;
}

} // namespace cpn::net
