// Acceptance gate: every release criterion, one PASS/FAIL line each.
// Exit status is the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cpn/core/rng.hpp"
#include "cpn/cpl/cpl.hpp"
#include "cpn/io/off.hpp"
#include "cpn/io/xyz.hpp"
#include "cpn/net/checkpoint.hpp"
#include "cpn/net/config.hpp"
#include "cpn/net/model.hpp"
#include "cpn/net/shapes.hpp"
#include "cpn/net/train.hpp"
#include "cpl_oracle.hpp"
#include "grad_check.hpp"

using namespace cpn;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Matrix random_matrix(int n, int d, Rng& rng) {
    Matrix m(n, d);
    for (double& v : m.data) v = rng.uniform(-1.0, 1.0);
    return m;
}

bool matches_oracle(const Matrix& f, int k, cpl::Mode mode, std::string& why) {
    const auto got = cpl::cpl_select(f, k, mode);
    const auto want = oracle::select(f, k, mode == cpl::Mode::WCPL);
    if (got.f_max != want.f_max) why = "f_max";
    else if (got.idx != want.idx) why = "idx";
    else if (got.uidx != want.uidx) why = "uidx";
    else if (got.f_s != want.f_s) why = "f_s";
    else if (got.fr != want.fr) why = "fr";
    else if (got.ordered != want.suidx) why = "ordered";
    else if (got.resized != want.resized) why = "resized";
    else return true;
    return false;
}

// ---------------------------------------------------------------- criterion 1
bool criterion_oracle(std::string& detail) {
    const auto t0 = Clock::now();
    const double values[] = {-1, 0, 1, 2};
    long long cases = 0;
    std::string why;

    for (int n = 1; n <= 3; ++n) {
        for (int d = 1; d <= 3; ++d) {
            const int entries = n * d;
            long long total = 1;
            for (int e = 0; e < entries; ++e) total *= 4;
            for (long long code = 0; code < total; ++code) {
                Matrix f(n, d);
                long long c = code;
                for (int e = 0; e < entries; ++e) {
                    f.data[static_cast<size_t>(e)] = values[c % 4];
                    c /= 4;
                }
                for (int k : {1, 2, n, n + 3}) {
                    for (cpl::Mode mode : {cpl::Mode::CPL, cpl::Mode::WCPL}) {
                        ++cases;
                        if (!matches_oracle(f, k, mode, why)) {
                            detail = "exhaustive mismatch in " + why;
                            return false;
                        }
                    }
                }
            }
        }
    }

    Rng rng(2024);
    for (int trial = 0; trial < 10000; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform_index(8));
        const int d = 1 + static_cast<int>(rng.uniform_index(5));
        const Matrix f = random_matrix(n, d, rng);
        const int k = 1 + static_cast<int>(rng.uniform_index(2 * n));
        for (cpl::Mode mode : {cpl::Mode::CPL, cpl::Mode::WCPL}) {
            ++cases;
            if (!matches_oracle(f, k, mode, why)) {
                detail = "random mismatch in " + why;
                return false;
            }
        }
    }

    const double secs = seconds_since(t0);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%lld cases, %.1fs", cases, secs);
    detail = buf;
    return secs < 60.0;
}

// ---------------------------------------------------------------- criterion 2
bool criterion_permutation(std::string& detail) {
    Rng rng(7);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_index(50));
        const int d = 1 + static_cast<int>(rng.uniform_index(16));
        const Matrix f = random_matrix(n, d, rng);
        const int k = 1 + static_cast<int>(rng.uniform_index(n));
        const cpl::Mode mode = trial % 2 ? cpl::Mode::WCPL : cpl::Mode::CPL;

        std::vector<int> perm(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
        for (size_t i = perm.size(); i > 1; --i)
            std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
        Matrix fp(n, d);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < d; ++c)
                fp(perm[static_cast<size_t>(r)], c) = f(r, c);

        const Matrix a = cpl::gather_rows(f, cpl::cpl_select(f, k, mode).resized);
        const Matrix b = cpl::gather_rows(fp, cpl::cpl_select(fp, k, mode).resized);
        if (!(a == b)) {
            detail = "gathered rows differ at trial " + std::to_string(trial);
            return false;
        }
    }
    detail = "1000 shuffled pairs, outputs bitwise equal";
    return true;
}

// ---------------------------------------------------------------- criterion 3
bool criterion_retention(std::string& detail) {
    Rng rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_index(40));
        const int d = 1 + static_cast<int>(rng.uniform_index(24));
        const Matrix f = random_matrix(n, d, rng);

        const auto probe = cpl::cpl_select(f, 1, cpl::Mode::CPL);
        const int m = static_cast<int>(probe.uidx.size());
        const int k = m + static_cast<int>(rng.uniform_index(6));
        const auto sel = cpl::cpl_select(f, k, cpl::Mode::CPL);
        const std::set<int> kept(sel.resized.begin(), sel.resized.end());
        for (int u : sel.uidx) {
            if (!kept.count(u)) {
                detail = "cpl lost a critical index";
                return false;
            }
        }
        // with every critical point kept, the output maxima match f_max
        const auto out_max = cpl::output_max(cpl::gather_rows(f, sel.resized));
        if (out_max != sel.f_max) {
            detail = "output maxima drifted from f_max";
            return false;
        }

        const auto wsel = cpl::cpl_select(f, d + static_cast<int>(rng.uniform_index(6)),
                                          cpl::Mode::WCPL);
        const std::set<int> wkept(wsel.resized.begin(), wsel.resized.end());
        for (int u : wsel.uidx) {
            if (!wkept.count(u)) {
                detail = "wcpl lost a critical index";
                return false;
            }
        }
    }
    detail = "1000 instances, critical sets intact, maxima preserved";
    return true;
}

// ---------------------------------------------------------------- criterion 4
bool criterion_gradients(std::string& detail) {
    const gradcheck::Stats stats = gradcheck::run_suite(20, 555);
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "%d instances, %d entries, %d failures, worst rel dev %.2e",
                  stats.instances, stats.entries, stats.failures, stats.worst);
    detail = buf;
    return stats.failures == 0 && stats.instances >= 20 * 14;
}

// ------------------------------------------------------- criteria 5, 6 and 8
struct TrainedModel {
    std::unique_ptr<net::Classifier> model;
    double acc = 0.0;
};

net::NetworkConfig desk_config(int ratio_den, uint64_t seed, net::Sampler sampler) {
    net::NetworkConfig cfg;
    cfg.input_points = 256;
    cfg.knn_k = 10;
    cfg.edgeconv1_width = 32;
    cfg.bottleneck = 32;
    cfg.sampler = sampler;
    cfg.ratios = {ratio_den};
    cfg.fc_dims = {128, 64};
    cfg.classes = 4;
    cfg.epochs = 30;
    cfg.batch_size = 16;
    cfg.train_clouds = 512;
    cfg.test_clouds = 128;
    cfg.seed = seed;
    return cfg;
}

TrainedModel train_desk(const net::NetworkConfig& cfg, const net::Dataset& ds) {
    TrainedModel out;
    out.model = std::make_unique<net::Classifier>(cfg);
    nn::Adam opt = net::make_optimizer(cfg, ds.train.size());
    const auto log = net::train(*out.model, opt, ds);
    out.acc = log.empty() ? 0.0 : log.back().overall_acc;
    return out;
}

struct LearningResults {
    double mean_full = 0, mean_quarter = 0, mean_sixteenth = 0, mean_random = 0;
    double train_seconds = 0;
    std::unique_ptr<net::Classifier> quarter_model;  // cpl, seed 1
    std::unique_ptr<net::Classifier> random_model;   // random, seed 1
    net::Dataset dataset;
};

LearningResults run_learning() {
    LearningResults r;
    const net::NetworkConfig base = desk_config(4, 1, net::Sampler::CPL);
    r.dataset = net::make_splits(base.train_clouds, base.test_clouds,
                                 base.input_points, base.noise_sigma,
                                 base.dataset_seed);
    const auto t0 = Clock::now();
    for (const uint64_t seed : {1ull, 2ull, 3ull}) {
        for (const int den : {1, 4, 16}) {
            TrainedModel tm =
                train_desk(desk_config(den, seed, net::Sampler::CPL), r.dataset);
            std::fprintf(stderr, "  [train] cpl ratio 1/%d seed %llu acc %.4f\n",
                         den, static_cast<unsigned long long>(seed), tm.acc);
            if (den == 1) r.mean_full += tm.acc / 3;
            if (den == 4) {
                r.mean_quarter += tm.acc / 3;
                if (seed == 1) r.quarter_model = std::move(tm.model);
            }
            if (den == 16) r.mean_sixteenth += tm.acc / 3;
        }
        TrainedModel rm =
            train_desk(desk_config(4, seed, net::Sampler::Random), r.dataset);
        std::fprintf(stderr, "  [train] random ratio 1/4 seed %llu acc %.4f\n",
                     static_cast<unsigned long long>(seed), rm.acc);
        r.mean_random += rm.acc / 3;
        if (seed == 1) r.random_model = std::move(rm.model);
    }
    r.train_seconds = seconds_since(t0);
    return r;
}

bool criterion_learning(const LearningResults& r, std::string& detail) {
    char buf[220];
    std::snprintf(buf, sizeof buf,
                  "mean acc full %.4f, quarter %.4f, sixteenth %.4f, %.0fs",
                  r.mean_full, r.mean_quarter, r.mean_sixteenth, r.train_seconds);
    detail = buf;
    return r.mean_quarter >= 0.90 && r.mean_sixteenth >= r.mean_full - 0.05 &&
           r.train_seconds <= 1800.0;
}

bool criterion_sampler_comparison(const LearningResults& r, std::string& detail) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "cpl %.4f vs random %.4f", r.mean_quarter,
                  r.mean_random);
    detail = buf;
    if (r.mean_quarter < r.mean_random - 0.01) return false;

    // cpl inference must ignore the sampler seed; the random baseline must not
    const Matrix& cloud = r.dataset.test[0].cloud.points;
    const Matrix c1 = net::eval_logits(*r.quarter_model, {&cloud}, 1);
    const Matrix c2 = net::eval_logits(*r.quarter_model, {&cloud}, 2);
    if (!(c1 == c2)) {
        detail += "; cpl logits moved with the sampler seed";
        return false;
    }
    const Matrix n1 = net::eval_logits(*r.random_model, {&cloud}, 1);
    const Matrix n2 = net::eval_logits(*r.random_model, {&cloud}, 2);
    if (n1 == n2) {
        detail += "; random baseline ignored the sampler seed";
        return false;
    }
    return true;
}

bool criterion_trained_invariance(const LearningResults& r, std::string& detail) {
    Rng rng(31337);
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
        const Matrix& cloud =
            r.dataset.test[static_cast<size_t>(t) % r.dataset.test.size()]
                .cloud.points;
        const int n = cloud.rows;
        std::vector<int> perm(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
        for (size_t i = perm.size(); i > 1; --i)
            std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
        Matrix shuffled(n, 3);
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < 3; ++c)
                shuffled(perm[static_cast<size_t>(i)], c) = cloud(i, c);
        const Matrix a = net::eval_logits(*r.quarter_model, {&cloud});
        const Matrix b = net::eval_logits(*r.quarter_model, {&shuffled});
        for (size_t i = 0; i < a.data.size(); ++i)
            worst = std::max(worst, std::fabs(a.data[i] - b.data[i]));
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "100 clouds, worst logit delta %.2e", worst);
    detail = buf;
    return worst < 1e-5;
}

// ---------------------------------------------------------------- criterion 7
std::map<int, double> parse_bench_csv(const std::string& path, const std::string& op) {
    std::map<int, double> by_n;
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string f_op, f_n, f_d, f_k, f_ms;
        std::getline(ss, f_op, ',');
        std::getline(ss, f_n, ',');
        std::getline(ss, f_d, ',');
        std::getline(ss, f_k, ',');
        std::getline(ss, f_ms, ',');
        if (f_op == op) by_n[std::stoi(f_n)] = std::stod(f_ms);
    }
    return by_n;
}

bool criterion_bench(std::string& detail) {
    const auto t0 = Clock::now();
    const std::string csv = "/tmp/cpn_acceptance_bench.csv";
    const std::string cli = CPN_CLI_PATH;
    std::string cmd = cli +
                      " bench --op cpl --n 65536,131072,262144,524288,1048576"
                      " --d 64 --repeat 9 --out " + csv + " 2>/dev/null";
    if (std::system(cmd.c_str()) != 0) {
        detail = "bench subcommand failed";
        return false;
    }
    const auto scaling = parse_bench_csv(csv, "cpl");
    if (scaling.size() != 5) {
        detail = "missing bench rows";
        return false;
    }
    double worst_ratio = 0;
    double prev = -1;
    for (const auto& [n, ms] : scaling) {
        if (prev > 0) worst_ratio = std::max(worst_ratio, ms / prev);
        prev = ms;
    }

    const std::string head = cli + " bench --repeat 5 --n 4096 --k 1024 ";
    if (std::system((head + "--op cpl --d 64 --out " + csv + " 2>/dev/null").c_str()) != 0) {
        detail = "cpl head-to-head run failed";
        return false;
    }
    const double cpl_ms = parse_bench_csv(csv, "cpl").at(4096);
    if (std::system((head + "--op fps --d 3 --out " + csv + " 2>/dev/null").c_str()) != 0) {
        detail = "fps head-to-head run failed";
        return false;
    }
    const double fps_ms = parse_bench_csv(csv, "fps").at(4096);

    const double secs = seconds_since(t0);
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "worst doubling ratio %.2f, cpl %.2fms vs fps %.2fms @4096, %.0fs",
                  worst_ratio, cpl_ms, fps_ms, secs);
    detail = buf;
    return worst_ratio <= 2.6 && cpl_ms * 2.0 <= fps_ms && secs < 300.0;
}

// ---------------------------------------------------------------- criterion 9
bool criterion_serialization(std::string& detail) {
    // checkpoint: save -> load -> save reproduces bytes
    net::NetworkConfig tiny;
    tiny.input_points = 32;
    tiny.knn_k = 4;
    tiny.edgeconv1_width = 8;
    tiny.bottleneck = 16;
    tiny.fc_dims = {16, 8};
    tiny.epochs = 1;
    tiny.batch_size = 8;
    tiny.train_clouds = 8;
    tiny.test_clouds = 8;
    const net::Dataset ds = net::make_splits(8, 8, 32, 0.05, 3);
    net::Classifier model(tiny);
    nn::Adam opt = net::make_optimizer(tiny, ds.train.size());
    (void)net::train(model, opt, ds);

    const auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const std::string p1 = "/tmp/cpn_acceptance_a.ckpt";
    const std::string p2 = "/tmp/cpn_acceptance_b.ckpt";
    net::checkpoint_save(p1, model, 1, opt.t());
    net::LoadedModel lm = net::checkpoint_load(p1);
    net::checkpoint_save(p2, *lm.model, lm.epoch, lm.adam_t);
    const std::string ckpt_bytes = slurp(p1);
    if (ckpt_bytes != slurp(p2)) {
        detail = "checkpoint bytes changed across save/load/save";
        return false;
    }
    if (net::NetworkConfig::parse(tiny.serialize()).serialize() != tiny.serialize()) {
        detail = "config text round trip changed";
        return false;
    }

    // fuzzing: mutated valid inputs must parse or throw, never crash
    const std::string off_base =
        "OFF\n8 6 12\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n"
        "4 0 1 2 3\n4 4 5 6 7\n4 0 1 5 4\n4 2 3 7 6\n4 0 3 7 4\n4 1 2 6 5\n";
    const std::string xyz_base = "0 0 0\n1 2 3\n-4 5 -6\n0.5 -0.25 1e3\n";
    const std::string cfg_base = tiny.serialize();
    const std::string fuzz_ckpt = "/tmp/cpn_acceptance_fuzz.ckpt";

    Rng rng(1234);
    const auto mutate = [&rng](std::string s) {
        const int edits = 1 + static_cast<int>(rng.uniform_index(6));
        for (int e = 0; e < edits && !s.empty(); ++e) {
            const size_t pos = rng.uniform_index(s.size());
            switch (rng.uniform_index(3)) {
                case 0: s[pos] = static_cast<char>(rng.uniform_index(256)); break;
                case 1: s.erase(pos, 1 + rng.uniform_index(8)); break;
                default:
                    s.insert(pos, 1, static_cast<char>(rng.uniform_index(256)));
            }
        }
        return s;
    };

    long long inputs = 0;
    for (int trial = 0; trial < 100000; ++trial) {
        ++inputs;
        try {
            switch (trial % 4) {
                case 0: (void)io::parse_off(mutate(off_base)); break;
                case 1: (void)io::parse_xyz(mutate(xyz_base)); break;
                case 2: (void)net::NetworkConfig::parse(mutate(cfg_base)); break;
                default:
                    if (trial % 40 == 3) {  // file-backed, keep the count modest
                        std::ofstream(fuzz_ckpt, std::ios::binary)
                            << mutate(ckpt_bytes);
                        (void)net::checkpoint_load(fuzz_ckpt);
                    } else {
                        (void)io::parse_xyz(mutate(cfg_base));
                    }
            }
        } catch (const Error&) {
            // rejection is the expected outcome for most mutations
        }
    }
    char buf[120];
    std::snprintf(buf, sizeof buf,
                  "round trips byte-stable, %lld fuzzed inputs survived", inputs);
    detail = buf;
    return true;
}

} // namespace

int main() {
    int failed = 0;
    const auto report = [&failed](int id, const char* name, bool ok,
                                  const std::string& detail) {
        std::printf("%s: [%d] %s — %s\n", ok ? "PASS" : "FAIL", id, name,
                    detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failed;
    };

    std::string d;
    report(1, "selection matches the naive oracle", criterion_oracle(d), d);
    report(2, "selection output is permutation invariant", criterion_permutation(d), d);
    report(3, "critical points are retained at k >= m", criterion_retention(d), d);
    report(4, "tape gradients match finite differences", criterion_gradients(d), d);

    std::fprintf(stderr, "training desk-scale models...\n");
    const LearningResults lr = run_learning();
    report(5, "desk-scale training reaches target accuracy", criterion_learning(lr, d), d);
    report(6, "cpl sampling holds up against the random baseline",
           criterion_sampler_comparison(lr, d), d);
    report(7, "throughput scaling and fps head-to-head", criterion_bench(d), d);
    report(8, "trained logits are permutation invariant",
           criterion_trained_invariance(lr, d), d);
    report(9, "serialization round trips and parser fuzzing", criterion_serialization(d), d);

    std::printf("%s (%d/9 criteria passed)\n", failed == 0 ? "ACCEPTED" : "REJECTED",
                9 - failed);
    return failed;
}
