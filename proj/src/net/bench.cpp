#include "cpn/net/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "cpn/core/matrix.hpp"
#include "cpn/core/rng.hpp"
#include "cpn/cpl/cpl.hpp"
#include "cpn/nn/knn.hpp"

namespace cpn::net {
namespace {

double time_ms(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

} // namespace

BenchRow bench_op(const std::string& op, int n, int d, int k, int repeats,
                  uint64_t seed) {
    if (repeats < 1) throw ValidationError("bench: repeats must be >= 1");
    Rng rng(seed);
    BenchRow row{op, n, d, k, 0.0};

    // Repetitions rotate over several identically-sized input copies so each
    // timed call streams from cold memory. Otherwise inputs small enough to
    // stay cache-resident between repetitions measure cache bandwidth while
    // large ones measure DRAM bandwidth, and the size-scaling curve picks up
    // a spurious step at the cache boundary.
    const int width = (op == "cpl" || op == "wcpl") ? d : 3;
    const size_t bytes =
        static_cast<size_t>(n) * static_cast<size_t>(width) * sizeof(double);
    constexpr size_t kColdSetBytes = 384u << 20;
    const int copies = static_cast<int>(
        std::min<size_t>(16, std::max<size_t>(1, (kColdSetBytes + bytes - 1) / bytes)));

    std::vector<Matrix> inputs;
    inputs.reserve(static_cast<size_t>(copies));
    for (int i = 0; i < copies; ++i) {
        Matrix m(n, width);
        for (double& v : m.data) v = rng.uniform(-1.0, 1.0);
        inputs.push_back(std::move(m));
    }

    std::function<void(const Matrix&)> body;
    if (op == "cpl" || op == "wcpl") {
        const cpl::Mode mode = op == "cpl" ? cpl::Mode::CPL : cpl::Mode::WCPL;
        body = [k, mode](const Matrix& in) {
            volatile int sink = cpl::cpl_select(in, k, mode).resized.back();
            (void)sink;
        };
    } else if (op == "fps") {
        body = [k](const Matrix& in) {
            volatile int sink = cpl::downsample_fps(in, k).back();
            (void)sink;
        };
    } else if (op == "knn") {
        body = [k](const Matrix& in) {
            volatile int sink = nn::knn_build(in, k).neighbors.back();
            (void)sink;
        };
    } else {
        throw ValidationError("bench: unknown op '" + op + "'");
    }

    body(inputs[0]);  // warm-up, touches code paths and output allocations
    std::vector<double> times(static_cast<size_t>(repeats));
    for (int r = 0; r < repeats; ++r) {
        const Matrix& in =
            inputs[static_cast<size_t>((r + 1) % copies)];
        times[static_cast<size_t>(r)] = time_ms([&] { body(in); });
    }
    std::sort(times.begin(), times.end());
    row.median_ms = times[times.size() / 2];
    return row;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::string out = "op,n,d,k,median_ms\n";
    char buf[128];
    for (const BenchRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%d,%d,%d,%.4f\n", r.op.c_str(), r.n, r.d,
                      r.k, r.median_ms);
        out += buf;
    }
    return out;
}

} // namespace cpn::net
