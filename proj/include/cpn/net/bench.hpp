#ifndef CPN_NET_BENCH_HPP
#define CPN_NET_BENCH_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace cpn::net {

struct BenchRow {
    std::string op;
    int n = 0;
    int d = 0;
    int k = 0;
    double median_ms = 0.0;
};

/// Times one operation over random inputs; median of `repeats` runs.
/// op: "cpl" (cpl_select over an n x d matrix, k = n/4), "fps" (k = n/4) or
/// "knn" (k = 20). Input generation is outside the timed region.
BenchRow bench_op(const std::string& op, int n, int d, int k, int repeats,
                  uint64_t seed);

std::string bench_csv(const std::vector<BenchRow>& rows);

} // namespace cpn::net

#endif
