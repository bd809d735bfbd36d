// Independent naive transliteration of the critical-points selection
// pipeline: plain nested loops, no shared code with cpn::cpl. Used as the
// reference the fast implementation is checked against.
#ifndef CPN_TESTS_CPL_ORACLE_HPP
#define CPN_TESTS_CPL_ORACLE_HPP

#include <vector>

#include "cpn/core/matrix.hpp"

namespace oracle {

struct Result {
    std::vector<double> f_max;
    std::vector<int> idx;
    std::vector<int> uidx;
    std::vector<double> f_s;
    std::vector<int> fr;
    std::vector<int> suidx;
    std::vector<int> resized;
};

inline Result select(const cpn::Matrix& f_sel, int k, bool weighted) {
    const int n = f_sel.rows, d = f_sel.cols;
    Result r;

    // column max / argmax, smallest row wins ties
    for (int c = 0; c < d; ++c) {
        double best = f_sel(0, c);
        int best_row = 0;
        for (int row = 1; row < n; ++row) {
            if (f_sel(row, c) > best) {
                best = f_sel(row, c);
                best_row = row;
            }
        }
        r.f_max.push_back(best);
        r.idx.push_back(best_row);
    }

    // unique in first-occurrence order, summed scores, frequencies
    for (int c = 0; c < d; ++c) {
        bool seen = false;
        for (int u : r.uidx)
            if (u == r.idx[static_cast<size_t>(c)]) seen = true;
        if (!seen) r.uidx.push_back(r.idx[static_cast<size_t>(c)]);
    }
    for (int u : r.uidx) {
        double sum = 0.0;
        int count = 0;
        for (int c = 0; c < d; ++c) {
            if (r.idx[static_cast<size_t>(c)] == u) {
                sum += r.f_max[static_cast<size_t>(c)];
                ++count;
            }
        }
        r.f_s.push_back(sum);
        r.fr.push_back(count);
    }

    // stable ascending insertion sort by score
    std::vector<int> su = r.uidx, sfr = r.fr;
    std::vector<double> ss = r.f_s;
    for (size_t i = 1; i < ss.size(); ++i) {
        const double sv = ss[i];
        const int uv = su[i], fv = sfr[i];
        size_t j = i;
        while (j > 0 && ss[j - 1] > sv) {
            ss[j] = ss[j - 1];
            su[j] = su[j - 1];
            sfr[j] = sfr[j - 1];
            --j;
        }
        ss[j] = sv;
        su[j] = uv;
        sfr[j] = fv;
    }
    r.suidx = su;

    std::vector<int> src;
    if (weighted) {
        for (size_t j = 0; j < su.size(); ++j)
            for (int rep = 0; rep < sfr[j]; ++rep) src.push_back(su[j]);
    } else {
        src = su;
    }

    const auto m = static_cast<long long>(src.size());
    for (long long i = 0; i < k; ++i) {
        long long j = i * m / k;
        if (j > m - 1) j = m - 1;
        r.resized.push_back(src[static_cast<size_t>(j)]);
    }
    return r;
}

} // namespace oracle

#endif
