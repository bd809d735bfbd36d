#include "cpn/cpl/cpl.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "cpn/core/rng.hpp"

namespace cpn::cpl {

std::string to_string(Mode mode) {
    return mode == Mode::CPL ? "cpl" : "wcpl";
}

void column_max_argmax(const Matrix& f_sel, std::vector<double>& f_max,
                       std::vector<int>& idx) {
    const int n = f_sel.rows, d = f_sel.cols;
    if (n < 1 || d < 1)
        throw ValidationError("column_max_argmax: empty feature matrix");
    f_max.assign(static_cast<size_t>(d), 0.0);
    idx.assign(static_cast<size_t>(d), 0);
    // Row-major streaming scan; strictly-greater keeps the smallest row on ties.
    const double* row0 = f_sel.data.data();
    std::copy(row0, row0 + d, f_max.begin());
    for (int r = 1; r < n; ++r) {
        const double* row = f_sel.data.data() + static_cast<size_t>(r) * d;
        for (int c = 0; c < d; ++c) {
            if (row[c] > f_max[static_cast<size_t>(c)]) {
                f_max[static_cast<size_t>(c)] = row[c];
                idx[static_cast<size_t>(c)] = r;
            }
        }
    }
}

void aggregate_unique(const std::vector<double>& f_max, const std::vector<int>& idx,
                      std::vector<int>& uidx, std::vector<double>& f_s,
                      std::vector<int>& fr) {
    uidx.clear();
    f_s.clear();
    fr.clear();
    std::unordered_map<int, int> slot;
    slot.reserve(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) {
        auto [it, inserted] = slot.try_emplace(idx[i], static_cast<int>(uidx.size()));
        if (inserted) {
            uidx.push_back(idx[i]);
            f_s.push_back(f_max[i]);
            fr.push_back(1);
        } else {
            f_s[static_cast<size_t>(it->second)] += f_max[i];
            fr[static_cast<size_t>(it->second)] += 1;
        }
    }
}

void sort_by_score(std::vector<int>& uidx, std::vector<double>& f_s,
                   std::vector<int>& fr) {
    const size_t m = uidx.size();
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return f_s[static_cast<size_t>(a)] < f_s[static_cast<size_t>(b)];
    });
    std::vector<int> u2(m), fr2(m);
    std::vector<double> s2(m);
    for (size_t j = 0; j < m; ++j) {
        u2[j] = uidx[static_cast<size_t>(order[j])];
        s2[j] = f_s[static_cast<size_t>(order[j])];
        fr2[j] = fr[static_cast<size_t>(order[j])];
    }
    uidx.swap(u2);
    f_s.swap(s2);
    fr.swap(fr2);
}

std::vector<int> nn_resize(const std::vector<int>& src, int k) {
    const auto m = static_cast<long long>(src.size());
    if (m < 1 || k < 1)
        throw ValidationError("nn_resize: need m >= 1 and k >= 1");
    std::vector<int> out(static_cast<size_t>(k));
    for (long long i = 0; i < k; ++i) {
        const long long j = std::min(m - 1, i * m / k);
        out[static_cast<size_t>(i)] = src[static_cast<size_t>(j)];
    }
    return out;
}

std::vector<int> weighted_expand(const std::vector<int>& suidx,
                                 const std::vector<int>& sorted_fr) {
    std::vector<int> midx;
    size_t total = 0;
    for (int f : sorted_fr) total += static_cast<size_t>(f);
    midx.reserve(total);
    for (size_t j = 0; j < suidx.size(); ++j)
        midx.insert(midx.end(), static_cast<size_t>(sorted_fr[j]), suidx[j]);
    return midx;
}

CriticalSelection cpl_select(const Matrix& f_sel, int k, Mode mode) {
    if (k < 1)
        throw ValidationError("cpl_select: k must be >= 1");
    CriticalSelection sel;
    sel.mode = mode;
    column_max_argmax(f_sel, sel.f_max, sel.idx);
    aggregate_unique(sel.f_max, sel.idx, sel.uidx, sel.f_s, sel.fr);
    sel.ordered = sel.uidx;
    sel.sorted_f_s = sel.f_s;
    sel.sorted_fr = sel.fr;
    sort_by_score(sel.ordered, sel.sorted_f_s, sel.sorted_fr);
    if (mode == Mode::WCPL) {
        sel.resized = nn_resize(weighted_expand(sel.ordered, sel.sorted_fr), k);
    } else {
        sel.resized = nn_resize(sel.ordered, k);
    }
    return sel;
}

Matrix gather_rows(const Matrix& f_in, const std::vector<int>& indices) {
    Matrix out(static_cast<int>(indices.size()), f_in.cols);
    for (size_t i = 0; i < indices.size(); ++i) {
        const int r = indices[i];
        if (r < 0 || r >= f_in.rows)
            throw IndexOutOfRange("gather_rows: index " + std::to_string(r) +
                                  " outside [0, " + std::to_string(f_in.rows) + ")");
        std::copy(f_in.row(r).begin(), f_in.row(r).end(),
                  out.row(static_cast<int>(i)).begin());
    }
    return out;
}

std::vector<double> output_max(const Matrix& f_out) {
    std::vector<double> f_o;
    std::vector<int> ignored;
    column_max_argmax(f_out, f_o, ignored);
    return f_o;
}

std::vector<int> downsample_random(int n, int k, uint64_t seed) {
    if (n < 1 || k < 1)
        throw ValidationError("downsample_random: need n >= 1 and k >= 1");
    Rng rng(seed);
    std::vector<int> out;
    out.reserve(static_cast<size_t>(k));
    std::vector<int> pool(static_cast<size_t>(n));
    while (static_cast<int>(out.size()) < k) {
        // Fisher-Yates draw without replacement; refill if k > n.
        std::iota(pool.begin(), pool.end(), 0);
        int remaining = n;
        while (remaining > 0 && static_cast<int>(out.size()) < k) {
            const auto j = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(remaining)));
            out.push_back(pool[static_cast<size_t>(j)]);
            pool[static_cast<size_t>(j)] = pool[static_cast<size_t>(remaining - 1)];
            --remaining;
        }
    }
    return out;
}

std::vector<int> downsample_fps(const Matrix& points, int k) {
    const int n = points.rows;
    if (n < 1 || k < 1 || k > n)
        throw ValidationError("downsample_fps: need 1 <= k <= n");
    std::vector<int> out;
    out.reserve(static_cast<size_t>(k));
    std::vector<double> best(static_cast<size_t>(n),
                             std::numeric_limits<double>::infinity());
    std::vector<char> taken(static_cast<size_t>(n), 0);
    int current = 0;
    out.push_back(current);
    taken[0] = 1;
    for (int step = 1; step < k; ++step) {
        int far_idx = -1;
        double far_dist = -1.0;
        for (int i = 0; i < n; ++i) {
            const double dx = points(i, 0) - points(current, 0);
            const double dy = points(i, 1) - points(current, 1);
            const double dz = points(i, 2) - points(current, 2);
            const double d2 = dx * dx + dy * dy + dz * dz;
            if (d2 < best[static_cast<size_t>(i)]) best[static_cast<size_t>(i)] = d2;
            if (!taken[static_cast<size_t>(i)] && best[static_cast<size_t>(i)] > far_dist) {
                far_dist = best[static_cast<size_t>(i)];
                far_idx = i;
            }
        }
        current = far_idx;
        out.push_back(current);
        taken[static_cast<size_t>(current)] = 1;
    }
    return out;
}

std::string CriticalSelection::to_json() const {
    auto ints = [](const std::vector<int>& v) {
        std::string s = "[";
        for (size_t i = 0; i < v.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(v[i]);
        }
        return s + "]";
    };
    auto reals = [](const std::vector<double>& v) {
        std::string s = "[";
        char buf[40];
        for (size_t i = 0; i < v.size(); ++i) {
            if (i) s += ",";
            std::snprintf(buf, sizeof buf, "%.17g", v[i]);
            s += buf;
        }
        return s + "]";
    };
    std::string s = "{";
    s += "\"mode\":\"" + to_string(mode) + "\",";
    s += "\"f_max\":" + reals(f_max) + ",";
    s += "\"idx\":" + ints(idx) + ",";
    s += "\"uidx\":" + ints(uidx) + ",";
    s += "\"f_s\":" + reals(f_s) + ",";
    s += "\"fr\":" + ints(fr) + ",";
    s += "\"ordered\":" + ints(ordered) + ",";
    s += "\"resized\":" + ints(resized);
    s += "}";
    return s;
}

} // namespace cpn::cpl
