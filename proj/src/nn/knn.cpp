#include "cpn/nn/knn.hpp"

#include <algorithm>
#include <utility>

namespace cpn::nn {

KnnGraph knn_build(const Matrix& points, int k) {
    const int n = points.rows;
    if (k < 1 || k >= n)
        throw KTooLarge("knn_build: need 1 <= k < n (k=" + std::to_string(k) +
                        ", n=" + std::to_string(n) + ")");

    KnnGraph graph;
    graph.n = n;
    graph.k = k;
    graph.neighbors.resize(static_cast<size_t>(n) * k);

    std::vector<std::pair<double, int>> cand;
    cand.reserve(static_cast<size_t>(n) - 1);
    for (int i = 0; i < n; ++i) {
        cand.clear();
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dx = points(j, 0) - points(i, 0);
            const double dy = points(j, 1) - points(i, 1);
            const double dz = points(j, 2) - points(i, 2);
            cand.emplace_back(dx * dx + dy * dy + dz * dz, j);
        }
        // (distance, index) order makes the tie rule explicit.
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
        for (int j = 0; j < k; ++j)
            graph.neighbors[static_cast<size_t>(i) * k + j] = cand[static_cast<size_t>(j)].second;
    }
    return graph;
}

} // namespace cpn::nn
