#ifndef CPN_NN_KNN_HPP
#define CPN_NN_KNN_HPP

#include <vector>

#include "cpn/core/errors.hpp"
#include "cpn/core/matrix.hpp"

namespace cpn::nn {

class KTooLarge : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Row-major n x k neighbor table; row i holds the k nearest points to i by
/// Euclidean distance, self excluded, nearest first.
struct KnnGraph {
    int n = 0;
    int k = 0;
    std::vector<int> neighbors;

    int at(int i, int j) const { return neighbors[static_cast<size_t>(i) * k + j]; }
};

/// Exact brute-force k-NN by squared distance; ties broken by smaller index.
/// Requires k < n.
KnnGraph knn_build(const Matrix& points, int k);

} // namespace cpn::nn

#endif
