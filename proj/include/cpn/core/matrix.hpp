#ifndef CPN_CORE_MATRIX_HPP
#define CPN_CORE_MATRIX_HPP

#include <cassert>
#include <cstddef>
#include <new>
#include <span>
#include <vector>

namespace cpn {

/// 64-byte aligned allocator. Keeping every buffer on the same alignment
/// makes vectorized kernels (Eigen's GEMM in particular) take the same
/// code path on every allocation, so results are bit-reproducible run to run.
template <typename T>
struct Aligned64Allocator {
    using value_type = T;
    static constexpr std::align_val_t kAlign{64};

    Aligned64Allocator() = default;
    template <typename U>
    Aligned64Allocator(const Aligned64Allocator<U>&) {}

    T* allocate(size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), kAlign));
    }
    void deallocate(T* p, size_t n) {
        ::operator delete(p, n * sizeof(T), kAlign);
    }
    bool operator==(const Aligned64Allocator&) const { return true; }
};

using AlignedDoubles = std::vector<double, Aligned64Allocator<double>>;

/// Dense row-major matrix of doubles. Rows are points, columns are features.
struct Matrix {
    int rows = 0;
    int cols = 0;
    AlignedDoubles data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

    static Matrix zeros(int r, int c) { return Matrix(r, c); }

    double& operator()(int r, int c) {
        assert(r >= 0 && r < rows && c >= 0 && c < cols);
        return data[static_cast<size_t>(r) * cols + c];
    }
    double operator()(int r, int c) const {
        assert(r >= 0 && r < rows && c >= 0 && c < cols);
        return data[static_cast<size_t>(r) * cols + c];
    }

    std::span<double> row(int r) {
        return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
    }
    std::span<const double> row(int r) const {
        return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
    }

    size_t size() const { return data.size(); }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    bool operator==(const Matrix& o) const {
        return rows == o.rows && cols == o.cols && data == o.data;
    }
};

} // namespace cpn

#endif
