#ifndef CPN_CPL_CPL_HPP
#define CPN_CPL_CPL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cpn/core/errors.hpp"
#include "cpn/core/matrix.hpp"

namespace cpn::cpl {

enum class Mode { CPL, WCPL };

std::string to_string(Mode mode);

/// Full diagnostic record of one critical-point selection.
///
/// Pipeline: column maxima/argmaxes over the selection features, dedup to the
/// critical set, score by summed contributions, ascending stable sort, then
/// nearest-neighbor resize to k output indices (WCPL first repeats each index
/// by its contribution count).
struct CriticalSelection {
    std::vector<double> f_max;       // per-column maxima, length d
    std::vector<int> idx;            // argmax row per column, length d
    std::vector<int> uidx;           // unique critical indices, first-occurrence order
    std::vector<double> f_s;         // summed contribution per unique index
    std::vector<int> fr;             // contribution counts (WCPL weighting)
    std::vector<int> ordered;        // uidx reordered by ascending score
    std::vector<double> sorted_f_s;
    std::vector<int> sorted_fr;
    std::vector<int> resized;        // length-k output indices
    Mode mode = Mode::CPL;

    /// Diagnostic dump; field names match the member names above.
    std::string to_json() const;
};

class IndexOutOfRange : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// f_max[i] = max of column i; idx[i] = smallest row index attaining it.
void column_max_argmax(const Matrix& f_sel, std::vector<double>& f_max,
                       std::vector<int>& idx);

/// uidx = distinct argmax rows in first-occurrence order;
/// f_s[j] = sum of f_max over columns won by uidx[j]; fr[j] = their count.
void aggregate_unique(const std::vector<double>& f_max, const std::vector<int>& idx,
                      std::vector<int>& uidx, std::vector<double>& f_s,
                      std::vector<int>& fr);

/// Stable ascending sort by score; uidx and fr are permuted alongside.
void sort_by_score(std::vector<int>& uidx, std::vector<double>& f_s,
                   std::vector<int>& fr);

/// Integer-array nearest-neighbor resize: out[i] = src[min(m-1, i*m/k)].
/// Up-samples by replication, down-samples by decimation.
std::vector<int> nn_resize(const std::vector<int>& src, int k);

/// WCPL expansion: repeats each index by its contribution count.
std::vector<int> weighted_expand(const std::vector<int>& suidx,
                                 const std::vector<int>& sorted_fr);

/// Runs the whole selection pipeline. Deterministic and total on valid input.
CriticalSelection cpl_select(const Matrix& f_sel, int k, Mode mode);

/// F_O row i = F_I row indices[i]. Throws IndexOutOfRange.
Matrix gather_rows(const Matrix& f_in, const std::vector<int>& indices);

/// Column maxima of the gathered matrix.
std::vector<double> output_max(const Matrix& f_out);

/// Baseline: k indices drawn without replacement (with replacement once the
/// pool is exhausted, i.e. k > n), seeded.
std::vector<int> downsample_random(int n, int k, uint64_t seed);

/// Baseline: farthest point sampling, greedy max-min Euclidean distance,
/// starting from index 0. points is n x 3.
std::vector<int> downsample_fps(const Matrix& points, int k);

} // namespace cpn::cpl

#endif
