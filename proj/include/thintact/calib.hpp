#pragma once

#include <utility>
#include <vector>

#include "thintact/mat.hpp"
#include "thintact/sysmat.hpp"

namespace thintact {

enum class SlitAxis { Horizontal, Vertical };

/// Measurement images of a scanning horizontal slit (N images) and a scanning
/// vertical slit (M images), all R x S.
struct CalibSet {
    std::vector<Mat> horizontal;
    std::vector<Mat> vertical;

    void validate() const;
};

struct CalibOptions {
    int max_iterations = 50;
    double tolerance = 1e-4;  // relative Frobenius change of all four matrices
};

struct CalibResult {
    SystemMatrices sm;
    bool converged = false;
    int iterations = 0;
    double last_change = 0.0;
};

/// Rank-1 binary scene with exactly one active row (horizontal) or column (vertical).
Mat make_slit_scene(SlitAxis axis, int index, int scene_rows, int scene_cols);

/// Per image: p_o = Y q_o / (q_o' q_o); deflate; p_c = Y q_c / (q_c' q_c).
/// Returns the column-stacked (Po, Pc).
std::pair<Mat, Mat> decompose_given_qo_qc(const std::vector<Mat>& images,
                                          const std::vector<double>& q_o,
                                          const std::vector<double>& q_c);

/// Initial estimates (q_o = 1, q_c from the deflated center image's first right
/// singular vector) followed by alternating refinement with Frobenius rebalancing.
CalibResult calibrate(const CalibSet& cs, const CalibOptions& opts = {});

/// Forward-renders a synthetic CalibSet from known system matrices.
CalibSet synthesize_calib_set(const SystemMatrices& sm, double noise_sigma = 0.0,
                              std::uint64_t seed = 0);

}  // namespace thintact
