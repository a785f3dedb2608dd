#pragma once

#include "momkde/grid.hpp"
#include "momkde/types.hpp"

#include <vector>

namespace momkde {

inline constexpr double mass_floor = 1e-12;
//! KL is reported infinite once the p-mass sitting on nodes where q is
//! numerically zero exceeds this.
inline constexpr double support_mismatch_mass = 1e-6;
inline constexpr double metric_normalization_tolerance = 1e-2;

//! Natural-log KL(p || q) by trapezoidal quadrature; +inf when supports
//! disagree.
double kl_divergence(const Vector& p, const Vector& q, const EvaluationGrid& grid);

//! Base-2 Jensen-Shannon divergence, in [0, 1].
double js_divergence(const Vector& p, const Vector& q, const EvaluationGrid& grid);

/// ROC AUC of the detector flagging low density as abnormal: the
/// probability that a random outlier (label 1) scores below a random inlier,
/// ties counted one half. Average-rank statistic, O(m log m).
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

} // namespace momkde
