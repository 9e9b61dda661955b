#pragma once

#include <string>

#include "qrng/g2.hpp"

namespace qrng {

/// Weighted least-squares fit of g2(lag) = 1 - a * exp(-|lag|/tau0).
struct AntibunchFit {
    double contrast_a = 0.0;   ///< a, constrained to [0, 1]
    double tau0_ns = 0.0;      ///< recovery time, > 0
    double g2_at_zero = 1.0;   ///< 1 - a, by definition
    double residual_rms = 0.0; ///< rms of weighted residuals
    double stderr_a = 0.0;
    double stderr_tau0 = 0.0;
    int iterations = 0;
    bool converged = false;
    bool at_bound = false;       ///< a pinned at 0 or 1 by the constraint
    bool unidentifiable = false; ///< no usable dip; tau0 is meaningless

    std::string to_json() const;
};

/// Gauss-Newton with backtracking line search on Poisson-weighted residuals
/// (sigma from raw counts, zero-count bins weighted as one count).
/// Initialization: a0 from the curve minimum, tau0 from the first lag where
/// the dip recovers to 1 - a0/e. Converges when the relative parameter step
/// drops below 1e-8; throws FitError with the iteration trace after 200
/// iterations without convergence. A flat curve is returned flagged
/// unidentifiable rather than throwing.
AntibunchFit fit_antibunching(const G2Curve& curve);

}  // namespace qrng
