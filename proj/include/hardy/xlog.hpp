#pragma once

#include <cstdint>
#include <vector>

namespace hardy::xlog {

// Iterated normalized logarithm: X_1(t) = 1/(1 - log t), X_{i+1} = X_1 o X_i,
// X_0 == 1. All maps send (0,1] into (0,1] and fix t = 1.

// X_i(t) for t in (0,1], i >= 0; relative error <= 1e-14.
double x_eval(int i, double t);

// prod_{k=1..i} X_k(t); empty product (i = 0) is 1.
double x_prod(int i, double t);

// closed-form derivative X_i'(t) = (1/t) X_1(t)...X_{i-1}(t) X_i^2(t), i >= 1;
// X_0' == 0. Domain error at t in {0,1}.
double x_deriv(int i, double t);

// X_1(t)...X_k(t) for k = 1..i plus the partial sums R_k = sum_{j<=k} prod_j,
// evaluated in one sweep (extended precision internally).
struct Chain {
    std::vector<double> x;     // x[k-1] = X_k(t), k = 1..i
    std::vector<double> prod;  // prod[k-1] = X_1...X_k(t)
    std::vector<double> rsum;  // rsum[k-1] = R_k(t)
};
Chain chain(int i, double t);

struct SeriesState {
    double t = 0;
    std::vector<double> partial_sums;
    double sum = 0;              // last partial sum
    double remainder_bound = 0;  // tail estimate (heuristic, see flag)
    bool converged = false;      // term fell below tol*sum before the cap
    bool tail_heuristic = true;  // the tail estimate has no certified rate
    long terms = 0;
};

// Sum_{k>=1} X_1(t)...X_k(t), t in [0,1). Stops when term < tol*sum or the
// term cap is hit (non-convergence flagged, never silent). The remainder
// estimate extrapolates the ~c/k^2 term decay from the last term ratios.
SeriesState series_sum(double t, double tol, long term_cap = 1000000);

// Smallest D (bisection width 1e-10 relative) with
//   R_{i_max}(delta/D) <= 1 - margin for all delta <= delta_max,
// i_max < 0 meaning "all i" (the full series). Homogeneous of degree 1 in
// delta_max since the series depends only on delta/D.
double select_D(double delta_max, int i_max, double margin);

}  // namespace hardy::xlog
