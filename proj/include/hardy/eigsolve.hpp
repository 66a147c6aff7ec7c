#pragma once

#include <vector>

#include "hardy/discretize.hpp"

namespace hardy::eig {

// Count of generalized eigenvalues of (K, M) strictly below lambda, by the
// inertia of the LDL^T factorization of K - lambda M. Exact zero pivots are
// perturbed by eta_piv = 1e-14 * |K|_max; the perturbation used is reported.
int inertia(const fem::Pencil& p, double lambda, double* pert_used = nullptr);

struct EigValue {
    double value = 0;   // bracket midpoint
    double lo = 0, hi = 0;  // final bisection bracket
    int mult_hint = 1;  // inertia jump across the bracket
};

// k smallest eigenvalues by bisection on the inertia count, each bracketed to
// relative width <= tol
std::vector<EigValue> eig_bottom(const fem::Pencil& p, int k, double tol = 1e-12);

// inertia(threshold): size of the spectrum below `threshold`
int count_below(const fem::Pencil& p, double threshold);

struct EigVector {
    std::vector<double> x;   // unit M-norm, sign-normalized (max entry positive)
    double residual = 0;     // ||Kx - lambda Mx|| / ||Kx||
    int mult_hint = 1;       // >1: near-multiple eigenvalue, one vector returned
    bool converged = false;
};

// inverse iteration on K - lambda M (lambda within tol of an eigenvalue)
EigVector eigvec(const fem::Pencil& p, double lambda, int max_iter = 50);

// generalized trace tr(M^{-1} K) (equals the eigenvalue sum); test oracle aid
double generalized_trace(const fem::Pencil& p);

}  // namespace hardy::eig
