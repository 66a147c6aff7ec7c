#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hardy/measures.hpp"
#include "hardy/scenarios.hpp"

namespace hardy::qm {

// C^2 cutoff on [a,b] (unit ramps in its own coordinate): quintic smoothstep
// up on [a,a+1], 1 on [a+1,b-1], down on [b-1,b].
struct Cutoff {
    double a, b;
    double c_bound;  // sup|psi'| + sup|psi''| = 15/8 + 10/sqrt(3)
    double value(double t) const;
    double d1(double t) const;
    double d2(double t) const;
};
Cutoff build_cutoff(double a, double b);

// Ground-state frame of a scenario: coordinate tv = (1/2) X_1^{-1}(u0/u1)
// with |grad tv|^2_{A/W} = 1, measure chi~ = tv_*(u0 u1 W nu).
struct Frame {
    std::string scenario;
    double kappa = 1.0;   // scenario weight = kappa * frame weight
    double tv_min = 0.0;  // windows start at or above this
    struct TZone {
        std::function<double(double)> density;  // d chi~ / d tv
        std::function<double(double)> Lv;       // (L~ tv)(tv)
        std::function<double(double)> V;        // frame potential
        std::function<double(double)> gdef;     // |grad tv|^2_{A/W} - 1
    };
    std::vector<TZone> tzones;
    // r-space route for the dual-residual identity (moderate windows only)
    struct RZone {
        double r_lo, r_hi;
        std::function<double(double)> tv_of_r, dtv_dr, d2tv_dr2;
        std::function<double(double)> m_r;    // density of u0 u1 W nu wrt dr
        std::function<double(double)> aW_r;   // (a/W)(r)
        std::function<double(double)> V_r;
    };
    std::vector<RZone> rzones;
    double window_mass(double A, double B) const;
};
Frame make_frame(const scen::Scenario& s);

struct QuasimodeTerms {
    double bulk_Lv = 0, grad_defect = 0, cutoff1 = 0, cutoff2 = 0, potential = 0;
};

struct ResidualResult {
    double ratio = 0;  // ||(L - eta) phi|| / ||phi|| in the frame norm
    double num = 0, den = 0;
    QuasimodeTerms terms;  // L2 norms of the residual decomposition pieces
    double ramp = 0;       // ramp length used (tv units)
};

// default ramp scale: sqrt-law, capped so the plateau keeps 1/4 of the window
double default_ramp(double window_length);

// residual of phi = psi(tv) e^{i mu tv}, mu = sqrt(eta), over window [A,B]
ResidualResult quasimode_residual(const Frame& f, double eta, double A, double B,
                                  double ramp = 0.0);

// same residual through the radial operator route (independent computation)
double residual_by_operator_route(const Frame& f, double eta, double A, double B, double ramp);

struct ProbeCell {
    double A, B, ratio, mass;
    QuasimodeTerms terms;
};
struct ProbeRow {
    double eta;              // frame units (lambda_frame - 1)
    double lambda_scenario;  // (1 + eta)/kappa
    std::vector<ProbeCell> cells;
    bool certified = false;
    double slope = 0.0;      // fitted d log(ratio) / d log(mass)
    double supV_last = 0.0;  // Persson-side check: frame potential on the last window
    double supLv_last = 0.0;
};
struct QuasimodeReport {
    std::string scenario;
    double tol;
    std::vector<ProbeRow> rows;
    bool all_certified = false;
};
QuasimodeReport ess_spectrum_probe(const Frame& f, const std::vector<double>& eta_grid,
                                   const std::vector<double>& window_lengths, double tol);

struct WindowSearchResult {
    bool found = false;
    double b = 0.0;
    double ratio = 0.0;  // S(b)/(V(b)-V(a)) at the returned b (or last scanned)
};
// smallest represented b >= a+d with S(b)/(V(b)-V(a)) <= eps; "growth
// obstruction" verdict (found = false) when the scan exhausts the support
WindowSearchResult window_search(const meas::PushforwardMeasure& chi, double a, double eps,
                                 double d);

struct TransferResult {
    double ratio_w1 = 0;   // ||(W1^{-1}P - lambda)u|| / ||u|| in L^2(W1)
    double ratio_w2 = 0;   // same with W2
    double bound_w2 = 0;   // the proof's bound on ratio_w2
    double sup_dev = 0;    // sup over the window of |W1/W2 - 1|
    bool bound_holds = false;
};
// Weyl-sequence transfer between equivalent weights: W2 = rho(tv) * W1
TransferResult transfer_residual(const Frame& f, const std::function<double(double)>& rho,
                                 double lambda_frame, double A, double B, double ramp = 0.0);

}  // namespace hardy::qm
