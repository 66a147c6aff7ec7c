#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hardy/scenarios.hpp"

namespace hardy::meas {

// Binned representation of a push-forward measure chi = v_* mu on the line.
struct PushforwardMeasure {
    std::vector<double> edges;   // increasing, size m+1
    std::vector<double> masses;  // size m, nonnegative
    bool infinite_on_range = true;  // measure continues past the last edge

    double total() const;
    double V(double t) const;        // cumulative mass from edges.front()
    double S(double t) const;        // mass of [t, t+1]
    double density(size_t bin) const;
    size_t bins() const { return masses.size(); }
};

// one monotone boundary-approach zone of the radial variable
struct Zone {
    double r_lo, r_hi;
    std::function<double(double)> v_of_r;  // monotone on (r_lo, r_hi)
};

// bin masses by quadrature of the base density over v-preimages (per zone,
// summed); errors if v is not monotone on a zone
PushforwardMeasure pushforward(const std::vector<Zone>& zones,
                               const std::function<double(double)>& base_density,
                               const std::vector<double>& edges);

// bin masses from a closed-form pushforward density g(t) (scenario route)
PushforwardMeasure pushforward_density(const std::function<double(double)>& g,
                                       const std::vector<double>& edges);

struct GrowthStats {
    std::vector<double> r, V, S;
    double sigma = 0.0;            // lim-sup-style fitted exponential rate
    bool subexponential = false;   // sigma < 0.05
    bool low_confidence = false;   // support below ~2 decades
};
GrowthStats volume_growth(const PushforwardMeasure& chi);

struct CriterionRow {
    double a, d, eps;
    bool found = false;
    double b = 0.0;      // first represented b >= a+d with S(b)/(V(b)-V(a)) <= eps
    double ratio = 0.0;  // the ratio at b (or the final ratio when not found)
};
// Lemma-2.6 window criterion; delegates to the quasimode window search
CriterionRow growth_criterion(const PushforwardMeasure& chi, double a, double d, double eps);

struct EpsExpResult {
    bool verdict = false;   // C finite on the represented range
    double C = 0.0;         // smallest constant with C^{-1}e^{-eps t} <= chi(t) <= C e^{eps t}
};
// density reading of the eps-exponential growth/decay bounds
EpsExpResult eps_exp_check(const PushforwardMeasure& chi, double eps);

// Agmon frame of a catalog scenario: h = (1/2) X_1^{-1}(u0/u1), rho = |h(x)-h(y)|
struct AgmonFrame {
    scen::ProfilePair pair;
    scen::OperatorSpec op;
    scen::DomainSpec dom;
    bool complete = false;  // |h| -> infinity at the scenario's infinity
    double h(double r) const;
    double rho(double x, double y) const;
    // |grad rho|^2_{A/W} at r (eikonal check; equals 1 where W = |grad h|^2_A)
    double eikonal(double r) const;
};
AgmonFrame agmon_frame(const scen::Scenario& s);

struct SigmaReport {
    double sigma0 = 0, sigma1 = 0;  // decay/growth rates of mu_0, mu_1
    double mu0_mass = 0;
    bool mu0_finite = false, mu1_infinite = false;
    double lambda_inf_lower = 0;    // exterior-pencil bottom (frame units)
    bool brooks_ok = false;         // lambda_inf_lower <= sigma_i^2/4 + tol
    bool equality_ok = false;       // sigma_i^2/4 = 1 within tol (frame-normalized)
    bool complete = false;
};
// growth rates sigma_0, sigma_1 with the Brooks-type inequality and the
// equality case, all in frame-normalized units (W = W(u0,u1))
SigmaReport sigma_rates(const scen::Scenario& s, double tol = 0.05);

// bottom of the frame-normalized pencil on the exterior region where the
// boundary distance (or 1/r) is below eps_ext -- the Persson-side estimate
double exterior_bottom(const scen::Scenario& s, double eps_ext, int N);

}  // namespace hardy::meas
