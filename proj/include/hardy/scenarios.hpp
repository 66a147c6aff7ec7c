#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hardy::scen {

enum class DomainKind { Interval, RadialBall, RadialAnnulus, RadialExterior };

// Radially reducible geometry carrying the base measure density (sphere-area
// constant included) and the gradient profile gamma = |grad r|^2 of model ends.
struct DomainSpec {
    DomainKind kind = DomainKind::Interval;
    int n = 1;             // ambient dimension (1 for Interval)
    double p0 = 0.0;       // interval: (0,l) -> p0=0, p1=l; ball: (0,R);
    double p1 = 1.0;       // annulus: (a,b); exterior: (r_min, r_max)
    double model_c = 0.0;  // exterior: gamma(r) = 1 - c/r

    double measure_density(double r) const;
    double measure_logderiv(double r) const;  // (d/dr) log measure_density
    double gradient_profile(double r) const;  // gamma(r); 1 off model ends

    // distance to the boundary and its radial calculus (not for exterior kinds)
    double delta(double r) const;
    double ddelta(double r) const;        // +/-1 off the ridge set
    double neg_lap_delta(double r) const; // -(Lap delta)(r)
    double sup_delta() const;
    bool has_ridge() const;
    double ridge() const;

    bool is_exterior() const { return kind == DomainKind::RadialExterior; }
    std::string str() const;
};

DomainSpec make_interval(double length);
DomainSpec make_ball(int n, double R);
DomainSpec make_annulus(int n, double a, double b);
DomainSpec make_model_end(int n, double c, double r_min, double r_max);

// sphere area constant omega_{n-1} = |S^{n-1}|
double sphere_area(int n);

// P u = -(1/w) (w a u')' + c u on the radial measure w(r) dr
struct OperatorSpec {
    std::function<double(double)> a = [](double) { return 1.0; };
    std::function<double(double)> da = [](double) { return 0.0; };
    std::function<double(double)> c = [](double) { return 0.0; };
    std::string label = "-lap";
};

OperatorSpec laplace_op();
OperatorSpec model_end_op(const DomainSpec& dom);              // a = gamma
OperatorSpec shifted_op(std::function<double(double)> shift,  // P = -Lap - shift
                        const std::string& label);

enum class WeightFamily {
    InverseSquareDelta,  // 1/(4 delta^2)
    IteratedLogJ,        // J_i = (1/(4 delta^2)) X_1^2...X_i^2(delta/D)
    IteratedLogW,        // W_i = sum_{k<=i} J_k
    ClassicalHardy,      // ((n-2)/2)^2 / r^2
    RadialOriginH,       // origin variant H_i built from |x|/D
    Multipolar,          // pointwise family on R^n
    Supersolution,       // W(u0,u1) from a profile pair
    PowerDelta,          // delta^alpha
};

struct WeightSpec {
    WeightFamily family = WeightFamily::InverseSquareDelta;
    int level = 0;
    double D = 1.0;
    double alpha = 0.0;
    double scale = 1.0;  // overall multiplier (scenario-level normalization)
    std::vector<std::array<double, 3>> poles;
    std::string name() const;
};

struct WeightEval {
    double w;
    double dw;  // d/dr
};
using WeightFn = std::function<WeightEval(double)>;

// closed-form evaluator for W on the domain; parameter errors per family
// (IteratedLog requires D >= sup delta; ClassicalHardy requires r inside).
WeightFn build_weight(const DomainSpec& dom, const WeightSpec& spec);

// -------- closed-form radial profiles with two derivatives --------
struct ProfileEval {
    double v, d1, d2;
};
using Profile = std::function<ProfileEval(double)>;

struct ProfilePair {
    Profile u0, u1;
    std::string label;
};

Profile profile_one();
Profile profile_exp(double sigma);                              // e^{sigma r}
Profile profile_r_power(double p);                              // r^p
Profile profile_delta_power(const DomainSpec& dom, double p, double scale);  // (delta/scale)^p
Profile profile_bft_u0(const DomainSpec& dom, int i, double D);  // U_{0,i}
Profile profile_bft_u1(const DomainSpec& dom, int i, double D);  // U_{1,i}
Profile profile_origin_z(int n, int i, double D);                // Z_i
Profile profile_origin_z1(int n, int i, double D);               // Z_i X_{i+1}^{-1}(r/D)

// W(u0,u1) = (1/4) a(r) (d/dr log(u0/u1))^2
WeightFn supersolution_weight(const ProfilePair& pair, const OperatorSpec& op);

// -------- residual reports --------
struct ResidualReport {
    double max_resid = 0.0;       // max over samples of |residual| / local scale
    std::vector<double> samples;  // the sample coordinates used
    std::vector<double> resids;
    bool pass(double tol) const { return max_resid < tol; }
};

// pointwise check of the two ground-state identities of the supersolution
// construction, against the operator applied through the closed-form
// derivative registry
struct SupconstructReport {
    ResidualReport identity1, identity2;
};
SupconstructReport verify_supconstruct(const ProfilePair& pair, const OperatorSpec& op,
                                       const DomainSpec& dom, const std::vector<double>& points);

// residuals of the two iterated-log supersolution identities (boundary-distance
// version), the H_i = W_i match, or the origin variant on |x|/D
struct BftReport {
    ResidualReport form1, form2, h_equals_w;
};
BftReport verify_bft_identities(int i, double D, const DomainSpec& dom,
                                const std::vector<double>& points);
BftReport verify_origin_identities(int i, double D, int n, const std::vector<double>& points);

struct MultipolarResult {
    double v;            // eigenfunction value
    double weight;       // W(x)
    double resid_rel;    // |(1/W)(-Lap v)/v - ((n-2)/N)^2| / ((n-2)/N)^2
    double eigenvalue;   // ((n-2)/N)^2
    double CN;           // N^2/(4(N-1)) (essential-bottom factor)
};
MultipolarResult multipolar_residual(int n, const std::vector<std::array<double, 3>>& poles,
                                     const std::array<double, 3>& x);

// min/max of r^4 W over rays (far-field equivalence W ~ |x|^-4)
struct FarFieldReport {
    double lo, hi;  // bounds on r^4 W over sampled rays/radii
    double spread() const { return hi / lo; }
};
FarFieldReport multipolar_farfield(int n, const std::vector<std::array<double, 3>>& poles,
                                   int nrays, double r_lo, double r_hi, int nsamples);

struct AppendixResult {
    double lhs;       // -Lap(phi)/phi via the derivative recursion
    double rhs;       // (n-2)/(2r^2) sum prod_i + (1/(4r^2)) sum prod_i^2
    double resid_rel;
    double margin;    // the nonnegative (1/(4r^2)) sum prod_i^2 term
};
AppendixResult appendix_identity(int n, int k, double r, double D);

struct ModelEndReport {
    std::vector<double> r_grid;
    std::vector<double> cond1, cond2, cond3;  // the three decay quantities
    double slope1, slope2, slope3;            // log-log fitted slopes
    double supersol_resid;                    // max residual of the exact identity
    double pushforward_const;                 // limit density of the v-pushforward
};
ModelEndReport model_end_conditions(const DomainSpec& dom, const std::vector<double>& r_grid);

// -------- scenario catalog --------
struct Scenario {
    std::string name;
    DomainSpec domain;
    OperatorSpec op;
    WeightSpec weight;
    double D = 1.0;
    int level = 0;
    bool pointwise_only = false;  // multipolar: no pencil
    // normalized supersolution frame (u0,u1) with W_f = W(u0,u1); the scenario
    // weight is kappa * W_f with constant kappa
    bool has_frame = false;
    double kappa = 1.0;
    double lambda0 = 0.0;  // conforming lower-bound anchor in scenario units
    ProfilePair frame_pair;   // valid when has_frame
    // ends of the domain where the pencil weight is singular (mesh grading)
    bool sing_lo = false, sing_hi = false;
};

// catalog addressable by name ("interval-j1", "ball3-j2", "annulus3-delta2",
// "multipolar-2p-n3", "modelend-n3-c1", ...)
Scenario make_scenario(const std::string& name);
std::vector<std::string> catalog_names();

}  // namespace hardy::scen
