#include "hardy/scenarios.hpp"

#include <cmath>
#include <stdexcept>

#include "hardy/util.hpp"
#include "hardy/xlog.hpp"

namespace hardy::scen {

namespace {
constexpr double kPi = 3.14159265358979323846;

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}
}  // namespace

double sphere_area(int n) {
    // |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)
    require(n >= 1, "sphere_area: n >= 1");
    return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
}

double DomainSpec::measure_density(double r) const {
    switch (kind) {
        case DomainKind::Interval:
            return 1.0;
        case DomainKind::RadialBall:
        case DomainKind::RadialAnnulus:
            return sphere_area(n) * std::pow(r, n - 1);
        case DomainKind::RadialExterior:
            return sphere_area(n) * std::pow(r - model_c, n - 1);
    }
    return 1.0;
}

double DomainSpec::measure_logderiv(double r) const {
    switch (kind) {
        case DomainKind::Interval:
            return 0.0;
        case DomainKind::RadialBall:
        case DomainKind::RadialAnnulus:
            return (n - 1) / r;
        case DomainKind::RadialExterior:
            return (n - 1) / (r - model_c);
    }
    return 0.0;
}

double DomainSpec::gradient_profile(double r) const {
    if (kind == DomainKind::RadialExterior) return 1.0 - model_c / r;
    return 1.0;
}

double DomainSpec::delta(double r) const {
    switch (kind) {
        case DomainKind::Interval:
            return std::min(r - p0, p1 - r);
        case DomainKind::RadialBall:
            return p1 - r;
        case DomainKind::RadialAnnulus:
            return std::min(r - p0, p1 - r);
        case DomainKind::RadialExterior:
            throw std::domain_error("delta undefined on model ends");
    }
    return 0.0;
}

double DomainSpec::ddelta(double r) const {
    switch (kind) {
        case DomainKind::Interval:
        case DomainKind::RadialAnnulus:
            return (r - p0 < p1 - r) ? 1.0 : -1.0;
        case DomainKind::RadialBall:
            return -1.0;
        case DomainKind::RadialExterior:
            throw std::domain_error("delta undefined on model ends");
    }
    return 0.0;
}

double DomainSpec::neg_lap_delta(double r) const {
    switch (kind) {
        case DomainKind::Interval:
            return 0.0;
        case DomainKind::RadialBall:
            return (n - 1) / r;
        case DomainKind::RadialAnnulus:
            // inner zone delta = r - a has Lap delta = (n-1)/r > 0
            return (r - p0 < p1 - r) ? -(n - 1) / r : (n - 1) / r;
        case DomainKind::RadialExterior:
            throw std::domain_error("delta undefined on model ends");
    }
    return 0.0;
}

double DomainSpec::sup_delta() const {
    switch (kind) {
        case DomainKind::Interval:
        case DomainKind::RadialAnnulus:
            return 0.5 * (p1 - p0);
        case DomainKind::RadialBall:
            return p1;
        case DomainKind::RadialExterior:
            throw std::domain_error("delta undefined on model ends");
    }
    return 0.0;
}

bool DomainSpec::has_ridge() const {
    return kind == DomainKind::Interval || kind == DomainKind::RadialAnnulus;
}

double DomainSpec::ridge() const {
    require(has_ridge(), "ridge: domain has no ridge set");
    return 0.5 * (p0 + p1);
}

std::string DomainSpec::str() const {
    switch (kind) {
        case DomainKind::Interval:
            return "interval(" + format_double(p1 - p0) + ")";
        case DomainKind::RadialBall:
            return "ball(n=" + std::to_string(n) + ",R=" + format_double(p1) + ")";
        case DomainKind::RadialAnnulus:
            return "annulus(n=" + std::to_string(n) + "," + format_double(p0) + "," +
                   format_double(p1) + ")";
        case DomainKind::RadialExterior:
            return "modelend(n=" + std::to_string(n) + ",c=" + format_double(model_c) + ")";
    }
    return "?";
}

DomainSpec make_interval(double length) {
    require(length > 0, "interval length must be positive");
    DomainSpec d;
    d.kind = DomainKind::Interval;
    d.n = 1;
    d.p0 = 0;
    d.p1 = length;
    return d;
}

DomainSpec make_ball(int n, double R) {
    require(n >= 2 && R > 0, "ball: need n >= 2, R > 0");
    DomainSpec d;
    d.kind = DomainKind::RadialBall;
    d.n = n;
    d.p0 = 0;
    d.p1 = R;
    return d;
}

DomainSpec make_annulus(int n, double a, double b) {
    require(n >= 2 && a > 0 && b > a, "annulus: need n >= 2, 0 < a < b");
    DomainSpec d;
    d.kind = DomainKind::RadialAnnulus;
    d.n = n;
    d.p0 = a;
    d.p1 = b;
    return d;
}

DomainSpec make_model_end(int n, double c, double r_min, double r_max) {
    require(n >= 3 && r_min > c && r_max > r_min, "model end: need n >= 3, c < r_min < r_max");
    require(c >= 0, "model end: c >= 0");
    DomainSpec d;
    d.kind = DomainKind::RadialExterior;
    d.n = n;
    d.p0 = r_min;
    d.p1 = r_max;
    d.model_c = c;
    return d;
}

OperatorSpec laplace_op() { return OperatorSpec{}; }

OperatorSpec model_end_op(const DomainSpec& dom) {
    OperatorSpec op;
    const double c = dom.model_c;
    op.a = [c](double r) { return 1.0 - c / r; };
    op.da = [c](double r) { return c / (r * r); };
    op.label = "-div(gamma grad)";
    return op;
}

OperatorSpec shifted_op(std::function<double(double)> shift, const std::string& label) {
    OperatorSpec op;
    op.c = [s = std::move(shift)](double r) { return -s(r); };
    op.label = label;
    return op;
}

std::string WeightSpec::name() const {
    switch (family) {
        case WeightFamily::InverseSquareDelta:
            return "inverse-square-delta";
        case WeightFamily::IteratedLogJ:
            return "iterated-log-j" + std::to_string(level);
        case WeightFamily::IteratedLogW:
            return "iterated-log-w" + std::to_string(level);
        case WeightFamily::ClassicalHardy:
            return "classical-hardy";
        case WeightFamily::RadialOriginH:
            return "radial-origin-h" + std::to_string(level);
        case WeightFamily::Multipolar:
            return "multipolar";
        case WeightFamily::Supersolution:
            return "supersolution";
        case WeightFamily::PowerDelta:
            return "power-delta(" + format_double(alpha) + ")";
    }
    return "?";
}

namespace {
WeightFn build_weight_unscaled(const DomainSpec& dom, const WeightSpec& spec);
}

WeightFn build_weight(const DomainSpec& dom, const WeightSpec& spec) {
    WeightFn base = build_weight_unscaled(dom, spec);
    if (spec.scale == 1.0) return base;
    const double s = spec.scale;
    return [base, s](double r) {
        WeightEval e = base(r);
        return WeightEval{s * e.w, s * e.dw};
    };
}

namespace {
WeightFn build_weight_unscaled(const DomainSpec& dom, const WeightSpec& spec) {
    switch (spec.family) {
        case WeightFamily::InverseSquareDelta:
            return [dom](double r) {
                const double d = dom.delta(r);
                require(d > 0, "weight: point outside domain");
                const double w = 0.25 / (d * d);
                return WeightEval{w, -2.0 * w / d * dom.ddelta(r)};
            };
        case WeightFamily::IteratedLogJ:
        case WeightFamily::IteratedLogW: {
            require(spec.D >= dom.sup_delta(), "iterated-log weight requires D >= sup delta");
            const bool cumulative = spec.family == WeightFamily::IteratedLogW;
            const int i = spec.level;
            const double D = spec.D;
            return [dom, i, D, cumulative](double r) {
                const double d = dom.delta(r);
                require(d > 0, "weight: point outside domain");
                const xlog::Chain c = xlog::chain(i, d / D);
                double w = 0, dw_ddelta = 0;
                for (int k = cumulative ? 0 : i; k <= i; ++k) {
                    const double pk = (k == 0) ? 1.0 : c.prod[k - 1];
                    const double rk = (k == 0) ? 0.0 : c.rsum[k - 1];
                    const double jk = 0.25 * pk * pk / (d * d);
                    w += jk;
                    dw_ddelta += 2.0 * jk / d * (rk - 1.0);
                }
                return WeightEval{w, dw_ddelta * dom.ddelta(r)};
            };
        }
        case WeightFamily::ClassicalHardy: {
            require(dom.n >= 3, "classical Hardy weight needs n >= 3");
            const double cst = 0.25 * (dom.n - 2) * (dom.n - 2);
            const double r_lo = dom.p0, r_hi = dom.p1;
            return [cst, r_lo, r_hi](double r) {
                require(r > r_lo && r <= r_hi, "weight: point outside domain");
                const double w = cst / (r * r);
                return WeightEval{w, -2.0 * w / r};
            };
        }
        case WeightFamily::RadialOriginH: {
            require(dom.n >= 3, "origin weight needs n >= 3");
            const double cst = 0.25 * (dom.n - 2) * (dom.n - 2);
            const int i = spec.level;
            const double D = spec.D;
            return [cst, i, D](double r) {
                require(r > 0 && r < D, "origin weight: need 0 < r < D");
                const xlog::Chain c = xlog::chain(i, r / D);
                double w = cst / (r * r);
                double dw = -2.0 * w / r;
                for (int k = 1; k <= i; ++k) {
                    const double jk = 0.25 * c.prod[k - 1] * c.prod[k - 1] / (r * r);
                    w += jk;
                    dw += 2.0 * jk / r * (c.rsum[k - 1] - 1.0);
                }
                return WeightEval{w, dw};
            };
        }
        case WeightFamily::PowerDelta: {
            const double al = spec.alpha;
            return [dom, al](double r) {
                const double d = dom.delta(r);
                require(d > 0, "weight: point outside domain");
                const double w = std::pow(d, al);
                return WeightEval{w, al * w / d * dom.ddelta(r)};
            };
        }
        case WeightFamily::Multipolar:
            throw std::invalid_argument(
                "multipolar weights are pointwise-only; use multipolar_residual");
        case WeightFamily::Supersolution:
            throw std::invalid_argument(
                "supersolution weights need a profile pair; use supersolution_weight");
    }
    throw std::invalid_argument("unknown weight family");
}
}  // namespace

// -------- profiles --------

Profile profile_one() {
    return [](double) { return ProfileEval{1.0, 0.0, 0.0}; };
}

Profile profile_exp(double sigma) {
    return [sigma](double r) {
        const double v = std::exp(sigma * r);
        return ProfileEval{v, sigma * v, sigma * sigma * v};
    };
}

Profile profile_r_power(double p) {
    return [p](double r) {
        const double v = std::pow(r, p);
        return ProfileEval{v, p * v / r, p * (p - 1) * v / (r * r)};
    };
}

Profile profile_delta_power(const DomainSpec& dom, double p, double scale) {
    return [dom, p, scale](double r) {
        const double d = dom.delta(r);
        const double s = dom.ddelta(r);
        const double v = std::pow(d / scale, p);
        return ProfileEval{v, p * v / d * s, p * (p - 1) * v / (d * d)};
    };
}

namespace {

// U_{0,i}(delta) = sqrt((delta/D) / (X_1...X_i)(delta/D)) with log-derivatives
// F = U'/U and G = U''/U taken in delta, then mapped to r by ddelta = +/-1.
struct BftLogDerivs {
    double F, G;  // d/d(delta)
};

BftLogDerivs bft_u0_logderivs(const xlog::Chain& c, int i, double d) {
    const double Ri = (i == 0) ? 0.0 : c.rsum[i - 1];
    double sum_pr = 0.0;  // sum_k prod_k * R_k
    for (int k = 1; k <= i; ++k) sum_pr += c.prod[k - 1] * c.rsum[k - 1];
    const double F = (1.0 - Ri) / (2.0 * d);
    const double dF = -(1.0 - Ri) / (2.0 * d * d) - sum_pr / (2.0 * d * d);
    return BftLogDerivs{F, dF + F * F};
}

}  // namespace

Profile profile_bft_u0(const DomainSpec& dom, int i, double D) {
    require(D >= dom.sup_delta(), "U_{0,i} requires D >= sup delta");
    return [dom, i, D](double r) {
        const double d = dom.delta(r);
        const double sg = dom.ddelta(r);
        const xlog::Chain c = xlog::chain(i, d / D);
        const double Pi = (i == 0) ? 1.0 : c.prod[i - 1];
        const double v = std::sqrt((d / D) / Pi);
        const BftLogDerivs ld = bft_u0_logderivs(c, i, d);
        return ProfileEval{v, sg * ld.F * v, ld.G * v};
    };
}

Profile profile_bft_u1(const DomainSpec& dom, int i, double D) {
    require(D >= dom.sup_delta(), "U_{1,i} requires D >= sup delta");
    return [dom, i, D](double r) {
        const double d = dom.delta(r);
        const double sg = dom.ddelta(r);
        const xlog::Chain c = xlog::chain(i + 1, d / D);
        const double Pi = (i == 0) ? 1.0 : c.prod[i - 1];
        const double Ri = (i == 0) ? 0.0 : c.rsum[i - 1];
        const double Xi1 = c.x[i];  // X_{i+1}(delta/D)
        const double v0 = std::sqrt((d / D) / Pi);
        const double v = v0 / Xi1;
        const BftLogDerivs ld = bft_u0_logderivs(c, i, d);
        // Y = 1/X_{i+1}: Y'/Y = -(P_i/delta) X_{i+1}, Y''/Y = (P_i/delta^2)(1-R_i) X_{i+1}
        const double YF = -(Pi / d) * Xi1;
        const double YG = (Pi / (d * d)) * (1.0 - Ri) * Xi1;
        const double F = ld.F + YF;
        const double G = ld.G + YG + 2.0 * ld.F * YF;
        return ProfileEval{v, sg * F * v, G * v};
    };
}

Profile profile_origin_z(int n, int i, double D) {
    require(n >= 3, "Z_i needs n >= 3");
    return [n, i, D](double r) {
        require(r > 0 && r < D, "Z_i: need 0 < r < D");
        const xlog::Chain c = xlog::chain(i, r / D);
        const double Pi = (i == 0) ? 1.0 : c.prod[i - 1];
        const double Ri = (i == 0) ? 0.0 : c.rsum[i - 1];
        double sum_pr = 0.0;
        for (int k = 1; k <= i; ++k) sum_pr += c.prod[k - 1] * c.rsum[k - 1];
        const double v = std::pow(r, 0.5 * (2 - n)) / std::sqrt(Pi);
        const double F = ((2.0 - n) - Ri) / (2.0 * r);
        const double dF = -((2.0 - n) - Ri) / (2.0 * r * r) - sum_pr / (2.0 * r * r);
        const double G = dF + F * F;
        return ProfileEval{v, F * v, G * v};
    };
}

Profile profile_origin_z1(int n, int i, double D) {
    Profile z = profile_origin_z(n, i, D);
    return [n, i, D, z](double r) {
        const ProfileEval ze = z(r);
        const xlog::Chain c = xlog::chain(i + 1, r / D);
        const double Pi = (i == 0) ? 1.0 : c.prod[i - 1];
        const double Ri = (i == 0) ? 0.0 : c.rsum[i - 1];
        const double Xi1 = c.x[i];
        const double Y = 1.0 / Xi1;
        const double YF = -(Pi / r) * Xi1;
        const double YG = (Pi / (r * r)) * (1.0 - Ri) * Xi1;
        const double F0 = ze.d1 / ze.v;
        const double G0 = ze.d2 / ze.v;
        const double v = ze.v * Y;
        const double F = F0 + YF;
        const double G = G0 + YG + 2.0 * F0 * YF;
        return ProfileEval{v, F * v, G * v};
    };
}

WeightFn supersolution_weight(const ProfilePair& pair, const OperatorSpec& op) {
    return [u0 = pair.u0, u1 = pair.u1, a = op.a, da = op.da](double r) {
        const ProfileEval e0 = u0(r), e1 = u1(r);
        require(e0.v > 0 && e1.v > 0, "supersolution weight: profiles must be positive");
        const double d0 = e0.d1 / e0.v, d1 = e1.d1 / e1.v;
        const double g = d0 - d1;  // (log(u0/u1))'
        const double dg = (e0.d2 / e0.v - d0 * d0) - (e1.d2 / e1.v - d1 * d1);
        const double av = a(r);
        return WeightEval{0.25 * av * g * g, 0.25 * (da(r) * g * g + 2.0 * av * g * dg)};
    };
}

// -------- residual checks --------

namespace {

// P u at r through the closed-form derivatives:
//   P u = -a u'' - (a' + a w'/w) u' + c u
double apply_op(const OperatorSpec& op, const DomainSpec& dom, double r, const ProfileEval& u) {
    const double av = op.a(r);
    return -av * u.d2 - (op.da(r) + av * dom.measure_logderiv(r)) * u.d1 + op.c(r) * u.v;
}

double rel(double resid, double scale) { return std::abs(resid) / std::max(scale, 1e-300); }

}  // namespace

SupconstructReport verify_supconstruct(const ProfilePair& pair, const OperatorSpec& op,
                                       const DomainSpec& dom,
                                       const std::vector<double>& points) {
    SupconstructReport rep;
    const WeightFn W = supersolution_weight(pair, op);
    for (double r : points) {
        const ProfileEval e0 = pair.u0(r), e1 = pair.u1(r);
        require(e0.v > 0 && e1.v > 0, "verify_supconstruct: profiles must be positive");
        const double V0 = apply_op(op, dom, r, e0) / e0.v;
        const double V1 = apply_op(op, dom, r, e1) / e1.v;
        const double w = W(r).w;
        const double d0 = e0.d1 / e0.v, d1 = e1.d1 / e1.v;

        // u_{1/2} = sqrt(u0 u1)
        const double m1 = 0.5 * (d0 + d1);
        const double dm1 = 0.5 * ((e0.d2 / e0.v - d0 * d0) + (e1.d2 / e1.v - d1 * d1));
        ProfileEval uh;
        uh.v = std::sqrt(e0.v * e1.v);
        uh.d1 = m1 * uh.v;
        uh.d2 = (dm1 + m1 * m1) * uh.v;
        const double P_uh = apply_op(op, dom, r, uh);
        const double rhs1 = (0.5 * (V0 + V1) + w) * uh.v;
        const double sc1 = std::max({std::abs(P_uh), std::abs(rhs1), std::abs(w * uh.v), 1e-30});
        rep.identity1.samples.push_back(r);
        rep.identity1.resids.push_back(rel(P_uh - rhs1, sc1));

        // u_{1/2} X_1^{-1}(u0/u1) with X_1^{-1}(t) = 1 - log t
        const double vlog = 1.0 - std::log(e0.v / e1.v);
        const double dv = -(d0 - d1);
        const double d2v = -((e0.d2 / e0.v - d0 * d0) - (e1.d2 / e1.v - d1 * d1));
        ProfileEval wprof;
        wprof.v = uh.v * vlog;
        wprof.d1 = uh.d1 * vlog + uh.v * dv;
        wprof.d2 = uh.d2 * vlog + 2.0 * uh.d1 * dv + uh.v * d2v;
        const double P_w = apply_op(op, dom, r, wprof);
        // X_1(u0/u1) = 1/vlog
        const double rhs2 = (0.5 * (V0 + V1) - (V0 - V1) / vlog + w) * wprof.v;
        const double sc2 =
            std::max({std::abs(P_w), std::abs(rhs2), std::abs(w * wprof.v), std::abs(uh.v), 1e-30});
        rep.identity2.samples.push_back(r);
        rep.identity2.resids.push_back(rel(P_w - rhs2, sc2));
    }
    for (double v : rep.identity1.resids) rep.identity1.max_resid = std::max(rep.identity1.max_resid, v);
    for (double v : rep.identity2.resids) rep.identity2.max_resid = std::max(rep.identity2.max_resid, v);
    return rep;
}

BftReport verify_bft_identities(int i, double D, const DomainSpec& dom,
                                const std::vector<double>& points) {
    require(!dom.is_exterior(), "bft identities use the boundary distance");
    BftReport rep;
    const Profile u0 = profile_bft_u0(dom, i, D);
    const Profile u1 = profile_bft_u1(dom, i, D);
    WeightSpec wi;
    wi.family = WeightFamily::IteratedLogW;
    wi.level = i;
    wi.D = D;
    const WeightFn Wfn = build_weight(dom, wi);
    for (double r : points) {
        if (dom.has_ridge())
            require(std::abs(r - dom.ridge()) > 1e-3 * (dom.p1 - dom.p0),
                    "sample on the ridge set rejected");
        const double d = dom.delta(r);
        const xlog::Chain c = xlog::chain(i + 1, d / D);
        const double Ri = (i == 0) ? 0.0 : c.rsum[i - 1];
        const double Pi1 = c.prod[i];  // X_1...X_{i+1}
        const double ndl = dom.neg_lap_delta(r);
        const double Wi = Wfn(r).w;

        const ProfileEval e0 = u0(r);
        const double lap0 = e0.d2 + dom.measure_logderiv(r) * e0.d1;
        const double rhs1 = (ndl / (2.0 * d) * (1.0 - Ri) + Wi) * e0.v;
        const double sc1 = std::max({std::abs(lap0), std::abs(rhs1), std::abs(Wi * e0.v), 1e-30});
        rep.form1.samples.push_back(r);
        rep.form1.resids.push_back(rel(-lap0 - rhs1, sc1));

        const ProfileEval e1 = u1(r);
        const double lap1 = e1.d2 + dom.measure_logderiv(r) * e1.d1;
        const double rhs2 = (ndl / (2.0 * d) * (1.0 - Ri) - (ndl / d) * Pi1 + Wi) * e1.v;
        const double sc2 = std::max({std::abs(lap1), std::abs(rhs2), std::abs(Wi * e1.v), 1e-30});
        rep.form2.samples.push_back(r);
        rep.form2.resids.push_back(rel(-lap1 - rhs2, sc2));

        // H_i = (1/4) sum_{k=1}^{i+1} |grad X_k^{-1}(delta/D)|^2 via the closed-form
        // derivative of X_k, against W_i from the weight registry
        double Hi = 0.0;
        for (int k = 1; k <= i + 1; ++k) {
            const double g = xlog::x_deriv(k, d / D) / D /
                             (xlog::x_eval(k, d / D) * xlog::x_eval(k, d / D));
            Hi += 0.25 * g * g;
        }
        rep.h_equals_w.samples.push_back(r);
        rep.h_equals_w.resids.push_back(rel(Hi - Wi, std::abs(Wi)));
    }
    for (auto* rr : {&rep.form1, &rep.form2, &rep.h_equals_w})
        for (double v : rr->resids) rr->max_resid = std::max(rr->max_resid, v);
    return rep;
}

BftReport verify_origin_identities(int i, double D, int n, const std::vector<double>& points) {
    require(n >= 3, "origin identities need n >= 3");
    BftReport rep;
    const Profile z0 = profile_origin_z(n, i, D);
    const Profile z1 = profile_origin_z1(n, i, D);
    DomainSpec ball = make_ball(n, D);
    WeightSpec hs;
    hs.family = WeightFamily::RadialOriginH;
    hs.level = i;
    hs.D = D;
    const WeightFn Hfn = build_weight(ball, hs);
    for (double r : points) {
        const double Hi = Hfn(r).w;
        for (auto [prof, rr] : {std::pair{&z0, &rep.form1}, std::pair{&z1, &rep.form2}}) {
            const ProfileEval e = (*prof)(r);
            const double lap = e.d2 + (n - 1) / r * e.d1;
            const double rhs = Hi * e.v;
            const double sc = std::max({std::abs(lap), std::abs(rhs), 1e-30});
            rr->samples.push_back(r);
            rr->resids.push_back(rel(-lap - rhs, sc));
        }
        // harmonicity of |x|^{2-n}: Lap(r^{2-n}) = 0
        const double p = 2.0 - n;
        const double harm = p * (p - 1) * std::pow(r, p - 2) + (n - 1) / r * p * std::pow(r, p - 1);
        rep.h_equals_w.samples.push_back(r);
        rep.h_equals_w.resids.push_back(rel(harm, std::pow(r, p - 2)));
    }
    for (auto* rr : {&rep.form1, &rep.form2, &rep.h_equals_w})
        for (double v : rr->resids) rr->max_resid = std::max(rr->max_resid, v);
    return rep;
}

MultipolarResult multipolar_residual(int n, const std::vector<std::array<double, 3>>& poles,
                                     const std::array<double, 3>& x) {
    require(n >= 3, "multipolar: n >= 3");
    const int N = static_cast<int>(poles.size());
    require(N >= 2, "multipolar: need N >= 2 poles");
    const double expo = (2.0 - n) / N;

    double logv = 0.0, sum_inv2 = 0.0;
    std::array<double, 3> S{0, 0, 0};  // sum of (x-x_i)/|x-x_i|^2
    for (const auto& p : poles) {
        std::array<double, 3> dvec{x[0] - p[0], x[1] - p[1], x[2] - p[2]};
        const double d2 = dvec[0] * dvec[0] + dvec[1] * dvec[1] + dvec[2] * dvec[2];
        require(d2 > 0, "multipolar: x equals a pole");
        logv += 0.5 * expo * std::log(d2);
        sum_inv2 += 1.0 / d2;
        for (int k = 0; k < 3; ++k) S[k] += dvec[k] / d2;
    }
    const double v = std::exp(logv);
    const double S2 = S[0] * S[0] + S[1] * S[1] + S[2] * S[2];
    // Lap v / v = |grad v / v|^2 + Lap log v, with Lap log|x-x_i| = (n-2)/|x-x_i|^2.
    // In ambient dimension n the out-of-plane coordinates contribute nothing when
    // poles and x live in the stored 3 coordinates.
    const double lap_over_v = expo * expo * S2 + expo * (n - 2) * sum_inv2;

    double W = 0.0;
    for (int a = 0; a < N; ++a)
        for (int b = a + 1; b < N; ++b) {
            std::array<double, 3> dp{poles[a][0] - poles[b][0], poles[a][1] - poles[b][1],
                                     poles[a][2] - poles[b][2]};
            std::array<double, 3> da{x[0] - poles[a][0], x[1] - poles[a][1], x[2] - poles[a][2]};
            std::array<double, 3> db{x[0] - poles[b][0], x[1] - poles[b][1], x[2] - poles[b][2]};
            const double dp2 = dp[0] * dp[0] + dp[1] * dp[1] + dp[2] * dp[2];
            const double da2 = da[0] * da[0] + da[1] * da[1] + da[2] * da[2];
            const double db2 = db[0] * db[0] + db[1] * db[1] + db[2] * db[2];
            W += dp2 / (da2 * db2);
        }
    MultipolarResult res;
    res.v = v;
    res.weight = W;
    res.eigenvalue = std::pow((n - 2.0) / N, 2);
    res.CN = N * N / (4.0 * (N - 1.0));
    res.resid_rel = std::abs(-lap_over_v / W - res.eigenvalue) / res.eigenvalue;
    return res;
}

FarFieldReport multipolar_farfield(int n, const std::vector<std::array<double, 3>>& poles,
                                   int nrays, double r_lo, double r_hi, int nsamples) {
    require(n >= 3 && nrays >= 1 && nsamples >= 2, "farfield: bad parameters");
    FarFieldReport rep{1e300, 0.0};
    uint64_t rng = 0x9e3779b97f4a7c15ULL;
    for (int ray = 0; ray < nrays; ++ray) {
        // deterministic pseudo-random directions
        double ux = uniform_in(rng, -1, 1), uy = uniform_in(rng, -1, 1), uz = uniform_in(rng, -1, 1);
        const double nn = std::sqrt(ux * ux + uy * uy + uz * uz);
        ux /= nn;
        uy /= nn;
        uz /= nn;
        for (int s = 0; s < nsamples; ++s) {
            const double r = r_lo * std::pow(r_hi / r_lo, double(s) / (nsamples - 1));
            const auto res =
                multipolar_residual(n, poles, {r * ux, r * uy, r * uz});
            const double val = r * r * r * r * res.weight;
            rep.lo = std::min(rep.lo, val);
            rep.hi = std::max(rep.hi, val);
        }
    }
    return rep;
}

namespace {

// X_k, X_k', X_k'' by the composition recursion X_{j} = X_1(X_{j-1}) --
// independent of the product-form derivative identity.
struct DerivChain {
    std::vector<double> x, d1, d2;
};

DerivChain deriv_chain(int k, double t) {
    DerivChain c;
    double x = t, dx = 1.0, d2x = 0.0;
    for (int j = 1; j <= k; ++j) {
        const double s = x;
        const double X = 1.0 / (1.0 - std::log(s));
        const double Xp = X * X / s;
        const double Xpp = X * X * (2.0 * X - 1.0) / (s * s);
        const double nd2 = Xpp * dx * dx + Xp * d2x;
        const double nd1 = Xp * dx;
        x = X;
        dx = nd1;
        d2x = nd2;
        c.x.push_back(x);
        c.d1.push_back(dx);
        c.d2.push_back(d2x);
    }
    return c;
}

}  // namespace

AppendixResult appendix_identity(int n, int k, double r, double D) {
    require(n >= 3, "appendix identity needs n >= 3");
    require(r > 0 && r < D, "appendix identity: need 0 < r < D");
    const double t = r / D;
    const DerivChain dc = deriv_chain(k, t);
    // phi = prod X_j^{-1/2}(r/D): log phi = -(1/2) sum log X_j,
    // (log X)'' = X''/X - (X'/X)^2
    double s1 = 0.0, ds1 = 0.0;
    for (int j = 0; j < k; ++j) {
        const double a = dc.d1[j] / dc.x[j];
        const double b = dc.d2[j] / dc.x[j];
        s1 += -0.5 * a / D;
        ds1 += -0.5 * (b - a * a) / (D * D);
    }
    const double lhs = -(ds1 + s1 * s1 + (n - 1) / r * s1);

    const xlog::Chain c = xlog::chain(k, t);
    double sum_p = 0.0, sum_p2 = 0.0;
    for (int j = 1; j <= k; ++j) {
        sum_p += c.prod[j - 1];
        sum_p2 += c.prod[j - 1] * c.prod[j - 1];
    }
    AppendixResult res;
    res.lhs = lhs;
    res.rhs = (n - 2) / (2.0 * r * r) * sum_p + sum_p2 / (4.0 * r * r);
    res.margin = sum_p2 / (4.0 * r * r);
    res.resid_rel = std::abs(res.lhs - res.rhs) / std::max(std::abs(res.rhs), 1e-300);
    return res;
}

ModelEndReport model_end_conditions(const DomainSpec& dom, const std::vector<double>& r_grid) {
    require(dom.is_exterior(), "model end conditions need an exterior domain");
    const int n = dom.n;
    const double c = dom.model_c;
    ModelEndReport rep;
    rep.r_grid = r_grid;
    const double Wc = 0.25 * (n - 2) * (n - 2);
    const OperatorSpec op = model_end_op(dom);
    const Profile up = profile_r_power(0.5 * (2 - n));
    rep.pushforward_const = 0.25 * (n - 2) * sphere_area(n);
    rep.supersol_resid = 0.0;
    for (double r : r_grid) {
        const double gamma = dom.gradient_profile(r);
        const double one_m = 1.0 - gamma;  // = c/r
        const double W = Wc / (r * r);
        const double V0 = 0.25 * (n - 2) * (n + 2) * one_m / (r * r);
        rep.cond1.push_back(std::abs(V0 / W) * (1.0 + (n - 2) * std::log(r)));
        rep.cond2.push_back(n * (n - 2) * one_m / (r * r) / W);
        rep.cond3.push_back(std::abs(std::pow(1.0 - c / r, n - 1) - 1.0));
        // exact supersolution identity (-Lap - V0 - W) r^{(2-n)/2} = 0
        const ProfileEval e = up(r);
        const double Pu = apply_op(op, dom, r, e);
        const double resid = rel(Pu - (V0 + W) * e.v, std::abs((V0 + W) * e.v));
        rep.supersol_resid = std::max(rep.supersol_resid, resid);
    }
    auto slope_of = [&](const std::vector<double>& y) {
        std::vector<double> lx, ly;
        for (size_t j = 0; j < r_grid.size(); ++j)
            if (y[j] > 0) {
                lx.push_back(std::log(r_grid[j]));
                ly.push_back(std::log(y[j]));
            }
        return (lx.size() >= 2) ? fit_slope(lx, ly) : 0.0;
    };
    rep.slope1 = c > 0 ? slope_of(rep.cond1) : 0.0;
    rep.slope2 = c > 0 ? slope_of(rep.cond2) : 0.0;
    rep.slope3 = c > 0 ? slope_of(rep.cond3) : 0.0;
    return rep;
}

// -------- scenario catalog --------

namespace {

double cached_D(double delta_max) {
    // D from the series criterion with margin 0, shared across scenarios
    static double tstar = 0.0;
    if (tstar == 0.0) tstar = delta_max / xlog::select_D(delta_max, -1, 0.0);
    // select_D is homogeneous of degree 1, so t* is delta_max-independent
    return delta_max / tstar;
}

Scenario bft_scenario(const std::string& name, const DomainSpec& dom, int i) {
    Scenario s;
    s.name = name;
    s.domain = dom;
    s.level = i;
    s.D = cached_D(dom.sup_delta());
    s.weight.family = WeightFamily::IteratedLogJ;
    s.weight.level = i;
    s.weight.D = s.D;
    if (i == 0) {
        s.op = laplace_op();
    } else {
        WeightSpec shift;
        shift.family = WeightFamily::IteratedLogW;
        shift.level = i - 1;
        shift.D = s.D;
        const WeightFn wf = build_weight(dom, shift);
        s.op = shifted_op([wf](double r) { return wf(r).w; },
                          "-lap - W_" + std::to_string(i - 1));
    }
    s.has_frame = true;
    s.kappa = 1.0;
    s.lambda0 = (dom.kind == DomainKind::RadialAnnulus) ? 0.0 : 1.0;
    if (i == 0)
        s.frame_pair = ProfilePair{profile_delta_power(dom, 1.0, s.D), profile_one(),
                                   "(delta/D, 1)"};
    else
        s.frame_pair = ProfilePair{profile_bft_u0(dom, i - 1, s.D),
                                   profile_bft_u1(dom, i - 1, s.D),
                                   "(U0_" + std::to_string(i - 1) + ", U1_" + std::to_string(i - 1) + ")"};
    s.sing_lo = dom.kind != DomainKind::RadialBall;
    s.sing_hi = true;
    return s;
}

Scenario delta2_scenario(const std::string& name, const DomainSpec& dom) {
    Scenario s;
    s.name = name;
    s.domain = dom;
    s.D = cached_D(dom.sup_delta());
    s.weight.family = WeightFamily::PowerDelta;
    s.weight.alpha = -2.0;
    s.op = laplace_op();
    s.has_frame = true;
    s.kappa = 4.0;  // delta^{-2} = 4 * J_0
    s.lambda0 = (dom.kind == DomainKind::RadialAnnulus) ? 0.0 : 0.25;
    s.frame_pair =
        ProfilePair{profile_delta_power(dom, 1.0, s.D), profile_one(), "(delta/D, 1)"};
    s.level = 0;
    s.sing_lo = dom.kind != DomainKind::RadialBall;
    s.sing_hi = true;
    return s;
}

Scenario modelend_scenario(const std::string& name, int n, double c) {
    Scenario s;
    s.name = name;
    s.domain = make_model_end(n, c, (c > 0) ? 2.0 : 1.0, 1e4);
    s.op = model_end_op(s.domain);
    // plain weight r^{-2}: the operator under study is r^2(-Lap), whose
    // spectrum starts at ((n-2)/2)^2
    s.weight.family = WeightFamily::ClassicalHardy;
    s.weight.scale = 4.0 / ((n - 2.0) * (n - 2.0));
    s.has_frame = true;
    s.kappa = 4.0 / ((n - 2.0) * (n - 2.0));  // valid as a constant for c = 0
    s.lambda0 = 0.25 * (n - 2) * (n - 2);
    s.frame_pair = ProfilePair{profile_r_power(2.0 - n), profile_one(), "(r^{2-n}, 1)"};
    s.level = 0;
    s.sing_lo = false;
    s.sing_hi = false;
    return s;
}

Scenario multipolar_scenario(const std::string& name, int n, int N) {
    Scenario s;
    s.name = name;
    s.domain = make_ball(n, 1.0);  // metadata only; checks are pointwise on R^n
    s.pointwise_only = true;
    s.weight.family = WeightFamily::Multipolar;
    if (N == 2)
        s.weight.poles = {{1, 0, 0}, {-1, 0, 0}};
    else if (N == 3)
        s.weight.poles = {{1, 0, 0}, {-0.5, 0.8660254037844386, 0}, {-0.5, -0.8660254037844386, 0}};
    else
        throw std::invalid_argument("multipolar catalog covers N in {2,3}");
    s.lambda0 = std::pow((n - 2.0) / N, 2);
    return s;
}

}  // namespace

Scenario make_scenario(const std::string& name) {
    const DomainSpec interval = make_interval(1.0);
    const DomainSpec ball3 = make_ball(3, 1.0);
    if (name == "interval-j0") return bft_scenario(name, interval, 0);
    if (name == "interval-j1") return bft_scenario(name, interval, 1);
    if (name == "interval-j2") return bft_scenario(name, interval, 2);
    if (name == "ball3-j0") return bft_scenario(name, ball3, 0);
    if (name == "ball3-j1") return bft_scenario(name, ball3, 1);
    if (name == "ball3-j2") return bft_scenario(name, ball3, 2);
    if (name == "interval-delta2") return delta2_scenario(name, interval);
    if (name == "annulus3-delta2") return delta2_scenario(name, make_annulus(3, 1.0, 2.0));
    if (name == "modelend-n3-c0") return modelend_scenario(name, 3, 0.0);
    if (name == "modelend-n3-c1") return modelend_scenario(name, 3, 1.0);
    if (name == "multipolar-2p-n3") return multipolar_scenario(name, 3, 2);
    if (name == "multipolar-2p-n4") return multipolar_scenario(name, 4, 2);
    if (name == "multipolar-3p-n3") return multipolar_scenario(name, 3, 3);
    if (name == "interval-power3") {
        Scenario s;
        s.name = name;
        s.domain = interval;
        s.op = laplace_op();
        s.weight.family = WeightFamily::PowerDelta;
        s.weight.alpha = 3.0;
        s.has_frame = false;  // Agmon length int delta^{3/2} is finite: incomplete
        s.lambda0 = 0.0;
        return s;
    }
    throw std::invalid_argument("unknown scenario: " + name);
}

std::vector<std::string> catalog_names() {
    return {"interval-j0",     "interval-j1",      "interval-j2",     "ball3-j0",
            "ball3-j1",        "ball3-j2",         "interval-delta2", "annulus3-delta2",
            "modelend-n3-c0",  "modelend-n3-c1",   "multipolar-2p-n3", "multipolar-2p-n4",
            "multipolar-3p-n3", "interval-power3"};
}

}  // namespace hardy::scen
