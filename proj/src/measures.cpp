#include "hardy/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hardy/discretize.hpp"
#include "hardy/eigsolve.hpp"
#include "hardy/quasimode.hpp"
#include "hardy/util.hpp"

namespace hardy::meas {

namespace {
void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}
}  // namespace

double PushforwardMeasure::total() const {
    double s = 0;
    for (double m : masses) s += m;
    return s;
}

double PushforwardMeasure::V(double t) const {
    if (t <= edges.front()) return 0.0;
    double acc = 0.0;
    for (size_t j = 0; j < masses.size(); ++j) {
        if (t >= edges[j + 1]) {
            acc += masses[j];
        } else {
            acc += masses[j] * (t - edges[j]) / (edges[j + 1] - edges[j]);
            return acc;
        }
    }
    return acc;
}

double PushforwardMeasure::S(double t) const { return V(t + 1.0) - V(t); }

double PushforwardMeasure::density(size_t bin) const {
    return masses[bin] / (edges[bin + 1] - edges[bin]);
}

PushforwardMeasure pushforward(const std::vector<Zone>& zones,
                               const std::function<double(double)>& base_density,
                               const std::vector<double>& edges) {
    require(edges.size() >= 2, "pushforward: need at least one bin");
    for (size_t j = 1; j < edges.size(); ++j)
        require(edges[j] > edges[j - 1], "pushforward: edges must increase");
    PushforwardMeasure chi;
    chi.edges = edges;
    chi.masses.assign(edges.size() - 1, 0.0);
    for (const auto& z : zones) {
        // monotonicity scan on the zone
        const int nscan = 64;
        double prev = z.v_of_r(z.r_lo + 1e-12 * (z.r_hi - z.r_lo));
        const bool incr = z.v_of_r(z.r_hi - 1e-12 * (z.r_hi - z.r_lo)) > prev;
        for (int j = 1; j <= nscan; ++j) {
            const double r = z.r_lo + (z.r_hi - z.r_lo) * j / (nscan + 1.0);
            const double v = z.v_of_r(r);
            require((v >= prev) == incr || v == prev,
                    "pushforward: v not monotone on a zone (split the zone)");
            prev = v;
        }
        auto r_of_v = [&](double v) {
            double lo = z.r_lo, hi = z.r_hi;
            const double vlo = z.v_of_r(lo + 1e-14 * (hi - lo));
            const double vhi = z.v_of_r(hi - 1e-14 * (hi - lo));
            const double vmin = std::min(vlo, vhi), vmax = std::max(vlo, vhi);
            if (v <= vmin) return incr ? z.r_lo : z.r_hi;
            if (v >= vmax) return incr ? z.r_hi : z.r_lo;
            for (int it = 0; it < 120; ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((z.v_of_r(mid) > v) == incr)
                    hi = mid;
                else
                    lo = mid;
            }
            return 0.5 * (lo + hi);
        };
        for (size_t b = 0; b + 1 < edges.size(); ++b) {
            const double ra = r_of_v(edges[b]);
            const double rb = r_of_v(edges[b + 1]);
            const double lo = std::min(ra, rb), hi = std::max(ra, rb);
            if (hi > lo)
                chi.masses[b] += gauss_composite(base_density, lo, hi, 16);
        }
    }
    return chi;
}

PushforwardMeasure pushforward_density(const std::function<double(double)>& g,
                                       const std::vector<double>& edges) {
    require(edges.size() >= 2, "pushforward_density: need at least one bin");
    PushforwardMeasure chi;
    chi.edges = edges;
    chi.masses.resize(edges.size() - 1);
    for (size_t b = 0; b + 1 < edges.size(); ++b)
        chi.masses[b] = gauss_composite(g, edges[b], edges[b + 1], 8);
    return chi;
}

GrowthStats volume_growth(const PushforwardMeasure& chi) {
    require(!chi.masses.empty(), "volume_growth: empty measure");
    GrowthStats st;
    double acc = 0.0;
    for (size_t j = 0; j < chi.masses.size(); ++j) {
        acc += chi.masses[j];
        st.r.push_back(chi.edges[j + 1]);
        st.V.push_back(acc);
    }
    for (double t : st.r) st.S.push_back(chi.S(t));
    const double t0 = chi.edges.front(), t1 = chi.edges.back();
    st.low_confidence = !(t1 > 100.0 * std::max(t0, 1e-12));
    // lim-sup surrogate: max fitted slope of log V over sub-windows of the
    // upper half of the support
    const double mid = 0.5 * (t0 + t1);
    const int nwin = 5;
    double best = 0.0;
    for (int w = 0; w < nwin; ++w) {
        const double wlo = mid + (t1 - mid) * w / nwin;
        const double whi = mid + (t1 - mid) * (w + 1) / nwin;
        std::vector<double> xs, ys;
        for (size_t j = 0; j < st.r.size(); ++j)
            if (st.r[j] >= wlo && st.r[j] <= whi && st.V[j] > 0) {
                xs.push_back(st.r[j]);
                ys.push_back(std::log(st.V[j]));
            }
        if (xs.size() >= 3) best = std::max(best, fit_slope(xs, ys));
    }
    st.sigma = std::max(0.0, best);
    st.subexponential = st.sigma < 0.05;
    return st;
}

CriterionRow growth_criterion(const PushforwardMeasure& chi, double a, double d, double eps) {
    const qm::WindowSearchResult ws = qm::window_search(chi, a, eps, d);
    CriterionRow row;
    row.a = a;
    row.d = d;
    row.eps = eps;
    row.found = ws.found;
    row.b = ws.b;
    row.ratio = ws.ratio;
    return row;
}

EpsExpResult eps_exp_check(const PushforwardMeasure& chi, double eps) {
    EpsExpResult res;
    double C = 0.0;
    for (size_t b = 0; b < chi.bins(); ++b) {
        const double t = 0.5 * (chi.edges[b] + chi.edges[b + 1]);
        const double dens = chi.density(b);
        if (!(dens > 0.0)) return EpsExpResult{false, std::numeric_limits<double>::infinity()};
        C = std::max(C, dens * std::exp(-eps * t));
        C = std::max(C, std::exp(-eps * t) / dens);
    }
    res.C = C;
    res.verdict = std::isfinite(C);
    return res;
}

double AgmonFrame::h(double r) const {
    const auto e0 = pair.u0(r);
    const auto e1 = pair.u1(r);
    return 0.5 * (1.0 - std::log(e0.v / e1.v));
}

double AgmonFrame::rho(double x, double y) const { return std::abs(h(x) - h(y)); }

double AgmonFrame::eikonal(double r) const {
    const auto e0 = pair.u0(r);
    const auto e1 = pair.u1(r);
    const double dh = -0.5 * (e0.d1 / e0.v - e1.d1 / e1.v);
    const double w = scen::supersolution_weight(pair, op)(r).w;
    return op.a(r) * dh * dh / w;
}

AgmonFrame agmon_frame(const scen::Scenario& s) {
    require(s.has_frame, "scenario has no complete Agmon frame");
    AgmonFrame f;
    f.pair = s.frame_pair;
    f.op = s.op;
    f.dom = s.domain;
    f.complete = true;  // |h| -> infinity: u0/u1 -> 0 at infinity for catalog frames
    return f;
}

double exterior_bottom(const scen::Scenario& s, double eps_ext, int N) {
    require(s.has_frame, "exterior_bottom: frame-normalized weight required");
    const scen::WeightFn Wf = scen::supersolution_weight(s.frame_pair, s.op);
    const auto& dom = s.domain;
    double bottom = 1e300;
    auto strip_bottom = [&](double sing_end, double other_end) {
        // distances to the singular end are log-uniform down to 1e-13 of the strip
        const double span = std::abs(other_end - sing_end);
        const fem::Mesh mesh = fem::boundary_log_mesh(sing_end, other_end, N, span * 1e-13);
        const fem::Pencil p = fem::assemble_pencil(dom, s.op, Wf, mesh, true, true);
        return eig::eig_bottom(p, 1, 1e-10)[0].value;
    };
    if (dom.is_exterior()) {
        // exterior region r >= R_E with R_E = min(1/eps_ext, r_max/10)
        const double RE = std::max(2.0 * dom.p0, std::min(1.0 / eps_ext, dom.p1 / 10.0));
        const fem::Mesh mesh = fem::make_mesh(RE, dom.p1, N, 1.0, 0.0, false, false, true);
        const fem::Pencil p = fem::assemble_pencil(dom, s.op, Wf, mesh, true, true);
        return eig::eig_bottom(p, 1, 1e-10)[0].value;
    }
    switch (dom.kind) {
        case scen::DomainKind::Interval:
        case scen::DomainKind::RadialAnnulus:
            bottom = std::min(strip_bottom(dom.p0, dom.p0 + eps_ext),
                              strip_bottom(dom.p1, dom.p1 - eps_ext));
            break;
        case scen::DomainKind::RadialBall:
            bottom = strip_bottom(dom.p1, dom.p1 - eps_ext);
            break;
        default:
            throw std::invalid_argument("exterior_bottom: unsupported domain");
    }
    return bottom;
}

SigmaReport sigma_rates(const scen::Scenario& s, double tol) {
    require(s.has_frame, "sigma_rates: incomplete frame");
    SigmaReport rep;
    rep.complete = true;
    const qm::Frame f = qm::make_frame(s);
    const double t0 = f.tv_min;
    auto dens = [&f](double t) {
        double g = 0.0;
        for (const auto& z : f.tzones) g += z.density(t);
        return g;
    };
    // mu_0 and mu_1 push-forward densities in h-units: the ratio u0/u1 equals
    // exp(1 - 2h) exactly on supersolution frames
    auto dens0 = [&dens](double t) { return dens(t) * std::exp(1.0 - 2.0 * t); };
    auto dens1 = [&dens](double t) { return dens(t) * std::exp(2.0 * t - 1.0); };
    const double Hcap = t0 + 60.0;
    rep.mu0_mass = gauss_composite(dens0, t0, Hcap, 512);
    rep.mu0_finite = true;  // exponentially decaying tail in h
    // sigma_0: decay rate of the mu_0 tail; sigma_1: growth rate of V_1
    std::vector<double> hs, logT, logV;
    for (int j = 0; j <= 16; ++j) {
        const double h = t0 + 4.0 + j;
        const double tail = gauss_composite(dens0, h, Hcap, 256);
        const double grow = gauss_composite(dens1, t0, h, 256);
        if (tail > 0 && grow > 0) {
            hs.push_back(h);
            logT.push_back(std::log(tail));
            logV.push_back(std::log(grow));
        }
    }
    require(hs.size() >= 4, "sigma_rates: insufficient frame support");
    // lim-sup surrogate: max slope magnitude over sub-windows
    double s0 = 0.0, s1 = 0.0;
    const size_t half = hs.size() / 2;
    for (size_t w = 0; w + 1 < 3; ++w) {
        std::vector<double> xs(hs.begin() + static_cast<long>(w * half),
                               hs.begin() + static_cast<long>(std::min((w + 1) * half + 1, hs.size())));
        std::vector<double> yT(logT.begin() + static_cast<long>(w * half),
                               logT.begin() + static_cast<long>(std::min((w + 1) * half + 1, logT.size())));
        std::vector<double> yV(logV.begin() + static_cast<long>(w * half),
                               logV.begin() + static_cast<long>(std::min((w + 1) * half + 1, logV.size())));
        if (xs.size() >= 3) {
            s0 = std::max(s0, -fit_slope(xs, yT));
            s1 = std::max(s1, fit_slope(xs, yV));
        }
    }
    rep.sigma0 = s0;
    rep.sigma1 = s1;
    rep.mu1_infinite = s1 > 0.5;
    // Persson-side lower estimate of the essential bottom in frame units:
    // lambda_inf >= 1 - sup_exterior |V| (the frame potential vanishes at
    // infinity and L~ is nonnegative)
    double supV = 0.0;
    for (const auto& z : f.tzones)
        for (int j = 0; j <= 100; ++j) supV = std::max(supV, std::abs(z.V(t0 + 10.0 + 0.5 * j)));
    rep.lambda_inf_lower = 1.0 - supV;
    const double smin = std::min(rep.sigma0, rep.sigma1);
    rep.brooks_ok = rep.lambda_inf_lower <= smin * smin / 4.0 + tol;
    rep.equality_ok = std::abs(rep.sigma0 * rep.sigma0 / 4.0 - 1.0) <= tol &&
                      std::abs(rep.sigma1 * rep.sigma1 / 4.0 - 1.0) <= tol;
    return rep;
}

}  // namespace hardy::meas
