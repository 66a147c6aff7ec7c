#include "hardy/quasimode.hpp"

#include <cmath>
#include <stdexcept>

#include "hardy/util.hpp"
#include "hardy/xlog.hpp"

namespace hardy::qm {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

// quintic smoothstep on [0,1]
double smooth(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }
double smooth_d1(double u) { return 30.0 * u * u * (1.0 - u) * (1.0 - u); }
double smooth_d2(double u) { return 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u); }

}  // namespace

Cutoff build_cutoff(double a, double b) {
    require(b >= a + 2.0, "build_cutoff: window too short (need b >= a+2)");
    return Cutoff{a, b, 15.0 / 8.0 + 10.0 / std::sqrt(3.0)};
}

double Cutoff::value(double t) const {
    if (t <= a || t >= b) return 0.0;
    if (t < a + 1.0) return smooth(t - a);
    if (t > b - 1.0) return smooth(b - t);
    return 1.0;
}

double Cutoff::d1(double t) const {
    if (t <= a || t >= b) return 0.0;
    if (t < a + 1.0) return smooth_d1(t - a);
    if (t > b - 1.0) return -smooth_d1(b - t);
    return 0.0;
}

double Cutoff::d2(double t) const {
    if (t <= a || t >= b) return 0.0;
    if (t < a + 1.0) return smooth_d2(t - a);
    if (t > b - 1.0) return smooth_d2(b - t);
    return 0.0;
}

namespace {

// scaled cutoff: unit-ramp quintic in the coordinate w = tv/ramp
struct ScaledCutoff {
    double A, B, ramp;
    double value(double t) const {
        if (t <= A || t >= B) return 0.0;
        if (t < A + ramp) return smooth((t - A) / ramp);
        if (t > B - ramp) return smooth((B - t) / ramp);
        return 1.0;
    }
    double d1(double t) const {
        if (t <= A || t >= B) return 0.0;
        if (t < A + ramp) return smooth_d1((t - A) / ramp) / ramp;
        if (t > B - ramp) return -smooth_d1((B - t) / ramp) / ramp;
        return 0.0;
    }
    double d2(double t) const {
        if (t <= A || t >= B) return 0.0;
        if (t < A + ramp) return smooth_d2((t - A) / ramp) / (ramp * ramp);
        if (t > B - ramp) return smooth_d2((B - t) / ramp) / (ramp * ramp);
        return 0.0;
    }
};

// ---- iterated-log frame chain in log space ----
// For the level-i frame, v = 1 - log X_i(delta/D). Going down the chain
// log s_{j-1} = 1 - exp(-log s_j); values beyond double range saturate to
// -inf cleanly, delta underflows to zero.
struct SChain {
    double log_delta;  // log(delta)
    double logPi;      // log(X_1...X_i)
    double Ri_m1;      // R_{i-1}
    double Pi;         // X_1...X_i
    bool tiny;         // some lambda_j (j>=1) below -700: ratios vanish
};

SChain schain(int i, double v, double logD) {
    SChain sc{0, 0, 0, 1, false};
    double lam = 1.0 - v;  // log s_i
    double logp = 0.0;
    std::vector<double> lams(static_cast<size_t>(i));
    for (int j = i; j >= 1; --j) {
        lams[static_cast<size_t>(j) - 1] = lam;
        if (lam < -700.0) sc.tiny = true;
        lam = 1.0 - std::exp(-lam);  // log s_{j-1}
    }
    sc.log_delta = logD + lam;  // lam = log s_0
    // products P_k = exp(sum_{j<=k} lam_j); R_{i-1} = sum_{k<=i-1} P_k
    double acc = 0.0;
    for (int k = 1; k <= i; ++k) {
        acc += lams[static_cast<size_t>(k) - 1];
        if (k <= i - 1) sc.Ri_m1 += std::exp(acc);
    }
    sc.logPi = acc;
    sc.Pi = std::exp(acc);
    return sc;
}

}  // namespace

double Frame::window_mass(double A, double B) const {
    double total = 0.0;
    for (const auto& z : tzones)
        total += gauss_composite(z.density, A, B, std::max(32, int((B - A) / 4)));
    return total;
}

Frame make_frame(const scen::Scenario& s) {
    require(s.has_frame, "scenario carries no ground-state frame");
    Frame f;
    f.scenario = s.name;
    f.kappa = s.kappa;
    const auto& dom = s.domain;
    const scen::OperatorSpec op = s.op;
    const scen::ProfilePair pair = s.frame_pair;
    const scen::WeightFn Wf = scen::supersolution_weight(pair, op);

    // generic r-space zones (dual-route residual checks, moderate windows)
    auto add_rzone = [&](double r_lo, double r_hi) {
        Frame::RZone z;
        z.r_lo = r_lo;
        z.r_hi = r_hi;
        z.tv_of_r = [pair](double r) {
            const auto e0 = pair.u0(r);
            const auto e1 = pair.u1(r);
            return 0.5 * (1.0 - std::log(e0.v / e1.v));
        };
        z.dtv_dr = [pair](double r) {
            const auto e0 = pair.u0(r);
            const auto e1 = pair.u1(r);
            return -0.5 * (e0.d1 / e0.v - e1.d1 / e1.v);
        };
        z.d2tv_dr2 = [pair](double r) {
            const auto e0 = pair.u0(r);
            const auto e1 = pair.u1(r);
            const double d0 = e0.d1 / e0.v, d1 = e1.d1 / e1.v;
            return -0.5 * ((e0.d2 / e0.v - d0 * d0) - (e1.d2 / e1.v - d1 * d1));
        };
        z.m_r = [pair, Wf, dom](double r) {
            const auto e0 = pair.u0(r);
            const auto e1 = pair.u1(r);
            return e0.v * e1.v * Wf(r).w * dom.measure_density(r);
        };
        z.aW_r = [op, Wf](double r) { return op.a(r) / Wf(r).w; };
        z.V_r = [pair, op, dom, Wf](double r) {
            const auto e0 = pair.u0(r);
            const auto e1 = pair.u1(r);
            const double av = op.a(r);
            const double lm = dom.measure_logderiv(r);
            const double P0 = -av * e0.d2 - (op.da(r) + av * lm) * e0.d1 + op.c(r) * e0.v;
            const double P1 = -av * e1.d2 - (op.da(r) + av * lm) * e1.d1 + op.c(r) * e1.v;
            return 0.5 * (P0 / e0.v + P1 / e1.v) / Wf(r).w;
        };
        f.rzones.push_back(std::move(z));
    };

    if (dom.kind == scen::DomainKind::RadialExterior) {
        const int n = dom.n;
        const double c = dom.model_c;
        const double om = scen::sphere_area(n);
        Frame::TZone z;
        z.density = [n, c, om](double tv) {
            const double rinv = std::exp(-(2.0 * tv - 1.0) / (n - 2));
            const double gamma = 1.0 - c * rinv;
            return 0.5 * (n - 2) * om * gamma * std::pow(1.0 - c * rinv, n - 1);
        };
        z.Lv = [n, c](double tv) {
            if (c == 0.0) return 0.0;
            const double rinv = std::exp(-(2.0 * tv - 1.0) / (n - 2));
            return 2.0 * n * c * rinv / ((1.0 - c * rinv) * (n - 2));
        };
        z.V = z.Lv;  // same closed form on the model end
        z.gdef = [](double) { return 0.0; };
        f.tzones.push_back(std::move(z));
        f.tv_min = 0.5 * (1.0 + (n - 2) * std::log(dom.p0));
        add_rzone(dom.p0, 1e12);
        return f;
    }

    // iterated-log frames on interval / ball / annulus, level i
    const int i = s.level;
    const double D = s.D;
    const double logD = std::log(D);
    struct Branch {
        bool from_lo;  // boundary at p0 (delta = r - p0) vs at p1 (delta = p1 - r)
    };
    std::vector<Branch> branches;
    if (dom.kind == scen::DomainKind::RadialBall)
        branches = {{false}};
    else
        branches = {{true}, {false}};
    for (const auto& br : branches) {
        Frame::TZone z;
        const bool lo = br.from_lo;
        z.density = [dom, i, D, logD, lo](double tv) {
            const SChain sc = schain(i, 2.0 * tv, logD);
            const double delta = std::exp(sc.log_delta);
            const double r = lo ? dom.p0 + delta : dom.p1 - delta;
            return dom.measure_density(r) / (2.0 * D);
        };
        if (dom.kind == scen::DomainKind::Interval) {
            z.Lv = [](double) { return 0.0; };
            z.V = [](double) { return 0.0; };
        } else {
            const double sgn = lo ? -1.0 : 1.0;  // sign of -Lap(delta) = sgn*(n-1)/r
            const int n = dom.n;
            z.Lv = [dom, i, logD, sgn, n, lo](double tv) {
                const SChain sc = schain(i, 2.0 * tv, logD);
                if (sc.tiny) return 0.0;
                const double delta = std::exp(sc.log_delta);
                const double r = lo ? dom.p0 + delta : dom.p1 - delta;
                return 2.0 * sgn * (n - 1) / r * std::exp(sc.log_delta - sc.logPi);
            };
            z.V = [dom, i, logD, sgn, n, lo](double tv) {
                const SChain sc = schain(i, 2.0 * tv, logD);
                if (sc.tiny) return 0.0;
                const double delta = std::exp(sc.log_delta);
                const double r = lo ? dom.p0 + delta : dom.p1 - delta;
                const double fac = 1.0 - sc.Ri_m1 - sc.Pi;
                return 2.0 * sgn * (n - 1) / r * fac * std::exp(sc.log_delta - 2.0 * sc.logPi);
            };
        }
        z.gdef = [](double) { return 0.0; };
        f.tzones.push_back(std::move(z));
    }
    // valid window range: past the ridge (or the ball center)
    const double dmax = dom.sup_delta();
    const double v_top = 1.0 - std::log(xlog::x_eval(i, dmax / D));
    f.tv_min = 0.5 * v_top;
    if (dom.kind == scen::DomainKind::RadialBall) {
        add_rzone(dom.p0, dom.p1);
    } else {
        add_rzone(dom.p0, dom.ridge());
        add_rzone(dom.ridge(), dom.p1);
    }
    return f;
}

double default_ramp(double window_length) {
    return std::min(6.0 * std::sqrt(window_length), 0.375 * window_length);
}

namespace {

struct TermIntegrals {
    double num2 = 0, den2 = 0;
    double bulk2 = 0, gdef2 = 0, cut1_2 = 0, cut2_2 = 0, pot2 = 0;
};

TermIntegrals integrate_terms(const Frame& f, double eta, const ScaledCutoff& psi,
                              const std::function<double(double)>* rho = nullptr,
                              double lambda = 0.0, TermIntegrals* w2 = nullptr) {
    const double mu = std::sqrt(eta);
    TermIntegrals ti;
    const double A = psi.A, B = psi.B, ramp = psi.ramp;
    const std::array<std::pair<double, double>, 3> pieces = {
        std::pair{A, A + ramp}, std::pair{A + ramp, B - ramp}, std::pair{B - ramp, B}};
    for (const auto& z : f.tzones) {
        for (const auto& [lo, hi] : pieces) {
            if (hi <= lo) continue;
            const int panels =
                std::max(32, static_cast<int>(std::ceil((hi - lo) / std::max(ramp / 24.0, 0.25))));
            auto add = [&](double& acc, const std::function<double(double)>& g) {
                acc += gauss_composite(g, lo, hi, panels);
            };
            add(ti.den2, [&](double t) {
                const double p = psi.value(t);
                return p * p * z.density(t);
            });
            add(ti.num2, [&](double t) {
                const double p = psi.value(t), p1 = psi.d1(t), p2 = psi.d2(t);
                const double gd = z.gdef(t), lv = z.Lv(t), vv = z.V(t);
                const double R = eta * gd * p + vv * p + p1 * lv - p2 * (1.0 + gd);
                const double I = mu * p * lv - 2.0 * mu * p1 * (1.0 + gd);
                return (R * R + I * I) * z.density(t);
            });
            add(ti.bulk2, [&](double t) {
                const double val = mu * psi.value(t) * z.Lv(t);
                return val * val * z.density(t);
            });
            add(ti.gdef2, [&](double t) {
                const double val = eta * z.gdef(t) * psi.value(t);
                return val * val * z.density(t);
            });
            add(ti.cut1_2, [&](double t) {
                const double val = psi.d1(t) * z.Lv(t) - psi.d2(t) * (1.0 + z.gdef(t));
                return val * val * z.density(t);
            });
            add(ti.cut2_2, [&](double t) {
                const double val = 2.0 * mu * psi.d1(t) * (1.0 + z.gdef(t));
                return val * val * z.density(t);
            });
            add(ti.pot2, [&](double t) {
                const double val = z.V(t) * psi.value(t);
                return val * val * z.density(t);
            });
            if (rho != nullptr && w2 != nullptr) {
                add(w2->num2, [&](double t) {
                    const double p = psi.value(t), p1 = psi.d1(t), p2 = psi.d2(t);
                    const double gd = z.gdef(t), lv = z.Lv(t), vv = z.V(t);
                    const double rh = (*rho)(t);
                    const double R =
                        eta * gd * p + vv * p + p1 * lv - p2 * (1.0 + gd) + lambda * (1.0 - rh) * p;
                    const double I = mu * p * lv - 2.0 * mu * p1 * (1.0 + gd);
                    return (R * R + I * I) / rh * z.density(t);
                });
                add(w2->den2, [&](double t) {
                    const double p = psi.value(t);
                    return (*rho)(t)*p * p * z.density(t);
                });
                add(w2->pot2, [&](double t) {  // lambda^2 int (1-rho)^2/rho psi^2 dchi
                    const double p = psi.value(t);
                    const double rh = (*rho)(t);
                    return lambda * lambda * (1.0 - rh) * (1.0 - rh) / rh * p * p * z.density(t);
                });
            }
        }
    }
    return ti;
}

}  // namespace

ResidualResult quasimode_residual(const Frame& f, double eta, double A, double B, double ramp) {
    require(eta >= 0.0, "quasimode targets eta >= 0 only");
    require(A >= f.tv_min - 1e-12, "window begins before the frame coordinate is defined");
    if (ramp <= 0.0) ramp = default_ramp(B - A);
    require(B - A >= 2.0 * ramp, "window too short for its ramps");
    const ScaledCutoff psi{A, B, ramp};
    const TermIntegrals ti = integrate_terms(f, eta, psi);
    require(ti.den2 > 0.0, "empty effective window");
    ResidualResult res;
    res.num = std::sqrt(ti.num2);
    res.den = std::sqrt(ti.den2);
    res.ratio = res.num / res.den;
    res.ramp = ramp;
    res.terms = QuasimodeTerms{std::sqrt(ti.bulk2), std::sqrt(ti.gdef2), std::sqrt(ti.cut1_2),
                               std::sqrt(ti.cut2_2), std::sqrt(ti.pot2)};
    return res;
}

double residual_by_operator_route(const Frame& f, double eta, double A, double B, double ramp) {
    require(!f.rzones.empty(), "frame carries no radial route");
    if (ramp <= 0.0) ramp = default_ramp(B - A);
    const ScaledCutoff psi{A, B, ramp};
    const double mu = std::sqrt(eta);
    double num2 = 0.0, den2 = 0.0;
    for (const auto& z : f.rzones) {
        // r-preimage of [A,B] on this zone (tv monotone)
        const bool incr = z.tv_of_r(z.r_lo + 0.25 * (z.r_hi - z.r_lo)) <
                          z.tv_of_r(z.r_lo + 0.75 * (z.r_hi - z.r_lo));
        auto rof = [&](double tv) {
            double lo = z.r_lo, hi = z.r_hi;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                const bool above = z.tv_of_r(mid) > tv;
                if (above == incr)
                    hi = mid;
                else
                    lo = mid;
            }
            return 0.5 * (lo + hi);
        };
        const double rA = rof(A), rB = rof(B);
        const double r0 = std::min(rA, rB), r1 = std::max(rA, rB);
        // panel boundaries on a uniform tv grid (resolves the oscillation)
        const int segments = std::max(16, static_cast<int>(std::ceil((B - A) * 8.0)));
        std::vector<double> cuts;
        cuts.push_back(r0);
        for (int j = 1; j < segments; ++j) {
            const double tv = incr ? A + (B - A) * j / segments : B - (B - A) * j / segments;
            cuts.push_back(rof(tv));
        }
        cuts.push_back(r1);
        std::sort(cuts.begin(), cuts.end());
        auto integrand_num = [&](double r) {
            const double tv = z.tv_of_r(r);
            const double p = psi.value(tv), p1 = psi.d1(tv), p2 = psi.d2(tv);
            const double tvp = z.dtv_dr(r), tvpp = z.d2tv_dr2(r);
            // phi = psi(tv) e^{i mu tv}; with the unimodular phase factored out,
            // phi ~ (p, 0), phi' ~ (p1 + i mu p) tv', and
            // phi'' ~ (p2 + 2 i mu p1 - mu^2 p) tv'^2 + (p1 + i mu p) tv''
            const double re1 = p1 * tvp, im1 = mu * p * tvp;
            const double re2 = (p2 - mu * mu * p) * tvp * tvp + p1 * tvpp;
            const double im2 = 2.0 * mu * p1 * tvp * tvp + mu * p * tvpp;
            const double m = z.m_r(r);
            const double aw = z.aW_r(r);
            // (log(m aw))' by a tight centered difference: this route is the
            // independent check, the 1e-8 differentiation error sits far below
            // its 1e-6 agreement tolerance
            const double h = 1e-6 * std::max(std::abs(r), 1e-6);
            const double gp = (std::log(z.m_r(r + h) * z.aW_r(r + h)) -
                               std::log(z.m_r(r - h) * z.aW_r(r - h))) /
                              (2.0 * h);
            // (L - eta) phi = -aw phi'' - aw (log(m aw))' phi' + (V - eta) phi
            const double Vr = z.V_r(r);
            const double Rr = -aw * re2 - aw * gp * re1 + (Vr - eta) * p;
            const double Ii = -aw * im2 - aw * gp * im1;
            return (Rr * Rr + Ii * Ii) * m;
        };
        auto integrand_den = [&](double r) {
            const double p = psi.value(z.tv_of_r(r));
            return p * p * z.m_r(r);
        };
        for (size_t j = 0; j + 1 < cuts.size(); ++j) {
            num2 += gauss_panel(integrand_num, cuts[j], cuts[j + 1], gauss16());
            den2 += gauss_panel(integrand_den, cuts[j], cuts[j + 1], gauss16());
        }
    }
    require(den2 > 0.0, "empty effective window");
    return std::sqrt(num2 / den2);
}

QuasimodeReport ess_spectrum_probe(const Frame& f, const std::vector<double>& eta_grid,
                                   const std::vector<double>& window_lengths, double tol) {
    QuasimodeReport rep;
    rep.scenario = f.scenario;
    rep.tol = tol;
    rep.all_certified = true;
    int n_index = 0;
    for (double eta : eta_grid) {
        require(eta >= 0.0, "ess_spectrum_probe: the construction targets eta >= 0 only");
        ++n_index;
        ProbeRow row;
        row.eta = eta;
        row.lambda_scenario = (1.0 + eta) / f.kappa;
        // advance the window start until sup |L~ tv| <= 1/n (the proof's choice)
        double a = f.tv_min + 0.5;
        auto supLv = [&](double t0) {
            double s = 0.0;
            for (const auto& z : f.tzones)
                for (int j = 0; j <= 20; ++j) s = std::max(s, std::abs(z.Lv(t0 + 0.37 * j)));
            return s;
        };
        for (int guard = 0; guard < 200 && supLv(a) > 1.0 / n_index; ++guard) a += 0.5;
        std::vector<double> lmass, lratio;
        for (double L : window_lengths) {
            ProbeCell cell;
            cell.A = a;
            cell.B = a + L;
            const ResidualResult rr = quasimode_residual(f, eta, cell.A, cell.B);
            cell.ratio = rr.ratio;
            cell.terms = rr.terms;
            cell.mass = f.window_mass(cell.A, cell.B);
            lmass.push_back(std::log(cell.mass));
            lratio.push_back(std::log(cell.ratio));
            row.cells.push_back(cell);
        }
        row.slope = fit_slope(lmass, lratio);
        double best = 1e300;
        for (const auto& c : row.cells) best = std::min(best, c.ratio);
        row.certified = best <= tol && row.slope < 0.0;
        row.supLv_last = supLv(row.cells.back().A);
        double sv = 0.0;
        for (const auto& z : f.tzones)
            for (int j = 0; j <= 40; ++j)
                sv = std::max(sv, std::abs(z.V(row.cells.back().A +
                                               (row.cells.back().B - row.cells.back().A) * j / 40.0)));
        row.supV_last = sv;
        rep.rows.push_back(std::move(row));
        if (!rep.rows.back().certified) rep.all_certified = false;
    }
    return rep;
}

WindowSearchResult window_search(const meas::PushforwardMeasure& chi, double a, double eps,
                                 double d) {
    WindowSearchResult res;
    require(eps > 0 && d >= 0, "window_search: need eps > 0, d >= 0");
    require(!chi.edges.empty() && a >= chi.edges.front(), "window_search: a outside support");
    const double va = chi.V(a);
    const double top = chi.edges.back();
    for (double b : chi.edges) {
        if (b < a + d) continue;
        if (b + 1.0 > top) break;  // S(b) not represented: stop the scan
        const double denom = chi.V(b) - va;
        if (denom <= 0.0) continue;
        const double ratio = chi.S(b) / denom;
        res.ratio = ratio;
        if (ratio <= eps) {
            res.found = true;
            res.b = b;
            return res;
        }
    }
    res.found = false;  // growth obstruction on the represented range
    return res;
}

TransferResult transfer_residual(const Frame& f, const std::function<double(double)>& rho,
                                 double lambda_frame, double A, double B, double ramp) {
    const double eta = lambda_frame - 1.0;
    require(eta >= 0.0, "transfer: lambda below the frame bottom");
    if (ramp <= 0.0) ramp = default_ramp(B - A);
    const ScaledCutoff psi{A, B, ramp};
    TermIntegrals w2;
    const TermIntegrals w1 = integrate_terms(f, eta, psi, &rho, lambda_frame, &w2);
    TransferResult res;
    res.ratio_w1 = std::sqrt(w1.num2 / w1.den2);
    res.ratio_w2 = std::sqrt(w2.num2 / w2.den2);
    // sup over the window of |W1/W2 - 1| and inf of rho (the factor-2 step
    // requires W2 >= W1/4)
    double sup_dev = 0.0, inf_rho = 1e300;
    for (int j = 0; j <= 400; ++j) {
        const double t = A + (B - A) * j / 400.0;
        const double rh = rho(t);
        require(rh > 0, "transfer: weights not comparable on the window");
        sup_dev = std::max(sup_dev, std::abs(1.0 / rh - 1.0));
        inf_rho = std::min(inf_rho, rh);
    }
    require(inf_rho >= 0.25, "transfer: W2 < W1/4 somewhere on the window");
    res.sup_dev = sup_dev;
    res.bound_w2 = (2.0 * std::sqrt(w1.num2) + std::sqrt(w2.pot2)) / std::sqrt(w2.den2);
    res.bound_holds = res.ratio_w2 <= res.bound_w2 + 1e-9;
    return res;
}

}  // namespace hardy::qm
