#include "hardy/discretize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hardy/util.hpp"

namespace hardy::fem {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

// Element sizes h_j filling `span` with `m` elements, geometric with ratio rho
// (rho = 1/q >= 1) away from the singular end. When a pure geometric fill
// would drop the first element below `floor_h` (node collapse in double),
// only the first g elements grade and the rest stay uniform.
std::vector<double> geometric_sizes(double span, int m, double rho, double floor_h) {
    std::vector<double> h(static_cast<size_t>(m));
    if (std::abs(rho - 1.0) < 1e-14) {
        for (auto& v : h) v = span / m;
        return h;
    }
    floor_h = std::max(floor_h, span * 1e-13);
    const double pure_h0 =
        (m * std::log(rho) < 600.0) ? span * (rho - 1.0) / (std::pow(rho, m) - 1.0) : 0.0;
    if (pure_h0 >= floor_h) {
        double cur = pure_h0;
        for (int j = 0; j < m; ++j) {
            h[static_cast<size_t>(j)] = cur;
            cur *= rho;
        }
        return h;
    }
    // g graded elements from ~floor_h, then uniform continuation
    int g = std::max(1, std::min(m - 1, static_cast<int>(std::ceil(
                                             std::log(span / (m * floor_h)) / std::log(rho)))));
    for (;; --g) {
        const double denom = (std::pow(rho, g) - 1.0) / (rho - 1.0) +
                             (m - g) * std::pow(rho, g - 1);
        const double h0 = span / denom;
        if (h0 >= floor_h || g == 1) {
            double cur = h0;
            for (int j = 0; j < m; ++j) {
                h[static_cast<size_t>(j)] = cur;
                if (j < g - 1) cur *= rho;
            }
            return h;
        }
    }
}

}  // namespace

Mesh make_mesh(double lo, double hi, int N, double q, double eps_min, bool sing_lo, bool sing_hi,
               bool log_uniform) {
    require(N >= 3, "make_mesh: N >= 3");
    require(q > 0 && q <= 1.0, "make_mesh: q in (0,1]");
    const double a = lo + (sing_lo ? eps_min : 0.0);
    const double b = hi - (sing_hi ? eps_min : 0.0);
    require(b > a, "make_mesh: infeasible truncation");
    if ((sing_lo || sing_hi) && eps_min > 1e-2 * (hi - lo))
        throw std::invalid_argument("make_mesh: eps_min too large");
    Mesh mesh;
    mesh.q = q;
    mesh.eps_min = eps_min;
    mesh.graded_lo = sing_lo && q < 1.0;
    mesh.graded_hi = sing_hi && q < 1.0;
    mesh.log_uniform = log_uniform;
    const int m = N - 1;  // elements
    mesh.nodes.resize(static_cast<size_t>(N));
    if (log_uniform) {
        require(a > 0, "log-uniform mesh needs positive lower end");
        for (int j = 0; j < N; ++j)
            mesh.nodes[static_cast<size_t>(j)] = a * std::pow(b / a, double(j) / m);
    } else if (mesh.graded_lo && mesh.graded_hi) {
        const double mid = 0.5 * (a + b);
        const int ml = m / 2, mr = m - ml;
        const auto hl = geometric_sizes(mid - a, ml, 1.0 / q, eps_min);
        const auto hr = geometric_sizes(b - mid, mr, 1.0 / q, eps_min);
        double x = a;
        int idx = 0;
        mesh.nodes[idx++] = x;
        for (int j = 0; j < ml; ++j) mesh.nodes[idx++] = (x += hl[static_cast<size_t>(j)]);
        for (int j = mr - 1; j >= 0; --j) mesh.nodes[idx++] = (x += hr[static_cast<size_t>(j)]);
        mesh.nodes.back() = b;
    } else if (mesh.graded_lo || mesh.graded_hi) {
        auto h = geometric_sizes(b - a, m, 1.0 / q, eps_min);
        if (mesh.graded_hi) std::reverse(h.begin(), h.end());  // smallest at hi end
        double x = a;
        int idx = 0;
        mesh.nodes[idx++] = x;
        for (int j = 0; j < m; ++j) mesh.nodes[idx++] = (x += h[static_cast<size_t>(j)]);
        mesh.nodes.back() = b;
    } else {
        for (int j = 0; j < N; ++j) mesh.nodes[static_cast<size_t>(j)] = a + (b - a) * j / m;
    }
    for (size_t j = 1; j < mesh.nodes.size(); ++j)
        require(mesh.nodes[j] > mesh.nodes[j - 1], "make_mesh: nodes not increasing");
    return mesh;
}

Mesh scenario_mesh(const scen::Scenario& s, int N, double q, double eps_min) {
    const auto& d = s.domain;
    if (d.kind == scen::DomainKind::RadialExterior)
        return make_mesh(d.p0, d.p1, N, 1.0, 0.0, false, false, /*log_uniform=*/true);
    return make_mesh(d.p0, d.p1, N, q, eps_min, s.sing_lo, s.sing_hi);
}

Mesh boundary_log_mesh(double sing_end, double other_end, int N, double eps_min) {
    require(N >= 3 && eps_min > 0, "boundary_log_mesh: bad parameters");
    const double span = std::abs(other_end - sing_end);
    require(eps_min < span, "boundary_log_mesh: eps_min exceeds the strip");
    const double sgn = (other_end > sing_end) ? 1.0 : -1.0;
    Mesh mesh;
    mesh.q = 0.0;  // ratio varies: log-uniform distances
    mesh.eps_min = eps_min;
    mesh.log_uniform = true;
    mesh.nodes.resize(static_cast<size_t>(N));
    for (int j = 0; j < N; ++j) {
        const double d = eps_min * std::pow(span / eps_min, double(j) / (N - 1));
        mesh.nodes[static_cast<size_t>(j)] = sing_end + sgn * d;
    }
    if (sgn < 0) std::reverse(mesh.nodes.begin(), mesh.nodes.end());
    for (size_t j = 1; j < mesh.nodes.size(); ++j)
        require(mesh.nodes[j] > mesh.nodes[j - 1], "boundary_log_mesh: node collapse");
    return mesh;
}

namespace {

struct ElementContrib {
    double k00, k01, k11;
    double m00, m01, m11;
};

// one-element quadrature of the stiffness and mass forms on [xl, xr]
template <typename KA, typename MA>
ElementContrib element_forms(double xl, double xr, KA&& kint, MA&& mint) {
    const GaussRule& g = gauss8();
    const double h = xr - xl, mid = 0.5 * (xl + xr), half = 0.5 * h;
    ElementContrib e{0, 0, 0, 0, 0, 0};
    for (size_t i = 0; i < g.x.size(); ++i) {
        const double x = mid + half * g.x[i];
        const double wq = g.w[i] * half;
        const double pl = (xr - x) / h, pr = (x - xl) / h;  // hat values
        const double dl = -1.0 / h, dr = 1.0 / h;
        const auto [ka, kc] = kint(x);  // (gradient coefficient, potential coefficient)
        e.k00 += wq * (ka * dl * dl + kc * pl * pl);
        e.k01 += wq * (ka * dl * dr + kc * pl * pr);
        e.k11 += wq * (ka * dr * dr + kc * pr * pr);
        const double mc = mint(x);
        e.m00 += wq * mc * pl * pl;
        e.m01 += wq * mc * pl * pr;
        e.m11 += wq * mc * pr * pr;
    }
    return e;
}

Pencil assemble(const std::vector<double>& nodes, bool dirichlet_lo, bool dirichlet_hi,
                const std::function<std::pair<double, double>(double)>& kint,
                const std::function<double(double)>& mint) {
    const int nn = static_cast<int>(nodes.size());
    std::vector<double> Kd(static_cast<size_t>(nn), 0.0), Ke(static_cast<size_t>(nn) - 1, 0.0);
    std::vector<double> Md(static_cast<size_t>(nn), 0.0), Me(static_cast<size_t>(nn) - 1, 0.0);
    for (int el = 0; el + 1 < nn; ++el) {
        const auto e = element_forms(nodes[static_cast<size_t>(el)],
                                     nodes[static_cast<size_t>(el) + 1], kint, mint);
        Kd[static_cast<size_t>(el)] += e.k00;
        Kd[static_cast<size_t>(el) + 1] += e.k11;
        Ke[static_cast<size_t>(el)] += e.k01;
        Md[static_cast<size_t>(el)] += e.m00;
        Md[static_cast<size_t>(el) + 1] += e.m11;
        Me[static_cast<size_t>(el)] += e.m01;
    }
    const int lo = dirichlet_lo ? 1 : 0;
    const int hi = dirichlet_hi ? nn - 1 : nn;
    require(hi - lo >= 1, "assemble: no dofs left after Dirichlet elimination");
    Pencil p;
    p.N = hi - lo;
    p.nodes.assign(nodes.begin() + lo, nodes.begin() + hi);
    p.Kd.assign(Kd.begin() + lo, Kd.begin() + hi);
    p.Md.assign(Md.begin() + lo, Md.begin() + hi);
    p.Ke.assign(Ke.begin() + lo, Ke.begin() + lo + (p.N - 1));
    p.Me.assign(Me.begin() + lo, Me.begin() + lo + (p.N - 1));
    for (double v : p.Kd) p.kmax = std::max(p.kmax, std::abs(v));
    for (double v : p.Ke) p.kmax = std::max(p.kmax, std::abs(v));
    // positive definiteness of M: all LDL^T pivots must be positive
    double piv = p.Md[0];
    require(piv > 0, "assemble: mass matrix not positive definite");
    for (int j = 1; j < p.N; ++j) {
        piv = p.Md[static_cast<size_t>(j)] -
              p.Me[static_cast<size_t>(j) - 1] * p.Me[static_cast<size_t>(j) - 1] / piv;
        require(piv > 0, "assemble: mass matrix not positive definite");
    }
    return p;
}

}  // namespace

Pencil assemble_pencil(const scen::DomainSpec& dom, const scen::OperatorSpec& op,
                       const scen::WeightFn& W, const Mesh& mesh, bool dirichlet_lo,
                       bool dirichlet_hi, const scen::Profile* multiplier) {
    std::function<std::pair<double, double>(double)> kint;
    std::function<double(double)> mint;
    if (multiplier == nullptr) {
        kint = [&dom, &op](double x) {
            const double w = dom.measure_density(x);
            return std::pair<double, double>{op.a(x) * w, op.c(x) * w};
        };
        mint = [&dom, &W](double x) { return W(x).w * dom.measure_density(x); };
    } else {
        // transformed basis {u phi}: a (u phi)'^2 + c u^2 phi^2 expanded by the
        // product rule; keeps the quadratic form of the direct operator exactly
        const scen::Profile u = *multiplier;
        kint = [&dom, &op, u](double x) {
            const double w = dom.measure_density(x);
            const scen::ProfileEval e = u(x);
            // a(u' phi + u phi')^2 = a u^2 phi'^2 + 2 a u u' phi phi' + a u'^2 phi^2
            // fold the cross term into the quadrature below via the identity
            // phi phi' = (phi^2)'/2; here we return coefficients for phi'^2 and
            // phi^2 plus rely on element_forms' exact hat products, so expand
            // per-point with the full square instead:
            return std::pair<double, double>{op.a(x) * w * e.v * e.v,
                                             (op.a(x) * e.d1 * e.d1 + op.c(x) * e.v * e.v) * w};
        };
        mint = [&dom, &W, u](double x) {
            const scen::ProfileEval e = u(x);
            return W(x).w * e.v * e.v * dom.measure_density(x);
        };
    }
    if (multiplier == nullptr) {
        Pencil p = assemble(mesh.nodes, dirichlet_lo, dirichlet_hi, kint, mint);
        return p;
    }
    // with a multiplier the cross term 2 a u u' phi phi' must be added exactly
    const scen::Profile u = *multiplier;
    const int nn = static_cast<int>(mesh.nodes.size());
    Pencil p = assemble(mesh.nodes, dirichlet_lo, dirichlet_hi, kint, mint);
    // add per-element quadrature of 2 a u u' phi_i phi_j' symmetrized
    const GaussRule& g = gauss8();
    const int lo = dirichlet_lo ? 1 : 0;
    for (int el = 0; el + 1 < nn; ++el) {
        const double xl = mesh.nodes[static_cast<size_t>(el)];
        const double xr = mesh.nodes[static_cast<size_t>(el) + 1];
        const double h = xr - xl, mid = 0.5 * (xl + xr), half = 0.5 * h;
        double c00 = 0, c01 = 0, c11 = 0;
        for (size_t i = 0; i < g.x.size(); ++i) {
            const double x = mid + half * g.x[i];
            const double wq = g.w[i] * half;
            const scen::ProfileEval e = u(x);
            const double f = 2.0 * op.a(x) * dom.measure_density(x) * e.v * e.d1;
            const double pl = (xr - x) / h, pr = (x - xl) / h;
            const double dl = -1.0 / h, dr = 1.0 / h;
            // symmetrized: f * (phi_i phi_j' + phi_i' phi_j)/2
            c00 += wq * f * pl * dl;
            c11 += wq * f * pr * dr;
            c01 += wq * f * 0.5 * (pl * dr + pr * dl);
        }
        const int i0 = el - lo, i1 = el + 1 - lo;
        if (i0 >= 0 && i0 < p.N) p.Kd[static_cast<size_t>(i0)] += c00;
        if (i1 >= 0 && i1 < p.N) p.Kd[static_cast<size_t>(i1)] += c11;
        if (i0 >= 0 && i1 < p.N && i0 + 1 == i1) p.Ke[static_cast<size_t>(i0)] += c01;
    }
    p.kmax = 0.0;
    for (double v : p.Kd) p.kmax = std::max(p.kmax, std::abs(v));
    for (double v : p.Ke) p.kmax = std::max(p.kmax, std::abs(v));
    return p;
}

Pencil assemble_groundstate_frame(const scen::DomainSpec& dom, const scen::ProfilePair& pair,
                                  const scen::OperatorSpec& op, const Mesh& mesh) {
    const scen::WeightFn W = scen::supersolution_weight(pair, op);
    auto kint = [&dom, &op, &pair, W](double x) {
        const scen::ProfileEval e0 = pair.u0(x), e1 = pair.u1(x);
        if (!(e0.v > 0) || !(e1.v > 0))
            throw std::invalid_argument("frame assembly: u_{1/2} must be positive on the mesh");
        const double u2 = e0.v * e1.v;  // u_{1/2}^2
        const double w = W(x).w;
        if (!(w > 0)) throw std::invalid_argument("frame assembly: W(u0,u1) vanishes on the mesh");
        const double m = u2 * w * dom.measure_density(x);
        // V = (V0 + V1)/(2W)
        const double av = op.a(x);
        const double lm = dom.measure_logderiv(x);
        const double P0 = -av * e0.d2 - (op.da(x) + av * lm) * e0.d1 + op.c(x) * e0.v;
        const double P1 = -av * e1.d2 - (op.da(x) + av * lm) * e1.d1 + op.c(x) * e1.v;
        const double V = 0.5 * (P0 / e0.v + P1 / e1.v) / w;
        return std::pair<double, double>{av / w * m, V * m};
    };
    auto mint = [&dom, &pair, W](double x) {
        const scen::ProfileEval e0 = pair.u0(x), e1 = pair.u1(x);
        return e0.v * e1.v * W(x).w * dom.measure_density(x);
    };
    Pencil p = assemble(mesh.nodes, true, true, kint, mint);
    p.frame = true;
    return p;
}

Pencil scenario_pencil(const scen::Scenario& s, const Mesh& mesh) {
    if (s.pointwise_only)
        throw std::invalid_argument("scenario '" + s.name +
                                    "' is pointwise-only: no pencil is defined");
    const scen::WeightFn W = scen::build_weight(s.domain, s.weight);
    const bool dir_lo = s.domain.kind != scen::DomainKind::RadialBall;
    Pencil p = assemble_pencil(s.domain, s.op, W, mesh, dir_lo, true);
    p.scenario = s.name;
    p.weight = s.weight.name();
    return p;
}

void export_pencil(const Pencil& p, const Mesh& mesh, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "# pencil scenario=" << (p.scenario.empty() ? "-" : p.scenario)
        << " weight=" << (p.weight.empty() ? "-" : p.weight) << " N=" << p.N
        << " q=" << format_double(mesh.q) << " eps_min=" << format_double(mesh.eps_min)
        << " frame=" << (p.frame ? 1 : 0) << "\n";
    out << "# node Kdiag Koff Mdiag Moff\n";
    for (int j = 0; j < p.N; ++j) {
        out << format_double(p.nodes[static_cast<size_t>(j)]) << ' '
            << format_double(p.Kd[static_cast<size_t>(j)]) << ' '
            << (j + 1 < p.N ? format_double(p.Ke[static_cast<size_t>(j)]) : "0") << ' '
            << format_double(p.Md[static_cast<size_t>(j)]) << ' '
            << (j + 1 < p.N ? format_double(p.Me[static_cast<size_t>(j)]) : "0") << "\n";
    }
}

Pencil import_pencil(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    Pencil p;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (!header) {
                const auto pos = line.find("scenario=");
                if (pos != std::string::npos) {
                    std::istringstream hs(line.substr(1));
                    std::string tok;
                    while (hs >> tok) {
                        const auto eq = tok.find('=');
                        if (eq == std::string::npos) continue;
                        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
                        if (key == "scenario" && val != "-") p.scenario = val;
                        if (key == "weight" && val != "-") p.weight = val;
                        if (key == "frame") p.frame = val == "1";
                    }
                }
                header = true;
            }
            continue;
        }
        std::istringstream ls(line);
        double node, kd, ke, md, me;
        if (!(ls >> node >> kd >> ke >> md >> me))
            throw std::runtime_error("pencil import: malformed row");
        p.nodes.push_back(node);
        p.Kd.push_back(kd);
        p.Ke.push_back(ke);
        p.Md.push_back(md);
        p.Me.push_back(me);
    }
    if (p.nodes.empty()) throw std::runtime_error("pencil import: no rows");
    p.N = static_cast<int>(p.nodes.size());
    p.Ke.pop_back();  // last off-diagonal slot is padding
    p.Me.pop_back();
    for (double v : p.Kd) p.kmax = std::max(p.kmax, std::abs(v));
    for (double v : p.Ke) p.kmax = std::max(p.kmax, std::abs(v));
    return p;
}

}  // namespace hardy::fem
