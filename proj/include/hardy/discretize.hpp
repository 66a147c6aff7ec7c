#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hardy/scenarios.hpp"

namespace hardy::fem {

struct Mesh {
    std::vector<double> nodes;  // strictly increasing, spans the truncated domain
    double q = 1.0;             // grading ratio toward singular ends
    double eps_min = 0.0;       // truncation distance at singular ends
    bool graded_lo = false, graded_hi = false;
    bool log_uniform = false;
    int elements() const { return static_cast<int>(nodes.size()) - 1; }
};

// Graded mesh on [lo,hi]: geometric element growth away from each singular
// end (ratio 1/q), uniform when q = 1, log-uniform for exterior domains.
// Singular ends are truncated at distance eps_min (Dirichlet sits there).
Mesh make_mesh(double lo, double hi, int N, double q, double eps_min, bool sing_lo, bool sing_hi,
               bool log_uniform = false);

// mesh for a scenario's full domain, grading toward its singular ends
Mesh scenario_mesh(const scen::Scenario& s, int N, double q, double eps_min);

// mesh whose distance to sing_end is log-uniform between eps_min and
// |other_end - sing_end| (boundary strips for shrinking-exhaustion estimates)
Mesh boundary_log_mesh(double sing_end, double other_end, int N, double eps_min);

struct Pencil {
    std::vector<double> nodes;      // dof coordinates (Dirichlet ends excluded)
    std::vector<double> Kd, Ke;     // stiffness tridiagonal (diag, off-diag)
    std::vector<double> Md, Me;     // mass tridiagonal
    std::string scenario, weight;
    bool frame = false;
    int N = 0;                      // dof count
    double kmax = 0.0;              // max |K| entry (pivot perturbation scale)
};

// Conforming P1 pencil: K = q-form of (a, c) over the measure w(r) dr,
// M = int W u^2 w(r) dr, per-element Gauss quadrature.
// `dirichlet_lo/hi`: eliminate the end node (natural end otherwise, e.g. ball
// center). `multiplier`: assemble on the transformed basis {m(r) phi_i} --
// the discrete h-transform used by the frame-equivalence check.
Pencil assemble_pencil(const scen::DomainSpec& dom, const scen::OperatorSpec& op,
                       const scen::WeightFn& W, const Mesh& mesh, bool dirichlet_lo,
                       bool dirichlet_hi, const scen::Profile* multiplier = nullptr);

// pencil of L = u^{-1}(W^{-1} P - 1) u, u = sqrt(u0 u1):
// K = int (a/W) psi'^2 m + int V psi^2 m, M = int psi^2 m over m = u^2 W w(r) dr
Pencil assemble_groundstate_frame(const scen::DomainSpec& dom, const scen::ProfilePair& pair,
                                  const scen::OperatorSpec& op, const Mesh& mesh);

// convenience: pencil for a scenario on its full domain
Pencil scenario_pencil(const scen::Scenario& s, const Mesh& mesh);

// columnar text export (header: scenario, N, q, eps_min; rows: node, Kdiag,
// Koff, Mdiag, Moff); import must round-trip bit-exactly
void export_pencil(const Pencil& p, const Mesh& mesh, const std::string& path);
Pencil import_pencil(const std::string& path);

}  // namespace hardy::fem
