#include "hardy/eigsolve.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hardy/util.hpp"

namespace hardy::eig {

namespace {

// Sturm count: negatives in D of LDL^T of K - lambda M
int sturm_count(const fem::Pencil& p, double lambda, double eta, double* pert_used) {
    int count = 0;
    double d = p.Kd[0] - lambda * p.Md[0];
    if (d == 0.0) {
        d = eta;
        if (pert_used) *pert_used = eta;
    }
    if (d < 0) ++count;
    for (int j = 1; j < p.N; ++j) {
        const double e = p.Ke[static_cast<size_t>(j) - 1] - lambda * p.Me[static_cast<size_t>(j) - 1];
        double next = p.Kd[static_cast<size_t>(j)] - lambda * p.Md[static_cast<size_t>(j)] - e * e / d;
        if (next == 0.0) {
            next = eta;
            if (pert_used) *pert_used = eta;
        }
        if (next < 0) ++count;
        d = next;
    }
    return count;
}

}  // namespace

int inertia(const fem::Pencil& p, double lambda, double* pert_used) {
    if (p.N < 1) throw std::invalid_argument("inertia: empty pencil");
    if (pert_used) *pert_used = 0.0;
    const double eta = 1e-14 * std::max(p.kmax, 1.0);
    return sturm_count(p, lambda, eta, pert_used);
}

std::vector<EigValue> eig_bottom(const fem::Pencil& p, int k, double tol) {
    if (k < 1 || k > p.N) throw std::invalid_argument("eig_bottom: need 1 <= k <= N");
    if (tol < 1e-13) tol = 1e-13;
    // bracket all k eigenvalues
    double lo = 0.0, span = 1.0;
    while (inertia(p, lo) > 0) {
        lo -= span;
        span *= 2;
        if (span > 1e300) throw std::runtime_error("eig_bottom: lower bracket diverged");
    }
    double hi = 1.0;
    while (inertia(p, hi) < k) {
        hi *= 2;
        if (hi > 1e300) throw std::runtime_error("eig_bottom: upper bracket diverged");
    }
    std::vector<EigValue> out;
    out.reserve(static_cast<size_t>(k));
    double left = lo;
    for (int idx = 1; idx <= k; ++idx) {
        double a = left, b = hi;
        // invariant: inertia(a) < idx <= inertia(b)
        for (int it = 0; it < 400; ++it) {
            const double mid = 0.5 * (a + b);
            if (inertia(p, mid) >= idx)
                b = mid;
            else
                a = mid;
            const double scale = std::max({std::abs(a), std::abs(b), 1e-30});
            if (b - a <= tol * scale) break;
        }
        EigValue ev;
        ev.lo = a;
        ev.hi = b;
        ev.value = 0.5 * (a + b);
        ev.mult_hint = inertia(p, b) - inertia(p, a);
        out.push_back(ev);
        left = a;  // next eigenvalue cannot be below this bracket's left end
    }
    return out;
}

int count_below(const fem::Pencil& p, double threshold) { return inertia(p, threshold); }

namespace {

// tridiagonal solve (A - shift I style systems): LU with partial pivoting,
// fill-in bandwidth 2. a = subdiag, b = diag, c = superdiag.
std::vector<double> tridiag_solve(std::vector<double> a, std::vector<double> b,
                                  std::vector<double> c, std::vector<double> rhs) {
    const int n = static_cast<int>(b.size());
    std::vector<double> c2(static_cast<size_t>(n), 0.0);  // second superdiagonal fill-in
    for (int j = 0; j < n - 1; ++j) {
        const size_t sj = static_cast<size_t>(j);
        if (std::abs(a[sj]) > std::abs(b[sj])) {  // swap rows j, j+1
            std::swap(b[sj], a[sj]);
            std::swap(c[sj], b[sj + 1]);
            std::swap(c2[sj], c[sj + 1]);
            std::swap(rhs[sj], rhs[sj + 1]);
        }
        if (b[sj] == 0.0) b[sj] = 1e-300;
        const double m = a[sj] / b[sj];
        b[sj + 1] -= m * c[sj];
        c[sj + 1] -= m * c2[sj];
        rhs[sj + 1] -= m * rhs[sj];
        a[sj] = 0.0;
    }
    std::vector<double> x(static_cast<size_t>(n));
    for (int j = n - 1; j >= 0; --j) {
        const size_t sj = static_cast<size_t>(j);
        double s = rhs[sj];
        if (j + 1 < n) s -= c[sj] * x[sj + 1];
        if (j + 2 < n) s -= c2[sj] * x[sj + 2];
        if (b[sj] == 0.0) b[sj] = 1e-300;
        x[sj] = s / b[sj];
    }
    return x;
}

}  // namespace

EigVector eigvec(const fem::Pencil& p, double lambda, int max_iter) {
    const int n = p.N;
    EigVector res;
    // multiplicity hint from a small inertia window
    const double h = 1e-8 * std::max(std::abs(lambda), 1.0);
    res.mult_hint = std::max(1, inertia(p, lambda + h) - inertia(p, lambda - h));

    std::vector<double> x(static_cast<size_t>(n));
    uint64_t seed = 0x2545f4914f6cdd1dULL;
    for (auto& v : x) v = hardy::uniform_in(seed, -1, 1);
    auto m_norm = [&](const std::vector<double>& v) {
        double s = 0;
        for (int j = 0; j < n; ++j) {
            s += p.Md[static_cast<size_t>(j)] * v[static_cast<size_t>(j)] * v[static_cast<size_t>(j)];
            if (j + 1 < n)
                s += 2 * p.Me[static_cast<size_t>(j)] * v[static_cast<size_t>(j)] * v[static_cast<size_t>(j) + 1];
        }
        return std::sqrt(std::max(s, 0.0));
    };
    std::vector<double> sub(static_cast<size_t>(n) - 1), diag(static_cast<size_t>(n)),
        sup(static_cast<size_t>(n) - 1);
    for (int j = 0; j < n; ++j)
        diag[static_cast<size_t>(j)] = p.Kd[static_cast<size_t>(j)] - lambda * p.Md[static_cast<size_t>(j)];
    for (int j = 0; j + 1 < n; ++j)
        sub[static_cast<size_t>(j)] = sup[static_cast<size_t>(j)] =
            p.Ke[static_cast<size_t>(j)] - lambda * p.Me[static_cast<size_t>(j)];

    std::vector<double> Mx(static_cast<size_t>(n));
    for (int it = 0; it < max_iter; ++it) {
        // rhs = M x (inverse iteration on the pencil)
        for (int j = 0; j < n; ++j) {
            double s = p.Md[static_cast<size_t>(j)] * x[static_cast<size_t>(j)];
            if (j > 0) s += p.Me[static_cast<size_t>(j) - 1] * x[static_cast<size_t>(j) - 1];
            if (j + 1 < n) s += p.Me[static_cast<size_t>(j)] * x[static_cast<size_t>(j) + 1];
            Mx[static_cast<size_t>(j)] = s;
        }
        x = tridiag_solve(sub, diag, sup, Mx);
        const double nr = m_norm(x);
        if (!(nr > 0) || !std::isfinite(nr)) break;
        for (auto& v : x) v /= nr;
        // residual ||Kx - lambda Mx||_2 / ||Kx||_2
        double rn = 0, kn = 0;
        for (int j = 0; j < n; ++j) {
            double kx = p.Kd[static_cast<size_t>(j)] * x[static_cast<size_t>(j)];
            double mx = p.Md[static_cast<size_t>(j)] * x[static_cast<size_t>(j)];
            if (j > 0) {
                kx += p.Ke[static_cast<size_t>(j) - 1] * x[static_cast<size_t>(j) - 1];
                mx += p.Me[static_cast<size_t>(j) - 1] * x[static_cast<size_t>(j) - 1];
            }
            if (j + 1 < n) {
                kx += p.Ke[static_cast<size_t>(j)] * x[static_cast<size_t>(j) + 1];
                mx += p.Me[static_cast<size_t>(j)] * x[static_cast<size_t>(j) + 1];
            }
            rn += (kx - lambda * mx) * (kx - lambda * mx);
            kn += kx * kx;
        }
        res.residual = std::sqrt(rn) / std::max(std::sqrt(kn), 1e-300);
        if (res.residual <= 1e-8) {
            res.converged = true;
            break;
        }
    }
    // sign normalization: largest-magnitude entry positive
    double big = 0;
    for (double v : x)
        if (std::abs(v) > std::abs(big)) big = v;
    if (big < 0)
        for (auto& v : x) v = -v;
    res.x = std::move(x);
    return res;
}

double generalized_trace(const fem::Pencil& p) {
    // tr(M^{-1}K) = sum_j e_j^T M^{-1} K e_j: solve M y = K e_j column-wise
    const int n = p.N;
    double tr = 0.0;
    std::vector<double> sub(static_cast<size_t>(std::max(n - 1, 0))),
        sup(static_cast<size_t>(std::max(n - 1, 0))), diag(static_cast<size_t>(n)), col(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        for (int r = 0; r < n; ++r) col[static_cast<size_t>(r)] = 0.0;
        col[static_cast<size_t>(j)] = p.Kd[static_cast<size_t>(j)];
        if (j > 0) col[static_cast<size_t>(j) - 1] = p.Ke[static_cast<size_t>(j) - 1];
        if (j + 1 < n) col[static_cast<size_t>(j) + 1] = p.Ke[static_cast<size_t>(j)];
        for (int r = 0; r < n; ++r) diag[static_cast<size_t>(r)] = p.Md[static_cast<size_t>(r)];
        for (int r = 0; r + 1 < n; ++r)
            sub[static_cast<size_t>(r)] = sup[static_cast<size_t>(r)] = p.Me[static_cast<size_t>(r)];
        const auto y = tridiag_solve(sub, diag, sup, col);
        tr += y[static_cast<size_t>(j)];
    }
    return tr;
}

}  // namespace hardy::eig
