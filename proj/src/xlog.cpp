#include "hardy/xlog.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hardy/util.hpp"

namespace hardy::xlog {

namespace {

// One application of X_1 in extended precision. 1 - log t never cancels for
// t <= 1, but near t = 1 we take log via log1p(t-1) to keep the last bits.
long double x1_ext(long double t) {
    const long double lg =
        (t > 0.5L) ? std::log1p(t - 1.0L) : std::log(t);
    return 1.0L / (1.0L - lg);
}

void check_domain(double t, bool open_right) {
    if (!(t > 0.0) || (open_right ? !(t < 1.0) : !(t <= 1.0)))
        throw std::domain_error("xlog: t outside " +
                                std::string(open_right ? "(0,1)" : "(0,1]"));
}

}  // namespace

double x_eval(int i, double t) {
    if (i < 0) throw std::domain_error("xlog: negative level");
    check_domain(t, false);
    long double v = t;
    for (int k = 0; k < i; ++k) v = x1_ext(v);
    return static_cast<double>(v);
}

double x_prod(int i, double t) {
    if (i < 0) throw std::domain_error("xlog: negative level");
    check_domain(t, false);
    long double v = t, p = 1.0L;
    for (int k = 0; k < i; ++k) {
        v = x1_ext(v);
        p *= v;
    }
    return static_cast<double>(p);
}

double x_deriv(int i, double t) {
    if (i < 0) throw std::domain_error("xlog: negative level");
    if (i == 0) {
        check_domain(t, false);
        return 0.0;
    }
    check_domain(t, true);
    long double v = t, p = 1.0L;
    for (int k = 1; k < i; ++k) {
        v = x1_ext(v);
        p *= v;
    }
    const long double xi = x1_ext(v);  // X_i(t)
    return static_cast<double>(p * xi * xi / static_cast<long double>(t));
}

Chain chain(int i, double t) {
    if (i < 0) throw std::domain_error("xlog: negative level");
    check_domain(t, false);
    Chain c;
    c.x.reserve(static_cast<size_t>(i));
    c.prod.reserve(static_cast<size_t>(i));
    c.rsum.reserve(static_cast<size_t>(i));
    long double v = t, p = 1.0L, r = 0.0L;
    for (int k = 1; k <= i; ++k) {
        v = x1_ext(v);
        p *= v;
        r += p;
        c.x.push_back(static_cast<double>(v));
        c.prod.push_back(static_cast<double>(p));
        c.rsum.push_back(static_cast<double>(r));
    }
    return c;
}

SeriesState series_sum(double t, double tol, long term_cap) {
    if (!(t >= 0.0) || !(t < 1.0)) throw std::domain_error("series_sum: t outside [0,1)");
    if (!(tol > 0.0)) throw std::invalid_argument("series_sum: tol must be positive");
    SeriesState st;
    st.t = t;
    if (t == 0.0) {
        // every term vanishes in the limit t -> 0+
        st.converged = true;
        st.tail_heuristic = false;
        st.remainder_bound = 0.0;
        return st;
    }
    long double v = t, term = 1.0L, sum = 0.0L, prev_term = 0.0L;
    const long keep = 64;  // record early partial sums only
    for (long k = 1; k <= term_cap; ++k) {
        v = x1_ext(v);
        prev_term = term;
        term *= v;
        sum += term;
        if (k <= keep) st.partial_sums.push_back(static_cast<double>(sum));
        st.terms = k;
        if (static_cast<double>(term) < tol * static_cast<double>(sum)) {
            st.converged = true;
            break;
        }
    }
    st.sum = static_cast<double>(sum);
    // Tail estimate from the empirical power law term_k ~ c k^{-p}: the ratio
    // term_k/term_{k-1} = X_k(t) = 1 - eps with eps ~ p/k, so p ~ k(1 - X_k).
    const long k = st.terms;
    const double ratio = static_cast<double>(term / prev_term);
    if (ratio < 1.0 && k > 1) {
        const double p = static_cast<double>(k) * (1.0 - ratio);
        if (p > 1.0)
            st.remainder_bound = static_cast<double>(term) * static_cast<double>(k) / (p - 1.0);
        else  // cannot certify summability from the observed ratio
            st.remainder_bound = std::numeric_limits<double>::infinity();
    } else {
        st.remainder_bound = std::numeric_limits<double>::infinity();
    }
    return st;
}

double select_D(double delta_max, int i_max, double margin) {
    if (!(delta_max > 0.0)) throw std::invalid_argument("select_D: delta_max must be positive");
    if (!(margin >= 0.0) || margin >= 1.0) throw std::invalid_argument("select_D: margin in [0,1)");
    const double target = 1.0 - margin;
    // R_i(delta/D) is increasing in delta and in i, so the binding constraint
    // sits at t = delta_max/D; bisect for the largest admissible t.
    auto r_value = [&](double t) -> double {
        if (i_max < 0) {
            SeriesState s = series_sum(t, 1e-9);
            return s.sum + (std::isfinite(s.remainder_bound) ? s.remainder_bound
                                                             : s.sum);  // pessimistic
        }
        if (i_max == 0) return 0.0;
        Chain c = chain(i_max, t);
        return c.rsum.back();
    };
    if (i_max == 0) return delta_max;  // R_0 == 0: any D >= delta_max works
    double lo = 1e-14, hi = 1.0 - 1e-12;
    if (r_value(hi) <= target) return delta_max;  // even t ~ 1 admissible
    // keep lo on the admissible side R(lo) <= target so the guarantee holds
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (r_value(mid) > target)
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= 1e-10 * hi) break;
    }
    return delta_max / lo;
}

}  // namespace hardy::xlog
