#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hardy {

// Gauss-Legendre nodes/weights on [-1,1]. 8 points: degree-15 exactness,
// enough for the <=1e-10 per-element quadrature contract on smooth data.
struct GaussRule {
    std::vector<double> x, w;
};

const GaussRule& gauss8();
const GaussRule& gauss16();

// integrate f over [a,b] with one Gauss panel
double gauss_panel(const std::function<double(double)>& f, double a, double b,
                   const GaussRule& rule = gauss8());

// composite Gauss over [a,b] with n panels
double gauss_composite(const std::function<double(double)>& f, double a, double b,
                       int panels, const GaussRule& rule = gauss8());

// deterministic pairwise summation (order-independent reduction)
double pairwise_sum(const std::vector<double>& v);

// shortest round-trip decimal formatting (byte-stable CSV/JSON output)
std::string format_double(double v);

// least-squares slope of y against x
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

// simple bisection on a monotone predicate: smallest t in [lo,hi] with pred(t);
// pred must be false at lo and true at hi.
double bisect_first(const std::function<bool(double)>& pred, double lo, double hi,
                    double rel_tol);

struct CsvWriter {
    std::string buf;
    void row(const std::vector<std::string>& cells);
    void write(const std::string& path) const;
};

uint64_t splitmix64(uint64_t& state);

// uniform double in [lo, hi) from a splitmix64 stream
double uniform_in(uint64_t& state, double lo, double hi);

}  // namespace hardy
