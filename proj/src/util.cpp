#include "hardy/util.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace hardy {

namespace {

GaussRule make_rule(std::initializer_list<double> xs, std::initializer_list<double> ws) {
    GaussRule r;
    for (double x : xs) {
        r.x.push_back(-x);
        r.x.push_back(x);
    }
    for (double w : ws) {
        r.w.push_back(w);
        r.w.push_back(w);
    }
    return r;
}

}  // namespace

const GaussRule& gauss8() {
    static const GaussRule rule = make_rule(
        {0.1834346424956498049394761, 0.5255324099163289858177390,
         0.7966664774136267395915539, 0.9602898564975362316835609},
        {0.3626837833783619829651504, 0.3137066458778872873379622,
         0.2223810344533744705443560, 0.1012285362903762591525314});
    return rule;
}

const GaussRule& gauss16() {
    static const GaussRule rule = make_rule(
        {0.0950125098376374401853193, 0.2816035507792589132304605,
         0.4580167776572273863424194, 0.6178762444026437484466718,
         0.7554044083550030338951012, 0.8656312023878317438804679,
         0.9445750230732325760779884, 0.9894009349916499325961542},
        {0.1894506104550684962853967, 0.1826034150449235888667637,
         0.1691565193950025381893121, 0.1495959888165767320815017,
         0.1246289712555338720524763, 0.0951585116824927848099251,
         0.0622535239386478928628438, 0.0271524594117540948517806});
    return rule;
}

double gauss_panel(const std::function<double(double)>& f, double a, double b,
                   const GaussRule& rule) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double s = 0.0;
    for (size_t i = 0; i < rule.x.size(); ++i) s += rule.w[i] * f(mid + half * rule.x[i]);
    return s * half;
}

double gauss_composite(const std::function<double(double)>& f, double a, double b,
                       int panels, const GaussRule& rule) {
    if (panels < 1) panels = 1;
    std::vector<double> parts(static_cast<size_t>(panels));
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p)
        parts[static_cast<size_t>(p)] = gauss_panel(f, a + p * h, a + (p + 1) * h, rule);
    return pairwise_sum(parts);
}

double pairwise_sum(const std::vector<double>& v) {
    std::function<double(size_t, size_t)> rec = [&](size_t lo, size_t hi) -> double {
        if (hi - lo == 0) return 0.0;
        if (hi - lo == 1) return v[lo];
        size_t mid = lo + (hi - lo) / 2;
        return rec(lo, mid) + rec(mid, hi);
    };
    return rec(0, v.size());
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_slope: need >=2 matched samples");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    if (det == 0) throw std::invalid_argument("fit_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / det;
}

double bisect_first(const std::function<bool(double)>& pred, double lo, double hi,
                    double rel_tol) {
    if (!(lo < hi)) throw std::invalid_argument("bisect_first: bad bracket");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (pred(mid))
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= rel_tol * std::max(std::abs(lo), std::abs(hi))) break;
    }
    return hi;
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) buf += ',';
        buf += cells[i];
    }
    buf += '\n';
}

void CsvWriter::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << buf;
}

uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double uniform_in(uint64_t& state, double lo, double hi) {
    const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

}  // namespace hardy
