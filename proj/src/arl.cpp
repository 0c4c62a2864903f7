#include "knnscan/arl.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace knnscan {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt2Pi = 2.50662827463100050242;

double normCdf(double z) { return 0.5 * std::erfc(-z * 0.70710678118654752440); }
double normPdf(double z) { return std::exp(-0.5 * z * z) / kSqrt2Pi; }

// Composite Simpson over [a, b] with n panels (n even).
double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double odd = 0, even = 0;
    for (int i = 1; i < n; i += 2) odd += f(a + i * h);
    for (int i = 2; i < n; i += 2) even += f(a + i * h);
    return h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even);
}

double integrateDoubling(const std::function<double(double)>& f, double a, double b,
                         int panels, double relTol, int maxDoublings) {
    double prev = simpson(f, a, b, panels);
    for (int it = 0; it < maxDoublings; ++it) {
        panels *= 2;
        const double cur = simpson(f, a, b, panels);
        if (std::fabs(cur - prev) <= relTol * std::fabs(cur)) return cur;
        prev = cur;
    }
    return prev;
}

}  // namespace

double nu(double x) {
    if (x <= 0) throw std::invalid_argument("nu requires x > 0");
    if (x < 1e-8) return 1.0;
    const double z = 0.5 * x;
    const double phi = normCdf(z);
    return (2.0 / x) * (phi - 0.5) / (z * phi + normPdf(z));
}

void GInputs::validate() const {
    if (k < 1) throw std::invalid_argument("g inputs: k must be >= 1");
    const double kk = static_cast<double>(k);
    if (!(quantities.qK - kk * kk + kk > 0))
        throw std::invalid_argument("g inputs: require qK - k^2 + k > 0");
    if (!(kk + quantities.pK > 0))
        throw std::invalid_argument("g inputs: require k + pK > 0");
}

GValues gFunctions(const GInputs& g, double x, long* clampCount) {
    if (!(x > 0 && x < 1)) throw std::invalid_argument("g functions need 0 < x < 1");
    g.validate();
    const double k = g.k;
    const auto& q = g.quantities;
    GValues v;
    v.gw1 = 1.0 / (x * (1.0 - x));
    v.gw2 = (x * x - x + 1.0) / (x * (1.0 - x)) + 2.0 * q.pKplus1 / (k + q.pK);
    v.gd1 = 1.0 / (2.0 * x * (1.0 - x));
    v.gd2 = (10.0 * q.qK - 4.0 * k * q.qKplus1 - (6.0 * k * k - 10.0 * k)) /
                (2.0 * (q.qK - k * k + k)) -
            v.gd1;
    for (double* f : {&v.gw2, &v.gd2}) {
        if (*f < 1e-6) {
            *f = 1e-6;
            if (clampCount) ++*clampCount;
        }
    }
    return v;
}

void ArlRequest::validate() const {
    if (kind == StatKind::Z)
        throw std::invalid_argument("no analytic run-length formula for the baseline Z");
    if (!(b > 0)) throw std::invalid_argument("threshold b must be > 0");
    if (!(2 <= n0 && n0 < n1 && n1 <= L - 2))
        throw std::invalid_argument("arl request requires 2 <= n0 < n1 <= L-2");
    if (kind == StatKind::M && kappa < 0) throw std::invalid_argument("kappa must be >= 0");
    g.validate();
    if (skew) {
        if (kind == StatKind::S)
            throw std::invalid_argument("skewness correction is not defined for S");
        if (skew->n0 > n0 || skew->n1 < n1)
            throw std::invalid_argument("gamma table does not cover the scan range");
    }
}

namespace {

// Linear interpolation over a depth-indexed grid [n0 .. n1].
double lerpDepth(std::span<const double> values, int n0, int n1, double u) {
    if (u <= n0) return values.front();
    if (u >= n1) return values.back();
    const int lo = static_cast<int>(std::floor(u));
    const double f = u - lo;
    const int i = lo - n0;
    return values[i] * (1.0 - f) + values[static_cast<std::size_t>(i) + 1] * f;
}

// Fills gaps in a gamma column by linear interpolation between valid
// neighbours (nearest-value extension at the ends).
std::vector<double> fillColumn(std::span<const double> vals,
                               std::span<const std::uint8_t> valid) {
    const int n = static_cast<int>(vals.size());
    std::vector<double> out(vals.begin(), vals.end());
    int firstValid = -1;
    for (int i = 0; i < n; ++i)
        if (valid[i]) {
            firstValid = i;
            break;
        }
    if (firstValid < 0) throw std::runtime_error("gamma table has no valid entries");
    int prev = -1;
    for (int i = 0; i < n; ++i) {
        if (!valid[i]) continue;
        if (prev < 0) {
            for (int j = 0; j < i; ++j) out[j] = vals[i];
        } else if (prev != i - 1) {
            for (int j = prev + 1; j < i; ++j) {
                const double f = static_cast<double>(j - prev) / (i - prev);
                out[j] = vals[prev] * (1.0 - f) + vals[i] * f;
            }
        }
        prev = i;
    }
    for (int j = prev + 1; j < n; ++j) out[j] = vals[prev];
    return out;
}

struct SkewEvaluator {
    int n0, n1, L;
    double b;
    std::vector<double> gamma;
    ThetaTable theta;

    double factorAt(double x) const {
        const double u = x * L;
        const double g = lerpDepth(gamma, n0, n1, u);
        const double th = lerpDepth(theta.theta, n0, n1, u);
        return skewCorrectionFactor(b, g, th);
    }
};

SkewEvaluator makeSkewEvaluator(const GammaTable& table, bool diffColumn, int L, double b) {
    SkewEvaluator ev;
    ev.n0 = table.n0;
    ev.n1 = table.n1;
    ev.L = L;
    ev.b = b;
    ev.gamma = diffColumn ? fillColumn(table.gammaDiff, table.validDiff)
                          : fillColumn(table.gammaW, table.validW);
    ev.theta = thetaTable(ev.gamma, table.n0, table.n1, L, b);
    return ev;
}

// One-dimensional crossing-rate integral for W or Diff.
double marginalArl(const ArlRequest& r, bool diffPair, double b, const SkewEvaluator* skew) {
    const double L = r.L;
    const auto opts = r.options;
    auto integrand = [&](double x) {
        const GValues g = gFunctions(r.g, x);
        const double g1 = diffPair ? g.gd1 : g.gw1;
        const double g2 = diffPair ? g.gd2 : g.gw2;
        double v = g1 * g2 * nu(std::sqrt(2.0 * b * b * g1 / L)) *
                   nu(std::sqrt(2.0 * b * b * g2 / L));
        if (skew) v *= skew->factorAt(x);
        return v;
    };
    const double I = integrateDoubling(integrand, r.n0 / L, r.n1 / L, opts.panelsX,
                                       opts.relTol, opts.maxDoublings);
    if (!(I > 0) || !std::isfinite(I))
        throw std::runtime_error("run-length integral did not converge");
    const double windowFactor = opts.includeWindowFactor ? L : 1.0;
    const double sided = diffPair ? 2.0 : 1.0;
    return windowFactor * kSqrt2Pi * std::exp(0.5 * b * b) / (sided * b * b * b * I);
}

// Two-dimensional integral for S over (x, omega).
double generalizedArl(const ArlRequest& r) {
    const double L = r.L;
    const double b = r.b;
    const auto opts = r.options;

    auto evaluate = [&](int nx, int nw) {
        const double xa = r.n0 / L;
        const double xb = r.n1 / L;
        const double hx = (xb - xa) / nx;
        const double hw = 2.0 * kPi / nw;
        double total = 0;
        for (int i = 0; i <= nx; ++i) {
            const double x = xa + i * hx;
            const GValues g = gFunctions(r.g, x);
            double row = 0;
            for (int j = 0; j <= nw; ++j) {
                const double w = j * hw;
                const double s2 = std::sin(w) * std::sin(w);
                const double c2 = 1.0 - s2;
                const double h1 = g.gw1 * s2 + g.gd1 * c2;
                const double h2 = g.gw2 * s2 + g.gd2 * c2;
                const double v = h1 * h2 * nu(std::sqrt(2.0 * b * h1 / L)) *
                                 nu(std::sqrt(2.0 * b * h2 / L));
                const double ww = (j == 0 || j == nw) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
                row += ww * v;
            }
            row *= hw / 3.0;
            const double wx = (i == 0 || i == nx) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            total += wx * row;
        }
        return total * hx / 3.0;
    };

    int nx = opts.panelsX;
    int nw = opts.panelsOmega;
    double prev = evaluate(nx, nw);
    for (int it = 0; it < opts.maxDoublings; ++it) {
        nx *= 2;
        nw *= 2;
        const double cur = evaluate(nx, nw);
        if (std::fabs(cur - prev) <= opts.relTol * std::fabs(cur)) {
            prev = cur;
            break;
        }
        prev = cur;
    }
    if (!(prev > 0) || !std::isfinite(prev))
        throw std::runtime_error("run-length integral did not converge");
    const double windowFactor = opts.includeWindowFactor ? L : 1.0;
    return kPi * windowFactor * std::exp(0.5 * b) / (b * b * prev);
}

double arlImpl(const ArlRequest& r, bool withSkew) {
    r.validate();
    switch (r.kind) {
        case StatKind::S:
            return generalizedArl(r);
        case StatKind::W: {
            if (!withSkew) return marginalArl(r, false, r.b, nullptr);
            const auto ev = makeSkewEvaluator(*r.skew, false, r.L, r.b);
            return marginalArl(r, false, r.b, &ev);
        }
        case StatKind::Diff: {
            if (!withSkew) return marginalArl(r, true, r.b, nullptr);
            const auto ev = makeSkewEvaluator(*r.skew, true, r.L, r.b);
            return marginalArl(r, true, r.b, &ev);
        }
        case StatKind::M: {
            double diffPart, wPart = 0;
            if (!withSkew) {
                diffPart = marginalArl(r, true, r.b, nullptr);
                if (r.kappa == 0) return diffPart;
                wPart = marginalArl(r, false, r.b / r.kappa, nullptr);
            } else {
                const auto evd = makeSkewEvaluator(*r.skew, true, r.L, r.b);
                diffPart = marginalArl(r, true, r.b, &evd);
                if (r.kappa == 0) return diffPart;
                const double bw = r.b / r.kappa;
                const auto evw = makeSkewEvaluator(*r.skew, false, r.L, bw);
                wPart = marginalArl(r, false, bw, &evw);
            }
            // harmonic combination via reciprocals; stays finite-correct when a
            // component overflows to infinity
            const double rate = 1.0 / diffPart + 1.0 / wPart;
            return rate == 0 ? std::numeric_limits<double>::infinity() : 1.0 / rate;
        }
        case StatKind::Z:
            break;
    }
    throw std::invalid_argument("unsupported run-length kind");
}

}  // namespace

double arl(const ArlRequest& request) {
    if (request.skew)
        throw std::invalid_argument("arl: call arlSkew for skew-corrected requests");
    return arlImpl(request, false);
}

double arlSkew(const ArlRequest& request) {
    if (!request.skew) throw std::invalid_argument("arlSkew: gamma tables missing");
    return arlImpl(request, true);
}

double averageRunLength(const ArlRequest& request) {
    return request.skew ? arlImpl(request, true) : arlImpl(request, false);
}

ThetaTable thetaTable(std::span<const double> gammas, int n0, int n1, int L, double b) {
    if (!(b > 0)) throw std::invalid_argument("theta table needs b > 0");
    if (static_cast<int>(gammas.size()) != n1 - n0 + 1)
        throw std::invalid_argument("gamma span does not match depth range");
    ThetaTable t;
    t.n0 = n0;
    t.n1 = n1;
    t.L = L;
    t.b = b;
    const int n = n1 - n0 + 1;
    t.theta.assign(n, 0.0);
    t.computed.assign(n, 0);

    for (int i = 0; i < n; ++i) {
        const double g = gammas[i];
        const double disc = 1.0 + 2.0 * g * b;
        if (disc > 1e-12) {
            // algebraically (-1 + sqrt(1+2gb))/g, stable through the gamma -> 0 limit
            t.theta[i] = 2.0 * b / (1.0 + std::sqrt(disc));
            t.computed[i] = 1;
        }
    }

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int i = 0; i < n; ++i) {
        if (!t.computed[i]) continue;
        const double x = static_cast<double>(L - (n0 + i)) / L;  // split fraction
        sx += x;
        sy += t.theta[i];
        sxx += x * x;
        sxy += x * t.theta[i];
        ++m;
    }
    if (m == 0) throw std::runtime_error("theta table: entire range problematic");
    const double det = m * sxx - sx * sx;
    if (std::fabs(det) > 1e-14) {
        t.slope = (m * sxy - sx * sy) / det;
        t.intercept = (sy * sxx - sx * sxy) / det;
    } else {
        t.slope = 0;
        t.intercept = sy / m;
    }
    for (int i = 0; i < n; ++i) {
        if (t.computed[i]) continue;
        const double x = static_cast<double>(L - (n0 + i)) / L;
        t.theta[i] = t.slope * x + t.intercept;
        t.extrapolated = true;
    }
    return t;
}

double skewCorrectionFactor(double b, double gamma, double theta) {
    double one = 1.0 + gamma * theta;
    if (one < 1e-6) one = 1e-6;
    return std::exp(0.5 * (b - theta) * (b - theta) + gamma * theta * theta * theta / 6.0) /
           std::sqrt(one);
}

SolveResult solveThreshold(StatKind kind, double targetArl, ArlRequest request) {
    if (!(targetArl > 0)) throw std::invalid_argument("target ARL must be positive");
    request.kind = kind;
    SolveResult res;
    res.belowRecommendedTarget = targetArl < 10.0 * request.L;

    auto f = [&](double b) {
        request.b = b;
        ++res.evaluations;
        // exp(b^2/2) overflows at probe values far beyond any solution;
        // treat that as an infinite run length so bracketing can proceed.
        try {
            return averageRunLength(request);
        } catch (const std::runtime_error&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    // The approximation is U-shaped in b; locate the minimum by ternary search,
    // then bisect on the increasing branch.
    double lo = 0.1, hi = 100.0;
    {
        double a = lo, c = hi;
        for (int i = 0; i < 80 && (c - a) > 1e-3; ++i) {
            const double m1 = a + (c - a) / 3.0;
            const double m2 = c - (c - a) / 3.0;
            if (f(m1) < f(m2))
                c = m2;
            else
                a = m1;
        }
        lo = 0.5 * (a + c);
    }
    double fLo = f(lo);
    if (fLo > targetArl)
        throw std::runtime_error("target ARL below the approximation's valid branch");
    double fHi = f(hi);
    if (fHi < targetArl) throw std::runtime_error("threshold bracket not found in [0.1, 100]");
    if (!(fLo < fHi)) throw std::runtime_error("run length not increasing on bracket");

    double mid = lo, fMid = fLo;
    for (int i = 0; i < 200; ++i) {
        mid = 0.5 * (lo + hi);
        fMid = f(mid);
        if (std::fabs(fMid - targetArl) <= 1e-3 * targetArl) break;
        if (fMid < targetArl)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-10) break;
    }
    res.b = mid;
    res.achievedArl = fMid;
    return res;
}

}  // namespace knnscan
