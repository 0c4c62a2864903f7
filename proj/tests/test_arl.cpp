#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "knnscan/arl.hpp"

using namespace knnscan;

namespace {

// Plausible Gaussian d=10, k=1 graph quantities (estimated offline); the
// paper-scale reproduction lives in the acceptance suite.
GInputs gaussianInputs() {
    GInputs g;
    g.k = 1;
    g.quantities.L = 200;
    g.quantities.k = 1;
    g.quantities.pK = 0.377;
    g.quantities.qK = 1.281;
    g.quantities.pKplus1 = 0.174;
    g.quantities.qKplus1 = 1.392;
    g.quantities.windowsSeen = 1;
    return g;
}

ArlRequest baseRequest(StatKind kind, double b) {
    ArlRequest r;
    r.kind = kind;
    r.b = b;
    r.L = 200;
    r.n0 = 40;
    r.n1 = 160;
    r.g = gaussianInputs();
    return r;
}

}  // namespace

TEST_CASE("overshoot correction values") {
    CHECK(nu(1e-4) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(std::fabs(nu(2.0) - 0.3151) <= 5e-4);
    CHECK_THROWS_AS(nu(0.0), std::invalid_argument);
    CHECK_THROWS_AS(nu(-1.0), std::invalid_argument);
    CHECK(nu(1e-9) == 1.0);  // continuous extension

    double prev = nu(0.1);
    for (double x = 0.2; x <= 3.001; x += 0.1) {
        const double cur = nu(x);
        CHECK(cur < prev);
        prev = cur;
    }
    // small-x consistency of the extension
    for (double x : {1e-7, 1e-6, 1e-5, 1e-4}) CHECK(std::fabs(nu(x) - 1.0) < 1e-3);
}

TEST_CASE("covariance derivative pairs") {
    GInputs g = gaussianInputs();
    const GValues v = gFunctions(g, 0.5);
    CHECK(v.gw1 == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(v.gd1 == doctest::Approx(2.0).epsilon(1e-12));

    // degenerate neighbour-free limit: second w-derivative collapses to
    // (x^2 - x + 1)/(x(1-x)) = 3 at x = 1/2
    GInputs g0 = g;
    g0.quantities.pK = 0;
    g0.quantities.pKplus1 = 0;
    CHECK(gFunctions(g0, 0.5).gw2 == doctest::Approx(3.0).epsilon(1e-12));

    for (double x : {0.1, 0.25, 0.4}) {
        const GValues a = gFunctions(g, x);
        const GValues b = gFunctions(g, 1.0 - x);
        CHECK(a.gw1 == doctest::Approx(b.gw1).epsilon(1e-12));
        CHECK(a.gw2 == doctest::Approx(b.gw2).epsilon(1e-12));
        CHECK(a.gd1 == doctest::Approx(b.gd1).epsilon(1e-12));
        CHECK(a.gd2 == doctest::Approx(b.gd2).epsilon(1e-12));
    }

    long clamps = 0;
    gFunctions(g, 0.01, &clamps);  // gd2 goes negative near the edge
    CHECK(clamps >= 1);

    GInputs bad = g;
    bad.quantities.qK = 0.0;  // qK - k^2 + k = 0
    CHECK_THROWS_AS(gFunctions(bad, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(gFunctions(g, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(gFunctions(g, 1.0), std::invalid_argument);
}

TEST_CASE("max-type run length reduces to the diff rule at kappa = 0") {
    ArlRequest m = baseRequest(StatKind::M, 4.2);
    m.kappa = 0.0;
    ArlRequest d = baseRequest(StatKind::Diff, 4.2);
    CHECK(arl(m) == arl(d));
}

TEST_CASE("max-type run length is the harmonic combination") {
    ArlRequest m = baseRequest(StatKind::M, 4.4);
    m.kappa = 1.3;
    const double D = arl(baseRequest(StatKind::Diff, 4.4));
    const double W = arl(baseRequest(StatKind::W, 4.4 / 1.3));
    CHECK(arl(m) == doctest::Approx(D * W / (D + W)).epsilon(1e-12));
    CHECK(arl(m) <= std::min(D, W));
}

TEST_CASE("run lengths increase in the threshold") {
    for (StatKind kind : {StatKind::W, StatKind::Diff, StatKind::M}) {
        double prev = 0;
        for (double b = 3.0; b <= 6.001; b += 0.5) {
            const double cur = arl(baseRequest(kind, b));
            CHECK(cur > prev);
            prev = cur;
        }
    }
    double prev = 0;
    for (double b = 15.0; b <= 30.001; b += 3.0) {
        const double cur = arl(baseRequest(StatKind::S, b));
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("panel doubling is already converged at the defaults") {
    ArlRequest r = baseRequest(StatKind::W, 4.3);
    r.options.maxDoublings = 0;
    const double coarse = arl(r);
    r.options.panelsX *= 2;
    const double fine = arl(r);
    CHECK(std::fabs(fine - coarse) / fine < 1e-5);
}

TEST_CASE("baseline Z has no analytic run length") {
    CHECK_THROWS_AS(arl(baseRequest(StatKind::Z, 4.0)), std::invalid_argument);
}

TEST_CASE("theta table") {
    SUBCASE("gamma = 0 gives theta = b with no extrapolation") {
        const std::vector<double> gam(11, 0.0);
        const ThetaTable t = thetaTable(gam, 40, 50, 200, 4.0);
        for (double th : t.theta) CHECK(th == doctest::Approx(4.0).epsilon(1e-14));
        CHECK_FALSE(t.extrapolated);
    }
    SUBCASE("direct evaluation") {
        const std::vector<double> gam(3, 0.1);
        const ThetaTable t = thetaTable(gam, 40, 42, 200, 4.0);
        CHECK(t.theta[0] == doctest::Approx(3.41640786).epsilon(1e-6));
    }
    SUBCASE("problematic edge entries follow the fitted line") {
        // gamma linear in depth; the first entries violate 1 + 2 gamma b > 0.
        const int n0 = 40, n1 = 60, L = 200;
        const double b = 4.0;
        std::vector<double> gam;
        for (int u = n0; u <= n1; ++u) gam.push_back(-0.20 + 0.01 * (u - n0));
        const ThetaTable t = thetaTable(gam, n0, n1, L, b);
        CHECK(t.extrapolated);

        // independent least-squares fit over the valid region
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int m = 0;
        for (int u = n0; u <= n1; ++u) {
            const double g = gam[u - n0];
            if (1 + 2 * g * b <= 1e-12) continue;
            const double x = static_cast<double>(L - u) / L;
            // (-1 + sqrt(1 + 2 g b))/g through its stable form (g -> 0 gives b)
            const double th = 2 * b / (1 + std::sqrt(1 + 2 * g * b));
            sx += x;
            sy += th;
            sxx += x * x;
            sxy += x * th;
            ++m;
        }
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        const double inter = (sy - slope * sx) / m;
        for (int u = n0; u <= n1; ++u) {
            if (t.computed[u - n0]) continue;
            const double x = static_cast<double>(L - u) / L;
            CHECK(t.theta[u - n0] == doctest::Approx(slope * x + inter).epsilon(1e-9));
        }
    }
    SUBCASE("entirely problematic range errors") {
        const std::vector<double> gam(5, -10.0);
        CHECK_THROWS_AS(thetaTable(gam, 40, 44, 200, 4.0), std::runtime_error);
    }
}

TEST_CASE("zero skewness collapses the corrected run length") {
    GammaTable g;
    g.n0 = 40;
    g.n1 = 160;
    g.gammaW.assign(121, 0.0);
    g.gammaDiff.assign(121, 0.0);
    g.seW.assign(121, 0.0);
    g.seDiff.assign(121, 0.0);
    g.validW.assign(121, 1);
    g.validDiff.assign(121, 1);

    for (StatKind kind : {StatKind::W, StatKind::Diff, StatKind::M}) {
        ArlRequest r = baseRequest(kind, 4.3);
        const double plain = arl(r);
        r.skew = &g;
        CHECK(arlSkew(r) == plain);
    }
}

TEST_CASE("skew-corrected requests are rejected for S") {
    GammaTable g;
    g.n0 = 40;
    g.n1 = 160;
    g.gammaW.assign(121, 0.1);
    g.gammaDiff.assign(121, 0.1);
    g.validW.assign(121, 1);
    g.validDiff.assign(121, 1);
    ArlRequest r = baseRequest(StatKind::S, 23.0);
    r.skew = &g;
    CHECK_THROWS_AS(arlSkew(r), std::invalid_argument);

    // coverage check
    GammaTable narrow = g;
    narrow.n0 = 50;
    ArlRequest w = baseRequest(StatKind::W, 4.3);
    w.skew = &narrow;
    CHECK_THROWS_AS(arlSkew(w), std::invalid_argument);
}

TEST_CASE("positive skewness raises the corrected threshold") {
    GammaTable g;
    g.n0 = 40;
    g.n1 = 160;
    g.gammaW.assign(121, 0.15);
    g.gammaDiff.assign(121, 0.0);
    g.seW.assign(121, 0.0);
    g.seDiff.assign(121, 0.0);
    g.validW.assign(121, 1);
    g.validDiff.assign(121, 1);

    ArlRequest r = baseRequest(StatKind::W, 0);
    const SolveResult plain = solveThreshold(StatKind::W, 10000, r);
    r.skew = &g;
    const SolveResult skewed = solveThreshold(StatKind::W, 10000, r);
    CHECK(skewed.b > plain.b);
}

TEST_CASE("threshold solver") {
    ArlRequest r = baseRequest(StatKind::W, 0);
    const SolveResult hi = solveThreshold(StatKind::W, 10000, r);
    const SolveResult lo = solveThreshold(StatKind::W, 1000, r);
    CHECK(hi.b > lo.b);
    CHECK_FALSE(hi.belowRecommendedTarget);

    r.b = hi.b;
    CHECK(std::fabs(arl(r) - 10000) <= 0.0011 * 10000);

    const SolveResult low = solveThreshold(StatKind::W, 1500, r);  // < 10 L
    CHECK(low.belowRecommendedTarget);

    const SolveResult s = solveThreshold(StatKind::S, 10000, r);
    CHECK(s.b > 15);
    ArlRequest check = r;
    check.kind = StatKind::S;
    check.b = s.b;
    CHECK(std::fabs(arl(check) - 10000) <= 0.0011 * 10000);
}
