#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "knnscan/edge_stats.hpp"
#include "knnscan/permutation.hpp"

namespace knnscan {

/// Siegmund's overshoot correction, evaluated through the normal-cdf
/// approximation; continuously extended to nu(0+) = 1 below x = 1e-8.
double nu(double x);

/// Graph quantities feeding the covariance-derivative g functions.
struct GInputs {
    int k = 1;
    NullGraphQuantities quantities;

    void validate() const;  // qK - k^2 + k > 0 and k + pK > 0
};

/// Directional covariance derivatives of the limiting fields at split
/// fraction x, with the finite-L quantity substitution.
///
/// The published statement of these derivatives carries the (w, diff) labels
/// the other way around; that assignment is inconsistent with the statistic
/// variances (the diff count's permutation variance is a pure shared-neighbor
/// quantity) and with the reference threshold tables, so the pairs here follow
/// the corrected assignment:
///   gw1 = 1/(x(1-x)),  gw2 = (x^2-x+1)/(x(1-x)) + 2 pKplus1/(k + pK)
///   gd1 = 1/(2x(1-x)), gd2 = (10 qK - 4k qKplus1 - (6k^2-10k))
///                            / (2 (qK - k^2 + k)) - gd1
/// Non-positive values are clamped to 1e-6 (counted in clampCount); the
/// integrands vanish there.
struct GValues {
    double gw1 = 0, gw2 = 0, gd1 = 0, gd2 = 0;
};

GValues gFunctions(const GInputs& g, double x, long* clampCount = nullptr);

struct ArlOptions {
    int panelsX = 400;
    int panelsOmega = 256;
    double relTol = 1e-6;
    int maxDoublings = 5;
    /// The run-length displays need the window-length factor L in the
    /// numerator for every kind; disable only to reproduce the un-scaled text.
    bool includeWindowFactor = true;
};

struct ArlRequest {
    StatKind kind = StatKind::W;  // W, Diff, S or M
    double b = 0;
    int L = 0, n0 = 0, n1 = 0;
    double kappa = 1.0;  // M only
    GInputs g;
    const GammaTable* skew = nullptr;  // not owned; required by arlSkew
    ArlOptions options;

    void validate() const;
};

/// Average run length from the asymptotic crossing-rate integrals
/// (skew must be absent).
double arl(const ArlRequest& request);

/// Skewness-corrected average run length for W, Diff and M (S is excluded by
/// design). request.skew must cover [n0, n1].
double arlSkew(const ArlRequest& request);

/// Dispatches to arl or arlSkew depending on request.skew.
double averageRunLength(const ArlRequest& request);

/// theta_b over the scan-depth grid: theta = (-1 + sqrt(1 + 2 gamma b))/gamma
/// where 1 + 2 gamma b > 0 (gamma -> 0 limit is b); problematic entries are
/// filled by a least-squares line in the split fraction x = (L-u)/L fitted on
/// the computable region.
struct ThetaTable {
    int n0 = 0, n1 = 0, L = 0;
    double b = 0;
    std::vector<double> theta;             // indexed by u - n0, always filled
    std::vector<std::uint8_t> computed;    // 0 where extrapolated
    double slope = 0, intercept = 0;
    bool extrapolated = false;
};

/// Throws std::runtime_error when the entire range is problematic.
ThetaTable thetaTable(std::span<const double> gammas, int n0, int n1, int L, double b);

/// Marginal-probability correction factor K for one scan depth.
double skewCorrectionFactor(double b, double gamma, double theta);

struct SolveResult {
    double b = 0;
    double achievedArl = 0;
    int evaluations = 0;
    /// Set when targetArl < 10 L, where the approximations are documented as
    /// untrustworthy; the solve still proceeds.
    bool belowRecommendedTarget = false;
};

/// Inverts the ARL map (strictly increasing in b on the solution branch) by
/// bracketing bisection; |arl(b) - target| / target < 1e-3 at return.
SolveResult solveThreshold(StatKind kind, double targetArl, ArlRequest request);

}  // namespace knnscan
