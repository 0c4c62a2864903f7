#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "knnscan/edge_stats.hpp"
#include "knnscan/permutation.hpp"
#include "knnscan/rng.hpp"
#include "knnscan/window.hpp"

namespace knnscan {

enum class Distribution { Gaussian, LogNormal };
enum class ScaleMode { Full, FirstFifth };

std::string distributionName(Distribution d);
Distribution distributionFromName(const std::string& name);
std::string scaleModeName(ScaleMode m);
ScaleMode scaleModeFromName(const std::string& name);

/// Synthetic stream: i.i.d. null draws before tau, mean shift delta/sqrt(d)
/// per coordinate and scale sigma (per scaleMode) applied to the underlying
/// Gaussian from tau on. Log-normal streams exponentiate coordinatewise.
struct ScenarioSpec {
    Distribution distribution = Distribution::Gaussian;
    int d = 1;
    double delta = 0;
    double sigma = 1;
    ScaleMode scaleMode = ScaleMode::Full;
    long tau = -1;  // first changed index (1-based); -1 = never
    long N0 = 0;
    long streamLength = 0;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Observations 1..upTo, deterministic given the seed.
std::vector<Observation> generate(const ScenarioSpec& spec, long upTo);

/// Lazy stream over the same draws; yields nullopt past streamLength.
class StreamSource {
public:
    explicit StreamSource(const ScenarioSpec& spec);
    std::optional<Observation> operator()();
    long produced() const { return produced_; }

private:
    ScenarioSpec spec_;
    Rng rng_;
    long produced_ = 0;
};

/// Window geometry shared by the simulation harness.
struct ScanParams {
    int k = 1;
    int L = 0;
    int n0 = 0, n1 = 0;
    double kappa = 1.0;
    std::string metric = "euclidean";

    void validate() const;
};

/// Per-run running-max records of one statistic kind: values are strictly
/// increasing; the first crossing of any threshold b is a binary search.
struct RecordSeries {
    std::vector<long> steps;  // stopping times n - N0, ascending
    std::vector<double> values;

    void add(long step, double value) {
        if (!values.empty() && value <= values.back()) return;
        steps.push_back(step);
        values.push_back(value);
    }
    long firstCrossing(double b, long cap) const;
};

struct McConfig {
    ScanParams scan;
    Distribution distribution = Distribution::Gaussian;
    int dimension = 1;
    long N0 = 0;  // history per run, >= L
    std::vector<StatKind> kinds;
    double targetArl = 0;
    long runs = 0;
    std::uint64_t seed = 1;
    int threads = 1;
    double capFactor = 10.0;  // each run simulated for capFactor * targetArl steps
};

/// Monte Carlo threshold calibration: simulates max-statistic trajectories
/// once, then bisects b against the recorded per-step maxima; capped runs
/// count at the cap value.
struct McResult {
    std::vector<StatKind> kinds;
    long cap = 0;
    long runs = 0;
    double targetArl = 0;
    std::vector<std::vector<RecordSeries>> records;  // [run][kind index]

    struct KindThreshold {
        StatKind kind = StatKind::W;
        double b = 0;
        double meanStop = 0;
        double cappedFraction = 0;
        bool reliable = true;  // false when > 20% of runs hit the cap
    };
    std::vector<KindThreshold> thresholds;

    int kindIndex(StatKind kind) const;
    double meanStoppingTime(int kindIdx, double b) const;
    std::vector<double> stoppingTimes(int kindIdx, double b) const;
};

McResult mcThreshold(const McConfig& config);

struct PowerConfig {
    ScanParams scan;
    ScenarioSpec scenario;               // carries N0, tau, distribution, d
    std::vector<StatKind> kinds;
    std::vector<double> thresholds;      // aligned with kinds
    long runs = 0;
    long horizon = 300;                  // post-change steps to keep monitoring
    std::uint64_t seed = 1;
    int threads = 1;
};

struct KindPower {
    StatKind kind = StatKind::W;
    double threshold = 0;
    long runs = 0;
    long falseAlarms = 0;   // alarms at n < tau (run then stops undetected)
    long detections = 0;    // alarms at n >= tau within the horizon
    long within100 = 0;
    long within50 = 0;
    std::vector<double> delays;  // n - tau for detections, in run order

    double power1() const { return runs ? static_cast<double>(within100) / runs : 0; }
    double power2() const { return runs ? static_cast<double>(within50) / runs : 0; }
};

struct ExperimentResult {
    std::vector<KindPower> perKind;
};

/// Runs `runs` streams; every kind is evaluated on the same stream draws.
ExperimentResult powerExperiment(const PowerConfig& config);

/// Null graph quantities estimated from `windows` sliding windows over one
/// long null stream of the given distribution.
NullGraphQuantities estimateNullQuantities(Distribution dist, int d, int k, int L, long windows,
                                           std::uint64_t seed);

/// Gamma tables sampled on `windows` independent null windows and averaged.
GammaTable estimateGammaTables(Distribution dist, int d, int k, int L, int n0, int n1,
                               int windows, long permsPerWindow, std::uint64_t seed,
                               int threads = 1);

/// Kolmogorov-Smirnov distance of a sample against a cdf.
double ksDistance(std::vector<double> sample, const std::function<double(double)>& cdf);
/// Against the exponential with the sample's own mean.
double ksDistanceToExponential(const std::vector<double>& sample);

double median(std::vector<double> values);

}  // namespace knnscan
