#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "knnscan/arl.hpp"
#include "knnscan/edge_stats.hpp"
#include "knnscan/window.hpp"

namespace knnscan {

enum class Calibration { Analytic, AnalyticSkew, MonteCarlo, Fixed };

std::string calibrationName(Calibration c);
Calibration calibrationFromName(const std::string& name);

struct DetectorConfig {
    int k = 1;
    int L = 0;
    int n0 = 0, n1 = 0;
    long N0 = 0;
    StatKind kind = StatKind::W;
    double kappa = 1.0;
    std::optional<double> threshold;  // exactly one of threshold / targetArl
    std::optional<double> targetArl;
    Calibration calibration = Calibration::Fixed;
    bool updateQuantities = true;
    std::string metric = "euclidean";
    int dimension = 1;
    /// Permutations per gamma table for analytic-skew calibration.
    long gammaPermutations = 20000;
    std::uint64_t seed = 1;
    /// Re-solve the threshold from the updated quantities every this many
    /// steps (0 = only at initialization).
    long recalibrateEvery = 0;
    int threads = 1;

    void validate() const;
};

struct AlarmEvent {
    long stoppingTime = 0;   // n - N0
    long globalN = 0;        // global index of the alarm step
    long changeEstimate = 0; // argmax t
    double statisticValue = 0;
    double threshold = 0;
    StatKind kind = StatKind::W;
};

/// Online stopping rule: ingests observations one at a time, keeps the window
/// and graph quantities current while quiet, and fires at the first threshold
/// crossing. After an alarm the detector halts; restart policy is the
/// caller's.
class Detector {
public:
    /// history.size() must equal config.N0 >= L (the history is assumed
    /// change-free). Estimates null graph quantities from the N0 - L + 1
    /// sliding windows and, for analytic calibrations, solves the threshold.
    Detector(std::span<const Observation> history, DetectorConfig config);

    /// Advances one observation; throws if stopped or no threshold is set.
    std::optional<AlarmEvent> step(const Observation& y);

    /// Steps until alarm or maxSteps observations from the source.
    template <typename Source>
    std::optional<AlarmEvent> runStream(Source&& source, long maxSteps) {
        for (long i = 0; i < maxSteps; ++i) {
            const std::optional<Observation> y = source();
            if (!y) return std::nullopt;
            if (auto alarm = step(*y)) return alarm;
        }
        return std::nullopt;
    }

    bool stopped() const { return stopped_; }
    long currentN() const { return currentN_; }
    bool hasThreshold() const { return threshold_.has_value(); }
    double threshold() const;
    void setThreshold(double b);  // Monte Carlo calibration path
    const NullGraphQuantities& quantities() const { return quantities_; }
    const Window& window() const { return window_; }
    const DetectorConfig& config() const { return config_; }

    struct TraceEntry {
        long n = 0;
        double maxValue = 0;
        long argmaxT = 0;
    };
    void enableTrace(bool on) { traceEnabled_ = on; }
    const std::vector<TraceEntry>& trace() const { return trace_; }

    /// Solves the threshold from the current quantities (analytic modes).
    void calibrate();

private:
    GammaTable sampleGamma() const;

    DetectorConfig config_;
    Window window_;
    NullGraphQuantities quantities_;
    std::optional<double> threshold_;
    long currentN_ = 0;
    long stepsSinceCalibration_ = 0;
    bool stopped_ = false;
    bool traceEnabled_ = false;
    std::vector<TraceEntry> trace_;
};

}  // namespace knnscan
