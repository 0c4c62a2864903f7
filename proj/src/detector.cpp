#include "knnscan/detector.hpp"

#include <stdexcept>

#include "knnscan/permutation.hpp"

namespace knnscan {

std::string calibrationName(Calibration c) {
    switch (c) {
        case Calibration::Analytic: return "analytic";
        case Calibration::AnalyticSkew: return "analytic-skew";
        case Calibration::MonteCarlo: return "montecarlo";
        case Calibration::Fixed: return "fixed";
    }
    return "?";
}

Calibration calibrationFromName(const std::string& name) {
    if (name == "analytic") return Calibration::Analytic;
    if (name == "analytic-skew" || name == "analytic_skew") return Calibration::AnalyticSkew;
    if (name == "montecarlo" || name == "monte-carlo") return Calibration::MonteCarlo;
    if (name == "fixed") return Calibration::Fixed;
    throw std::invalid_argument("unknown calibration method: " + name);
}

void DetectorConfig::validate() const {
    if (dimension < 1) throw std::invalid_argument("config: dimension must be >= 1");
    if (k < 1) throw std::invalid_argument("config: k must be >= 1");
    if (L < k + 2) throw std::invalid_argument("config: L must be >= k+2");
    if (!(2 <= n0 && n0 < n1 && n1 <= L - 2))
        throw std::invalid_argument("config: require 2 <= n0 < n1 <= L-2");
    if (N0 < L) throw std::invalid_argument("config: N0 must be >= L");
    if (kappa < 0) throw std::invalid_argument("config: kappa must be >= 0");
    if (threshold.has_value() == targetArl.has_value())
        throw std::invalid_argument("config: exactly one of threshold / targetArl");
    switch (calibration) {
        case Calibration::Fixed:
            if (!threshold) throw std::invalid_argument("config: fixed calibration needs threshold");
            break;
        case Calibration::Analytic:
        case Calibration::AnalyticSkew:
        case Calibration::MonteCarlo:
            if (!targetArl)
                throw std::invalid_argument("config: calibrated modes need targetArl");
            break;
    }
    if (calibration == Calibration::AnalyticSkew && kind == StatKind::S)
        throw std::invalid_argument("config: skew-corrected calibration is undefined for S");
    if ((calibration == Calibration::Analytic || calibration == Calibration::AnalyticSkew) &&
        kind == StatKind::Z)
        throw std::invalid_argument("config: no analytic calibration for the baseline Z");
    if (kind == StatKind::Diff)
        throw std::invalid_argument("config: use kind M with kappa 0 for the |Zdiff| rule");
    metricByName(metric);  // validates the identifier
}

Detector::Detector(std::span<const Observation> history, DetectorConfig config)
    : config_(std::move(config)),
      window_(config_.L, config_.dimension, metricByName(config_.metric)) {
    config_.validate();
    if (static_cast<long>(history.size()) != config_.N0)
        throw std::invalid_argument("history length must equal N0");

    for (const Observation& y : history) {
        window_.push(y);
        if (window_.full()) {
            const NeighborTable table = buildNeighborTable(window_, config_.k);
            quantities_.update(summarize(table));
        }
        ++currentN_;
    }

    if (config_.calibration == Calibration::Fixed) {
        threshold_ = *config_.threshold;
    } else if (config_.calibration != Calibration::MonteCarlo) {
        calibrate();  // MonteCarlo leaves the threshold to external calibration
    }
}

GammaTable Detector::sampleGamma() const {
    const NeighborTable table = buildNeighborTable(window_, config_.k);
    return sampledThirdMoments(table, config_.n0, config_.n1, config_.gammaPermutations,
                               config_.seed, config_.threads);
}

void Detector::calibrate() {
    ArlRequest req;
    req.kind = config_.kind;
    req.L = config_.L;
    req.n0 = config_.n0;
    req.n1 = config_.n1;
    req.kappa = config_.kappa;
    req.g = GInputs{config_.k, quantities_};
    GammaTable gamma;
    if (config_.calibration == Calibration::AnalyticSkew) {
        gamma = sampleGamma();
        req.skew = &gamma;
    }
    threshold_ = solveThreshold(config_.kind, *config_.targetArl, req).b;
    stepsSinceCalibration_ = 0;
}

double Detector::threshold() const {
    if (!threshold_) throw std::logic_error("threshold not set");
    return *threshold_;
}

void Detector::setThreshold(double b) {
    if (!(b > 0)) throw std::invalid_argument("threshold must be positive");
    threshold_ = b;
}

std::optional<AlarmEvent> Detector::step(const Observation& y) {
    if (stopped_) throw std::logic_error("detector already stopped");
    if (!threshold_) throw std::logic_error("stepping requires a threshold");

    window_.push(y);
    ++currentN_;
    const long n = currentN_;

    const NeighborTable table = buildNeighborTable(window_, config_.k);
    const GraphSummary summary = summarize(table);
    const ScanResult scan =
        scanMax(table, summary, n, config_.n0, config_.n1, config_.kappa, config_.kind);
    if (traceEnabled_) trace_.push_back({n, scan.maxValue, scan.argmaxT});

    if (scan.maxValue > *threshold_) {
        stopped_ = true;  // quantities freeze from here on
        AlarmEvent alarm;
        alarm.stoppingTime = n - config_.N0;
        alarm.globalN = n;
        alarm.changeEstimate = scan.argmaxT;
        alarm.statisticValue = scan.maxValue;
        alarm.threshold = *threshold_;
        alarm.kind = config_.kind;
        return alarm;
    }

    if (config_.updateQuantities) {
        quantities_.update(summary);
        ++stepsSinceCalibration_;
        if (config_.recalibrateEvery > 0 && config_.calibration != Calibration::Fixed &&
            config_.calibration != Calibration::MonteCarlo &&
            stepsSinceCalibration_ >= config_.recalibrateEvery) {
            calibrate();
        }
    }
    return std::nullopt;
}

}  // namespace knnscan
