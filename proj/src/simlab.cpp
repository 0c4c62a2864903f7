#include "knnscan/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "knnscan/neighbor_graph.hpp"
#include "knnscan/parallel.hpp"

namespace knnscan {

std::string distributionName(Distribution d) {
    return d == Distribution::Gaussian ? "gaussian" : "lognormal";
}

Distribution distributionFromName(const std::string& name) {
    if (name == "gaussian" || name == "normal") return Distribution::Gaussian;
    if (name == "lognormal" || name == "log-normal") return Distribution::LogNormal;
    throw std::invalid_argument("unknown distribution: " + name);
}

std::string scaleModeName(ScaleMode m) {
    return m == ScaleMode::Full ? "full" : "first-fifth";
}

ScaleMode scaleModeFromName(const std::string& name) {
    if (name == "full") return ScaleMode::Full;
    if (name == "first-fifth" || name == "first_fifth" || name == "firstFifth")
        return ScaleMode::FirstFifth;
    throw std::invalid_argument("unknown scale mode: " + name);
}

void ScenarioSpec::validate() const {
    if (d < 1) throw std::invalid_argument("scenario: d must be >= 1");
    if (delta < 0) throw std::invalid_argument("scenario: delta must be >= 0");
    if (!(sigma > 0)) throw std::invalid_argument("scenario: sigma must be > 0");
    if (tau >= 0 && tau <= N0) throw std::invalid_argument("scenario: tau must exceed N0");
}

namespace {

struct ChangeParams {
    double shift;       // per-coordinate mean shift of the underlying Gaussian
    int scaledCoords;   // leading coordinates multiplied by sigma
};

ChangeParams changeParams(const ScenarioSpec& spec) {
    ChangeParams c;
    c.shift = spec.delta / std::sqrt(static_cast<double>(spec.d));
    c.scaledCoords = spec.scaleMode == ScaleMode::Full ? spec.d : spec.d / 5;
    return c;
}

Observation drawObservation(const ScenarioSpec& spec, const ChangeParams& c, Rng& rng,
                            long index) {
    Observation y;
    y.index = index;
    y.values.resize(spec.d);
    const bool changed = spec.tau >= 0 && index >= spec.tau;
    for (int i = 0; i < spec.d; ++i) {
        double z = rng.normal();
        if (changed) {
            if (i < c.scaledCoords) z *= spec.sigma;
            z += c.shift;
        }
        y.values[i] = spec.distribution == Distribution::Gaussian ? z : std::exp(z);
    }
    return y;
}

}  // namespace

std::vector<Observation> generate(const ScenarioSpec& spec, long upTo) {
    spec.validate();
    const ChangeParams c = changeParams(spec);
    Rng rng(spec.seed);
    std::vector<Observation> out;
    out.reserve(static_cast<std::size_t>(std::max<long>(upTo, 0)));
    for (long t = 1; t <= upTo; ++t) out.push_back(drawObservation(spec, c, rng, t));
    return out;
}

StreamSource::StreamSource(const ScenarioSpec& spec) : spec_(spec), rng_(spec.seed) {
    spec_.validate();
}

std::optional<Observation> StreamSource::operator()() {
    if (spec_.streamLength > 0 && produced_ >= spec_.streamLength) return std::nullopt;
    ++produced_;
    const ChangeParams c = changeParams(spec_);
    return drawObservation(spec_, c, rng_, produced_);
}

void ScanParams::validate() const {
    if (k < 1) throw std::invalid_argument("scan: k must be >= 1");
    if (L < k + 2) throw std::invalid_argument("scan: L must be >= k+2");
    if (!(2 <= n0 && n0 < n1 && n1 <= L - 2))
        throw std::invalid_argument("scan: require 2 <= n0 < n1 <= L-2");
    if (kappa < 0) throw std::invalid_argument("scan: kappa must be >= 0");
}

long RecordSeries::firstCrossing(double b, long cap) const {
    const auto it = std::upper_bound(values.begin(), values.end(), b);
    if (it == values.end()) return cap;
    return steps[static_cast<std::size_t>(it - values.begin())];
}

int McResult::kindIndex(StatKind kind) const {
    for (std::size_t i = 0; i < kinds.size(); ++i)
        if (kinds[i] == kind) return static_cast<int>(i);
    throw std::invalid_argument("kind not calibrated: " + statKindName(kind));
}

double McResult::meanStoppingTime(int kindIdx, double b) const {
    double sum = 0;
    for (const auto& run : records) sum += static_cast<double>(run[kindIdx].firstCrossing(b, cap));
    return sum / static_cast<double>(records.size());
}

std::vector<double> McResult::stoppingTimes(int kindIdx, double b) const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& run : records)
        out.push_back(static_cast<double>(run[kindIdx].firstCrossing(b, cap)));
    return out;
}

namespace {

// Shared per-step evaluation: one window pass feeding every requested kind.
class MultiKindMonitor {
public:
    MultiKindMonitor(const ScanParams& scan, int dimension)
        : scan_(scan), window_(scan.L, dimension, metricByName(scan.metric)) {}

    void warmup(const Observation& y) {
        window_.push(y);
        ++n_;
    }

    /// Per-kind scan maxima at this step; invalid kinds get NaN.
    void step(const Observation& y, const std::vector<StatKind>& kinds, double* out) {
        window_.push(y);
        ++n_;
        const NeighborTable table = buildNeighborTable(window_, scan_.k);
        const GraphSummary summary = summarize(table);
        const StatProfile prof =
            computeProfile(table, summary, n_, scan_.n0, scan_.n1, scan_.kappa);
        for (std::size_t i = 0; i < kinds.size(); ++i) {
            const auto m = prof.maxOf(kinds[i]);
            out[i] = m.valid ? m.value : std::numeric_limits<double>::quiet_NaN();
        }
    }

    long n() const { return n_; }

private:
    ScanParams scan_;
    Window window_;
    long n_ = 0;
};

}  // namespace

McResult mcThreshold(const McConfig& config) {
    config.scan.validate();
    if (config.runs < 100) throw std::invalid_argument("mc calibration needs runs >= 100");
    if (config.N0 < config.scan.L) throw std::invalid_argument("mc calibration needs N0 >= L");
    if (!(config.targetArl > 0)) throw std::invalid_argument("target ARL must be positive");
    if (config.kinds.empty()) throw std::invalid_argument("no statistic kinds requested");

    McResult res;
    res.kinds = config.kinds;
    res.cap = static_cast<long>(config.capFactor * config.targetArl);
    res.runs = config.runs;
    res.targetArl = config.targetArl;
    res.records.assign(config.runs, {});

    const int nk = static_cast<int>(config.kinds.size());
    Rng master(config.seed);

    parallelFor(config.runs, config.threads, [&](long run) {
        ScenarioSpec null;
        null.distribution = config.distribution;
        null.d = config.dimension;
        null.seed = master.derive(static_cast<std::uint64_t>(run)).seed();
        StreamSource source(null);

        MultiKindMonitor monitor(config.scan, config.dimension);
        for (long i = 0; i < config.N0; ++i) monitor.warmup(*source());

        std::vector<RecordSeries> series(nk);
        std::vector<double> maxima(nk);
        for (long step = 1; step <= res.cap; ++step) {
            monitor.step(*source(), config.kinds, maxima.data());
            for (int ki = 0; ki < nk; ++ki)
                if (std::isfinite(maxima[ki])) series[ki].add(step, maxima[ki]);
        }
        res.records[run] = std::move(series);
    });

    for (int ki = 0; ki < nk; ++ki) {
        double lo = 0.1, hi = 100.0;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (res.meanStoppingTime(ki, mid) < config.targetArl)
                lo = mid;
            else
                hi = mid;
        }
        McResult::KindThreshold kt;
        kt.kind = config.kinds[ki];
        kt.b = 0.5 * (lo + hi);
        kt.meanStop = res.meanStoppingTime(ki, kt.b);
        long capped = 0;
        for (const auto& run : res.records)
            if (run[ki].firstCrossing(kt.b, res.cap) >= res.cap) ++capped;
        kt.cappedFraction = static_cast<double>(capped) / config.runs;
        kt.reliable = kt.cappedFraction <= 0.2;
        res.thresholds.push_back(kt);
    }
    return res;
}

ExperimentResult powerExperiment(const PowerConfig& config) {
    config.scan.validate();
    config.scenario.validate();
    if (config.kinds.size() != config.thresholds.size() || config.kinds.empty())
        throw std::invalid_argument("kinds/thresholds mismatch");
    if (config.scenario.N0 < config.scan.L)
        throw std::invalid_argument("scenario N0 must be >= L");
    if (config.scenario.tau < 0) throw std::invalid_argument("power runs need a change point");
    if (config.runs < 1) throw std::invalid_argument("runs must be >= 1");

    const int nk = static_cast<int>(config.kinds.size());
    struct RunOutcome {
        std::vector<long> alarmN;  // -1 = none
    };
    std::vector<RunOutcome> outcomes(config.runs);
    Rng master(config.seed);

    parallelFor(config.runs, config.threads, [&](long run) {
        ScenarioSpec spec = config.scenario;
        spec.seed = master.derive(static_cast<std::uint64_t>(run)).seed();
        spec.streamLength = 0;  // unbounded; we stop at the horizon
        StreamSource source(spec);

        MultiKindMonitor monitor(config.scan, spec.d);
        for (long i = 0; i < spec.N0; ++i) monitor.warmup(*source());

        RunOutcome& out = outcomes[run];
        out.alarmN.assign(nk, -1);
        std::vector<double> maxima(nk);
        const long lastN = spec.tau + config.horizon - 1;
        int unresolved = nk;
        for (long n = spec.N0 + 1; n <= lastN && unresolved > 0; ++n) {
            monitor.step(*source(), config.kinds, maxima.data());
            for (int ki = 0; ki < nk; ++ki) {
                if (out.alarmN[ki] >= 0) continue;
                if (std::isfinite(maxima[ki]) && maxima[ki] > config.thresholds[ki]) {
                    out.alarmN[ki] = n;
                    --unresolved;
                }
            }
        }
    });

    ExperimentResult result;
    result.perKind.resize(nk);
    for (int ki = 0; ki < nk; ++ki) {
        KindPower& kp = result.perKind[ki];
        kp.kind = config.kinds[ki];
        kp.threshold = config.thresholds[ki];
        kp.runs = config.runs;
        for (const auto& out : outcomes) {
            const long n = out.alarmN[ki];
            if (n < 0) continue;
            if (n < config.scenario.tau) {
                ++kp.falseAlarms;
                continue;
            }
            const long delay = n - config.scenario.tau;
            ++kp.detections;
            kp.delays.push_back(static_cast<double>(delay));
            if (delay < 100) ++kp.within100;
            if (delay < 50) ++kp.within50;
        }
    }
    return result;
}

NullGraphQuantities estimateNullQuantities(Distribution dist, int d, int k, int L, long windows,
                                           std::uint64_t seed) {
    ScenarioSpec spec;
    spec.distribution = dist;
    spec.d = d;
    spec.seed = seed;
    StreamSource source(spec);
    Window w(L, d);
    for (long i = 0; i < L - 1; ++i) w.push(*source());
    NullGraphQuantities q;
    for (long i = 0; i < windows; ++i) {
        w.push(*source());
        q.update(summarize(buildNeighborTable(w, k)));
    }
    return q;
}

GammaTable estimateGammaTables(Distribution dist, int d, int k, int L, int n0, int n1,
                               int windows, long permsPerWindow, std::uint64_t seed,
                               int threads) {
    Rng master(seed);
    std::vector<GammaTable> tables;
    tables.reserve(windows);
    for (int i = 0; i < windows; ++i) {
        ScenarioSpec spec;
        spec.distribution = dist;
        spec.d = d;
        spec.seed = master.derive(500 + i).seed();
        const auto pts = generate(spec, L);
        Window w(L, d);
        for (const auto& o : pts) w.push(o);
        tables.push_back(sampledThirdMoments(buildNeighborTable(w, k), n0, n1, permsPerWindow,
                                             master.derive(900 + i).seed(), threads));
    }
    return averageGammaTables(tables);
}

double ksDistance(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw std::invalid_argument("empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::fabs(f - static_cast<double>(i + 1) / n));
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    }
    return d;
}

double ksDistanceToExponential(const std::vector<double>& sample) {
    double mean = 0;
    for (double x : sample) mean += x;
    mean /= static_cast<double>(sample.size());
    if (!(mean > 0)) throw std::invalid_argument("sample mean must be positive");
    return ksDistance(sample, [mean](double x) { return 1.0 - std::exp(-x / mean); });
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace knnscan
