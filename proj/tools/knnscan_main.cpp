// knnscan: streaming change-point detection with k-NN edge-count scan
// statistics. Subcommands: simulate, calibrate, monitor, bench.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "knnscan/arl.hpp"
#include "knnscan/config.hpp"
#include "knnscan/detector.hpp"
#include "knnscan/io.hpp"
#include "knnscan/parallel.hpp"
#include "knnscan/permutation.hpp"
#include "knnscan/simlab.hpp"

using namespace knnscan;
using nlohmann::json;

namespace {

std::uint64_t envSeedDefault(std::uint64_t fallback) {
    if (const char* env = std::getenv("KNNSCAN_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0') return static_cast<std::uint64_t>(v);
    }
    return fallback;
}

RunConfig loadConfig(const std::string& path) {
    if (path.empty()) return {};
    return RunConfig::parseFile(path);
}

std::ostream& openOut(std::ofstream& file, const std::string& path) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open output file: " + path);
    return file;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string configPath, out, format = "csv";
    ScenarioSpec spec;
    long length = 0;
    bool dimGiven = false, lengthGiven = false, seedGiven = false;
    long dimFlag = 0;
    long tauFlag = -1;
    double deltaFlag = 0, sigmaFlag = 1;
    std::string scaleModeFlag = "full", distributionFlag = "gaussian";
    long seedFlag = 1;
};

int cmdSimulate(const SimulateArgs& a, const CLI::App& cmd) {
    RunConfig cfg = loadConfig(a.configPath);
    ScenarioSpec spec = cfg.toScenarioSpec();

    if (cmd.count("--dim")) {
        if (cfg.has("dim") && spec.d != a.dimFlag)
            throw std::runtime_error("--dim contradicts the config file's dim");
        spec.d = static_cast<int>(a.dimFlag);
    }
    if (cmd.count("--delta")) spec.delta = a.deltaFlag;
    if (cmd.count("--sigma")) spec.sigma = a.sigmaFlag;
    if (cmd.count("--tau")) spec.tau = a.tauFlag;
    if (cmd.count("--scale-mode")) spec.scaleMode = scaleModeFromName(a.scaleModeFlag);
    if (cmd.count("--distribution")) spec.distribution = distributionFromName(a.distributionFlag);
    if (cmd.count("--seed"))
        spec.seed = static_cast<std::uint64_t>(a.seedFlag);
    else if (!cfg.has("seed"))
        spec.seed = envSeedDefault(spec.seed);

    long length = spec.streamLength;
    if (cmd.count("--length")) length = a.length;
    if (length <= 0) throw std::runtime_error("simulate needs --length > 0");

    spec.validate();
    const auto obs = generate(spec, length);
    std::ofstream file;
    std::ostream& out = openOut(file, a.out);
    if (a.format == "csv")
        writeObservationsCsv(out, obs);
    else if (a.format == "jsonl")
        writeObservationsJsonl(out, obs);
    else
        throw std::runtime_error("unknown format: " + a.format);
    return 0;
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
    std::string historyPath, configPath, out, method = "analytic-skew";
    std::string kind = "W", metric = "euclidean";
    long k = 1, L = 0, n0 = 0, n1 = 0, gammaPerms = 20000, runs = 500, seedFlag = 1;
    double kappa = 1.0, arl = 0;
};

json quantityReport(const NullGraphQuantities& q) {
    return json{{"pK", q.pK},
                {"qK", q.qK},
                {"pKplus1", q.pKplus1},
                {"qKplus1", q.qKplus1},
                {"windowsSeen", q.windowsSeen}};
}

int cmdCalibrate(const CalibrateArgs& a, const CLI::App& cmd) {
    RunConfig cfg = loadConfig(a.configPath);
    DetectorConfig det = cfg.toDetectorConfig();
    if (cmd.count("--kind") || !cfg.has("kind")) det.kind = statKindFromName(a.kind);
    if (cmd.count("--k") || !cfg.has("k")) det.k = static_cast<int>(a.k);
    if (cmd.count("--L")) det.L = static_cast<int>(a.L);
    if (cmd.count("--n0")) det.n0 = static_cast<int>(a.n0);
    if (cmd.count("--n1")) det.n1 = static_cast<int>(a.n1);
    if (cmd.count("--kappa")) det.kappa = a.kappa;
    if (cmd.count("--metric")) det.metric = a.metric;
    if (cmd.count("--gamma-perms")) det.gammaPermutations = a.gammaPerms;
    if (cmd.count("--seed"))
        det.seed = static_cast<std::uint64_t>(a.seedFlag);
    else if (!cfg.has("seed"))
        det.seed = envSeedDefault(det.seed);
    det.threads = defaultThreads();

    double target = a.arl;
    if (!cmd.count("--arl")) {
        if (auto v = cfg.getReal("target_arl")) target = *v;
    }
    if (!(target > 0)) throw std::runtime_error("calibrate needs --arl > 0");

    const auto history = readObservationsFile(a.historyPath);
    if (history.empty()) throw std::runtime_error("history file is empty");
    det.dimension = static_cast<int>(history.front().values.size());
    det.N0 = static_cast<long>(history.size());
    if (det.N0 < det.L) throw std::runtime_error("history shorter than L rows");
    det.targetArl = target;
    det.threshold.reset();
    det.calibration = calibrationFromName(a.method);
    det.validate();

    json report;
    report["kind"] = statKindName(det.kind);
    report["method"] = a.method;
    report["targetArl"] = target;

    if (det.calibration == Calibration::MonteCarlo) {
        McConfig mc;
        mc.scan = {det.k, det.L, det.n0, det.n1, det.kappa, det.metric};
        mc.dimension = det.dimension;
        mc.N0 = det.L;
        mc.kinds = {det.kind};
        mc.targetArl = target;
        mc.runs = a.runs;
        mc.seed = det.seed;
        mc.threads = det.threads;
        const McResult res = mcThreshold(mc);
        report["b"] = res.thresholds[0].b;
        report["arlCheck"] = res.thresholds[0].meanStop;
        report["cappedFraction"] = res.thresholds[0].cappedFraction;
        report["reliable"] = res.thresholds[0].reliable;
        // quantities from the provided history, for reference
        Detector detector(history, [&] {
            DetectorConfig d2 = det;
            d2.calibration = Calibration::MonteCarlo;
            return d2;
        }());
        report["quantities"] = quantityReport(detector.quantities());
    } else {
        Detector detector(history, det);
        report["b"] = detector.threshold();
        report["quantities"] = quantityReport(detector.quantities());
        if (target < 10.0 * det.L)
            std::cerr << "warning: target ARL below 10 L; the analytic approximation is "
                         "untrustworthy this low\n";

        ArlRequest req;
        req.kind = det.kind;
        req.b = detector.threshold();
        req.L = det.L;
        req.n0 = det.n0;
        req.n1 = det.n1;
        req.kappa = det.kappa;
        req.g = GInputs{det.k, detector.quantities()};
        GammaTable gamma;
        if (det.calibration == Calibration::AnalyticSkew) {
            const NeighborTable table = buildNeighborTable(detector.window(), det.k);
            gamma = sampledThirdMoments(table, det.n0, det.n1, det.gammaPermutations, det.seed,
                                        det.threads);
            req.skew = &gamma;
            double lo = 1e300, hi = -1e300, sum = 0;
            int cnt = 0;
            for (int i = 0; i < gamma.size(); ++i) {
                if (!gamma.validW[i]) continue;
                lo = std::min(lo, gamma.gammaW[i]);
                hi = std::max(hi, gamma.gammaW[i]);
                sum += gamma.gammaW[i];
                ++cnt;
            }
            report["gammaSummary"] = json{
                {"samples", gamma.samples}, {"minW", lo}, {"maxW", hi}, {"meanW", sum / cnt}};
        }
        report["arlCheck"] = averageRunLength(req);
    }

    const std::string text = report.dump(2) + "\n";
    std::cout << text;
    if (!a.out.empty()) {
        std::ofstream f(a.out);
        if (!f) throw std::runtime_error("cannot open output file: " + a.out);
        f << text;
    }
    return 0;
}

// ---------------------------------------------------------------- monitor

struct MonitorArgs {
    std::string historyPath, configPath, input = "-", tracePath, method = "analytic";
    std::string kind = "W", metric = "euclidean";
    long k = 1, L = 0, n0 = 0, n1 = 0, gammaPerms = 20000, seedFlag = 1;
    double kappa = 1.0, arl = 0, threshold = 0;
    bool noUpdate = false;
};

int cmdMonitor(const MonitorArgs& a, const CLI::App& cmd) {
    RunConfig cfg = loadConfig(a.configPath);
    DetectorConfig det = cfg.toDetectorConfig();
    if (cmd.count("--kind")) det.kind = statKindFromName(a.kind);
    if (cmd.count("--k")) det.k = static_cast<int>(a.k);
    if (cmd.count("--L")) det.L = static_cast<int>(a.L);
    if (cmd.count("--n0")) det.n0 = static_cast<int>(a.n0);
    if (cmd.count("--n1")) det.n1 = static_cast<int>(a.n1);
    if (cmd.count("--kappa")) det.kappa = a.kappa;
    if (cmd.count("--metric")) det.metric = a.metric;
    if (cmd.count("--gamma-perms")) det.gammaPermutations = a.gammaPerms;
    if (cmd.count("--seed"))
        det.seed = static_cast<std::uint64_t>(a.seedFlag);
    else if (!cfg.has("seed"))
        det.seed = envSeedDefault(det.seed);
    if (a.noUpdate) det.updateQuantities = false;
    det.threads = defaultThreads();

    if (cmd.count("--threshold")) {
        det.threshold = a.threshold;
        det.targetArl.reset();
        det.calibration = Calibration::Fixed;
    } else if (cmd.count("--arl")) {
        det.targetArl = a.arl;
        det.threshold.reset();
        det.calibration = calibrationFromName(a.method);
    } else if (!det.threshold && !det.targetArl) {
        throw std::runtime_error("monitor needs --threshold or --arl");
    }

    const auto history = readObservationsFile(a.historyPath);
    det.dimension = history.empty() ? 0 : static_cast<int>(history.front().values.size());
    det.N0 = static_cast<long>(history.size());
    if (det.N0 < det.L) throw std::runtime_error("history shorter than L rows");
    det.validate();

    Detector detector(history, det);
    detector.enableTrace(!a.tracePath.empty());

    std::ifstream inFile;
    std::istream* in = &std::cin;
    if (a.input != "-") {
        inFile.open(a.input);
        if (!inFile) throw std::runtime_error("cannot open input file: " + a.input);
        in = &inFile;
    }
    const auto stream = readObservations(*in, det.N0 + 1);

    std::optional<AlarmEvent> alarm;
    for (const auto& y : stream) {
        alarm = detector.step(y);
        if (alarm) break;
    }

    if (!a.tracePath.empty()) {
        std::ofstream tf(a.tracePath);
        if (!tf) throw std::runtime_error("cannot open trace file: " + a.tracePath);
        tf << "n,maxValue,argmaxT\n";
        for (const auto& e : detector.trace())
            tf << e.n << ',' << formatDouble(e.maxValue) << ',' << e.argmaxT << '\n';
    }

    if (alarm) {
        json j{{"stoppingTime", alarm->stoppingTime},
               {"globalN", alarm->globalN},
               {"changeEstimate", alarm->changeEstimate},
               {"statisticValue", alarm->statisticValue},
               {"threshold", alarm->threshold},
               {"kind", statKindName(alarm->kind)}};
        std::cout << j.dump() << "\n";
    } else {
        std::cout << "{\"alarm\": null}\n";
    }
    return 0;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
    std::string suite, scale = "desk", outDir;
    long runs = 0;       // 0 = suite default
    long mcRuns = 0;     // 0 = suite default
    long windows = 0;    // 0 = suite default
    long gammaPerms = 0; // 0 = suite default
    double targetArl = 0;
    long seedFlag = 1;
    bool seedGiven = false;
};

struct BenchContext {
    std::filesystem::path dir;
    std::uint64_t seed;
    int threads;
    const BenchArgs* args;
    std::string scale;
    std::chrono::steady_clock::time_point started;
    std::map<std::string, std::string> metadata;

    long pick(long override_, long dflt) const { return override_ > 0 ? override_ : dflt; }

    void writeMetadata() {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        std::ofstream f(dir / "METADATA");
        f << "suite_runtime_seconds = " << formatDouble(secs) << "\n";
        for (const auto& [k, v] : metadata) f << k << " = " << v << "\n";
    }
};

int benchThresholds(BenchContext& ctx) {
    std::ofstream csv(ctx.dir / "thresholds.csv");
    csv << "kind,d,k,L,n0,n1,target_arl,b_a1,b_a2,b_mc\n";

    const bool paper = ctx.scale == "paper";
    const int L = paper ? 200 : 60;
    const double target =
        ctx.args->targetArl > 0 ? ctx.args->targetArl : (paper ? 10000 : 300);
    const std::vector<int> dims = paper ? std::vector<int>{10, 100, 1000} : std::vector<int>{10};
    const std::vector<int> ks = paper ? std::vector<int>{1, 5} : std::vector<int>{1};
    const std::vector<int> n0s = paper ? std::vector<int>{25, 30, 35, 40} : std::vector<int>{10};
    const long windows = ctx.pick(ctx.args->windows, paper ? 10000 : 2000);
    const long runsMc = ctx.pick(ctx.args->mcRuns, 500);
    const long gammaPerms = ctx.pick(ctx.args->gammaPerms, paper ? 20000 : 10000);

    ctx.metadata["thresholds_windows"] = std::to_string(windows);
    ctx.metadata["thresholds_mc_runs"] = std::to_string(paper ? 0 : runsMc);
    ctx.metadata["seed"] = std::to_string(ctx.seed);

    for (int d : dims) {
        for (int k : ks) {
            const auto q = estimateNullQuantities(Distribution::Gaussian, d, k, L, windows,
                                                  Rng(ctx.seed).derive(d * 13 + k).seed());
            for (int n0 : n0s) {
                const int n1 = L - n0;
                const GammaTable gamma = estimateGammaTables(
                    Distribution::Gaussian, d, k, L, n0, n1, paper ? 16 : 8, gammaPerms,
                    Rng(ctx.seed).derive(d * 29 + k).seed(), ctx.threads);

                // desk scale also runs the Monte Carlo column
                McResult mc;
                const std::vector<StatKind> kinds{StatKind::S, StatKind::W, StatKind::M};
                if (!paper) {
                    McConfig c;
                    c.scan = {k, L, n0, n1, 1.0, "euclidean"};
                    c.dimension = d;
                    c.N0 = L;
                    c.kinds = kinds;
                    c.targetArl = target;
                    c.runs = runsMc;
                    c.seed = Rng(ctx.seed).derive(d * 37 + k).seed();
                    c.threads = ctx.threads;
                    mc = mcThreshold(c);
                }

                for (StatKind kind : kinds) {
                    ArlRequest req;
                    req.kind = kind;
                    req.L = L;
                    req.n0 = n0;
                    req.n1 = n1;
                    req.g = GInputs{k, q};
                    const double a1 = solveThreshold(kind, target, req).b;
                    double a2 = 0;
                    if (kind != StatKind::S) {
                        req.skew = &gamma;
                        a2 = solveThreshold(kind, target, req).b;
                        req.skew = nullptr;
                    }
                    csv << statKindName(kind) << ',' << d << ',' << k << ',' << L << ',' << n0
                        << ',' << n1 << ',' << formatDouble(target) << ','
                        << formatDouble(a1) << ','
                        << (kind == StatKind::S ? "" : formatDouble(a2)) << ',';
                    if (!paper)
                        csv << formatDouble(mc.thresholds[mc.kindIndex(kind)].b);
                    csv << '\n';
                }
            }
        }
    }
    return 0;
}

int benchPower(BenchContext& ctx) {
    std::ofstream csv(ctx.dir / "power.csv");
    csv << "kind,d,delta,sigma,scale_mode,target_arl,threshold,runs,power1,power2,false_alarms\n";

    const bool paper = ctx.scale == "paper";
    const int L = 200, k = 5, n0 = 25, n1 = 175;
    const long N0 = 200, tau = 401;
    const double target =
        ctx.args->targetArl > 0 ? ctx.args->targetArl : (paper ? 10000 : 2000);
    const long runs = ctx.pick(ctx.args->runs, paper ? 1000 : 200);
    const long mcRuns = ctx.pick(ctx.args->mcRuns, paper ? 400 : 150);
    const std::vector<StatKind> kinds{StatKind::Z, StatKind::W, StatKind::S, StatKind::M};

    struct Cell {
        int d;
        double delta, sigma;
        ScaleMode mode;
    };
    // mean-difference rows and mean+variance rows of the reference layout
    std::vector<Cell> cells;
    if (paper) {
        cells = {{10, 0.75, 1.0, ScaleMode::Full},    {100, 1.8, 1.0, ScaleMode::Full},
                 {500, 2.9, 1.0, ScaleMode::Full},    {10, 0.35, 0.55, ScaleMode::FirstFifth},
                 {100, 0.5, 0.65, ScaleMode::FirstFifth}, {500, 0.9, 0.8, ScaleMode::FirstFifth}};
    } else {
        cells = {{100, 1.8, 1.0, ScaleMode::Full}, {100, 0.5, 0.65, ScaleMode::FirstFifth}};
    }

    ctx.metadata["power_runs"] = std::to_string(runs);
    ctx.metadata["power_mc_runs"] = std::to_string(mcRuns);
    ctx.metadata["seed"] = std::to_string(ctx.seed);

    std::map<int, McResult> calibrated;
    for (const auto& cell : cells) {
        if (!calibrated.count(cell.d)) {
            McConfig c;
            c.scan = {k, L, n0, n1, 1.0, "euclidean"};
            c.dimension = cell.d;
            c.N0 = L;
            c.kinds = kinds;
            c.targetArl = target;
            c.runs = mcRuns;
            c.seed = Rng(ctx.seed).derive(7000 + cell.d).seed();
            c.threads = ctx.threads;
            calibrated.emplace(cell.d, mcThreshold(c));
        }
        const McResult& mc = calibrated.at(cell.d);

        PowerConfig pc;
        pc.scan = {k, L, n0, n1, 1.0, "euclidean"};
        pc.scenario.d = cell.d;
        pc.scenario.delta = cell.delta;
        pc.scenario.sigma = cell.sigma;
        pc.scenario.scaleMode = cell.mode;
        pc.scenario.N0 = N0;
        pc.scenario.tau = tau;
        pc.kinds = kinds;
        for (StatKind kind : kinds) pc.thresholds.push_back(mc.thresholds[mc.kindIndex(kind)].b);
        pc.runs = runs;
        pc.horizon = 150;
        pc.seed = Rng(ctx.seed).derive(9000 + cell.d + static_cast<int>(cell.mode)).seed();
        pc.threads = ctx.threads;
        const ExperimentResult res = powerExperiment(pc);
        for (const auto& kp : res.perKind) {
            csv << statKindName(kp.kind) << ',' << cell.d << ',' << formatDouble(cell.delta)
                << ',' << formatDouble(cell.sigma) << ',' << scaleModeName(cell.mode) << ','
                << formatDouble(target) << ',' << formatDouble(kp.threshold) << ',' << kp.runs
                << ',' << formatDouble(kp.power1()) << ',' << formatDouble(kp.power2()) << ','
                << kp.falseAlarms << '\n';
        }
    }
    return 0;
}

int benchDelay(BenchContext& ctx) {
    std::ofstream csv(ctx.dir / "delays.csv");
    csv << "kind,scenario,run,delay\n";
    std::ofstream med(ctx.dir / "delay_medians.csv");
    med << "kind,scenario,median_delay,detections,runs\n";

    const bool paper = ctx.scale == "paper";
    const int L = 200, k = 5, n0 = 25, n1 = 175;
    const long N0 = 200, tau = 201;
    const double target = ctx.args->targetArl > 0 ? ctx.args->targetArl : 2000;
    const long runs = ctx.pick(ctx.args->runs, paper ? 1000 : 200);
    const long mcRuns = ctx.pick(ctx.args->mcRuns, paper ? 400 : 150);
    const int d = 100;
    const std::vector<StatKind> kinds{StatKind::Z, StatKind::W, StatKind::S, StatKind::M};

    ctx.metadata["delay_runs"] = std::to_string(runs);
    ctx.metadata["seed"] = std::to_string(ctx.seed);

    McConfig c;
    c.scan = {k, L, n0, n1, 1.0, "euclidean"};
    c.dimension = d;
    c.N0 = L;
    c.kinds = kinds;
    c.targetArl = target;
    c.runs = mcRuns;
    c.seed = Rng(ctx.seed).derive(7100).seed();
    c.threads = ctx.threads;
    const McResult mc = mcThreshold(c);

    for (int scenario : {1, 2}) {
        PowerConfig pc;
        pc.scan = c.scan;
        pc.scenario.d = d;
        pc.scenario.delta = 2.5;
        pc.scenario.sigma = scenario == 1 ? 1.0 : 0.75;
        pc.scenario.scaleMode = ScaleMode::Full;
        pc.scenario.N0 = N0;
        pc.scenario.tau = tau;
        pc.kinds = kinds;
        for (StatKind kind : kinds) pc.thresholds.push_back(mc.thresholds[mc.kindIndex(kind)].b);
        pc.runs = runs;
        pc.horizon = 300;
        pc.seed = Rng(ctx.seed).derive(9100 + scenario).seed();
        pc.threads = ctx.threads;
        const ExperimentResult res = powerExperiment(pc);
        for (const auto& kp : res.perKind) {
            for (std::size_t r = 0; r < kp.delays.size(); ++r)
                csv << statKindName(kp.kind) << ',' << scenario << ',' << r << ','
                    << formatDouble(kp.delays[r]) << '\n';
            med << statKindName(kp.kind) << ',' << scenario << ','
                << (kp.delays.empty() ? "" : formatDouble(median(kp.delays))) << ','
                << kp.detections << ',' << kp.runs << '\n';
        }
    }
    return 0;
}

int cmdBench(const BenchArgs& a) {
    if (a.suite != "thresholds" && a.suite != "power" && a.suite != "delay")
        throw std::runtime_error("unknown suite: " + a.suite);
    if (a.scale != "desk" && a.scale != "paper")
        throw std::runtime_error("unknown scale: " + a.scale);
    BenchContext ctx;
    ctx.dir = a.outDir;
    std::filesystem::create_directories(ctx.dir);
    ctx.seed = a.seedGiven ? static_cast<std::uint64_t>(a.seedFlag) : envSeedDefault(1);
    ctx.threads = defaultThreads();
    ctx.args = &a;
    ctx.scale = a.scale;
    ctx.started = std::chrono::steady_clock::now();
    ctx.metadata["suite"] = a.suite;
    ctx.metadata["scale"] = a.scale;

    int rc = 0;
    if (a.suite == "thresholds") rc = benchThresholds(ctx);
    if (a.suite == "power") rc = benchPower(ctx);
    if (a.suite == "delay") rc = benchDelay(ctx);
    ctx.writeMetadata();
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"streaming change-point detection with k-NN edge-count scan statistics"};
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic stream");
    simulate->add_option("--config", sim.configPath, "key=value config file");
    simulate->add_option("--dim", sim.dimFlag, "dimension d");
    simulate->add_option("--delta", sim.deltaFlag, "mean-shift Euclidean norm");
    simulate->add_option("--sigma", sim.sigmaFlag, "scale multiplier after the change");
    simulate->add_option("--scale-mode", sim.scaleModeFlag, "full | first-fifth");
    simulate->add_option("--distribution", sim.distributionFlag, "gaussian | lognormal");
    simulate->add_option("--tau", sim.tauFlag, "first changed index (1-based)");
    simulate->add_option("--length", sim.length, "number of observations");
    simulate->add_option("--seed", sim.seedFlag, "RNG seed");
    simulate->add_option("--out", sim.out, "output file (default stdout)");
    simulate->add_option("--format", sim.format, "csv | jsonl");

    CalibrateArgs cal;
    CLI::App* calibrate = app.add_subcommand("calibrate", "solve a detection threshold");
    calibrate->add_option("--history", cal.historyPath, "change-free history file")->required();
    calibrate->add_option("--config", cal.configPath, "key=value config file");
    calibrate->add_option("--kind", cal.kind, "Z | W | S | M");
    calibrate->add_option("--k", cal.k, "neighbors per node");
    calibrate->add_option("--L", cal.L, "window length");
    calibrate->add_option("--n0", cal.n0, "scan depth lower bound");
    calibrate->add_option("--n1", cal.n1, "scan depth upper bound");
    calibrate->add_option("--kappa", cal.kappa, "max-type mixing weight");
    calibrate->add_option("--metric", cal.metric, "euclidean | manhattan");
    calibrate->add_option("--method", cal.method, "analytic | analytic-skew | montecarlo");
    calibrate->add_option("--arl", cal.arl, "target average run length");
    calibrate->add_option("--gamma-perms", cal.gammaPerms, "permutations per gamma table");
    calibrate->add_option("--runs", cal.runs, "Monte Carlo runs (montecarlo method)");
    calibrate->add_option("--seed", cal.seedFlag, "RNG seed");
    calibrate->add_option("--out", cal.out, "also write the JSON report here");

    MonitorArgs mon;
    CLI::App* monitor = app.add_subcommand("monitor", "watch a stream for a change");
    monitor->add_option("--history", mon.historyPath, "change-free history file")->required();
    monitor->add_option("--config", mon.configPath, "key=value config file");
    monitor->add_option("--input", mon.input, "stream file, or - for stdin");
    monitor->add_option("--kind", mon.kind, "Z | W | S | M");
    monitor->add_option("--k", mon.k, "neighbors per node");
    monitor->add_option("--L", mon.L, "window length");
    monitor->add_option("--n0", mon.n0, "scan depth lower bound");
    monitor->add_option("--n1", mon.n1, "scan depth upper bound");
    monitor->add_option("--kappa", mon.kappa, "max-type mixing weight");
    monitor->add_option("--metric", mon.metric, "euclidean | manhattan");
    monitor->add_option("--threshold", mon.threshold, "fixed threshold b");
    monitor->add_option("--arl", mon.arl, "target average run length");
    monitor->add_option("--method", mon.method, "analytic | analytic-skew");
    monitor->add_option("--gamma-perms", mon.gammaPerms, "permutations per gamma table");
    monitor->add_option("--trace", mon.tracePath, "per-step CSV trace file");
    monitor->add_option("--seed", mon.seedFlag, "RNG seed");
    monitor->add_flag("--no-update", mon.noUpdate, "freeze null quantities");

    BenchArgs ben;
    CLI::App* bench = app.add_subcommand("bench", "reproduce the reference experiments");
    bench->add_option("--suite", ben.suite, "thresholds | power | delay")->required();
    bench->add_option("--scale", ben.scale, "desk | paper");
    bench->add_option("--out", ben.outDir, "output directory")->required();
    bench->add_option("--runs", ben.runs, "override replicate count");
    bench->add_option("--mc-runs", ben.mcRuns, "override calibration run count");
    bench->add_option("--windows", ben.windows, "override quantity-estimation windows");
    bench->add_option("--gamma-perms", ben.gammaPerms, "override gamma permutations");
    bench->add_option("--target-arl", ben.targetArl, "override the target run length");
    bench->add_option("--seed", ben.seedFlag, "RNG seed")
        ->each([&](const std::string&) { ben.seedGiven = true; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) return cmdSimulate(sim, *simulate);
        if (calibrate->parsed()) return cmdCalibrate(cal, *calibrate);
        if (monitor->parsed()) return cmdMonitor(mon, *monitor);
        if (bench->parsed()) return cmdBench(ben);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
