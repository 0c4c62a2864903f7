// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. Heavy criteria are grouped so they can share calibrations:
//   --criterion N   run a single criterion (7 and 8 share work; see --group)
//   --group NAME    fast | tables | desk | power | cli
//   --cli PATH      path to the knnscan binary (criterion 10)

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "knnscan/arl.hpp"
#include "knnscan/detector.hpp"
#include "knnscan/edge_stats.hpp"
#include "knnscan/parallel.hpp"
#include "knnscan/permutation.hpp"
#include "knnscan/simlab.hpp"

using namespace knnscan;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& details) {
    std::printf("CRITERION %2d %s: %s\n", criterion, pass ? "PASS" : "FAIL", details.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}


Window gaussianWindow(int L, int d, Rng& rng) {
    Window w(L, d);
    for (int i = 0; i < L; ++i) {
        Observation o;
        o.index = i + 1;
        o.values.resize(d);
        for (double& v : o.values) v = rng.normal();
        w.push(o);
    }
    return w;
}

// ------------------------------------------------------------- criterion 1

void criterion1() {
    Rng master(1001);
    long checked = 0;
    double worst = 0;
    bool ok = true;
    for (int trial = 0; trial < 20; ++trial) {
        const int L = (trial % 2 == 0) ? 6 : 8;
        const int k = (trial % 4 < 2) ? 1 : 2;
        Rng rng = master.derive(trial);
        const NeighborTable table = buildNeighborTable(gaussianWindow(L, 3, rng), k);
        const GraphSummary s = summarize(table);
        const auto sweep = exactPermutationSweep(table);
        for (int x = 2; x <= L - 2; ++x) {
            const NullMoments m = nullMoments(s, {L, L, x});
            const ExactSplitMoments& em = sweep[x - 2];
            const std::pair<double, double> pairs[] = {
                {m.eR1, em.meanR1},     {m.eR2, em.meanR2},     {m.sigma11, em.var11},
                {m.sigma22, em.var22},  {m.sigma12, em.cov12},  {m.eRw, em.meanRw},
                {m.varRw, em.varRw},    {m.eRdiff, em.meanRdiff}, {m.varRdiff, em.varRdiff},
            };
            for (const auto& [analytic, exact] : pairs) {
                const double rel = std::fabs(analytic - exact) /
                                   std::max({1.0, std::fabs(analytic), std::fabs(exact)});
                worst = std::max(worst, rel);
                if (rel > 1e-10) ok = false;
                ++checked;
            }
        }
    }
    std::ostringstream ss;
    ss << checked << " analytic-vs-enumeration comparisons on 20 tables, worst relative error "
       << worst << " (tolerance 1e-10)";
    report(1, ok, ss.str());
}

// ------------------------------------------------------------- criterion 2

void criterion2() {
    Rng master(2002);
    bool ok = true;
    double worstLemma = 0, worstDet = 0;
    long evaluated = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int L = 50;
        const int k = (trial % 2 == 0) ? 1 : 5;
        Rng rng = master.derive(trial);
        const NeighborTable table = buildNeighborTable(gaussianWindow(L, 5, rng), k);
        const GraphSummary s = summarize(table);
        for (int x = 2; x <= L - 2; ++x) {
            const SplitContext ctx{L, L, x};
            const NullMoments m = nullMoments(s, ctx);
            const double det = m.sigma11 * m.sigma22 - m.sigma12 * m.sigma12;
            const double relDet = std::fabs(m.detSigma - det) /
                                  std::max({1.0, std::fabs(det), std::fabs(m.detSigma)});
            worstDet = std::max(worstDet, relDet);
            if (relDet > 1e-10) ok = false;

            const StatValues v = statistics(edgeCounts(table, ctx), m, 1.0);
            if (v.sValid && v.wValid && v.diffValid) {
                const double gap = std::fabs(v.s - (v.zw * v.zw + v.zdiff * v.zdiff));
                worstLemma = std::max(worstLemma, gap);
                if (gap > 1e-8) ok = false;
                ++evaluated;
            }
        }
    }
    std::ostringstream ss;
    ss << "decomposition |S - (Zw^2 + Zdiff^2)| worst " << worstLemma << " over " << evaluated
       << " splits (tol 1e-8); determinant closed-form worst rel " << worstDet
       << " (tol 1e-10)";
    report(2, ok, ss.str());
}

// ------------------------------------------------------------- criterion 3

void criterion3() {
    bool ok = true;
    const double nuSmall = nu(1e-4);
    if (!(nuSmall >= 0.999 && nuSmall <= 1.001)) ok = false;
    const double nu2 = nu(2.0);
    if (!(std::fabs(nu2 - 0.3151) <= 5e-4)) ok = false;
    bool monotone = true;
    double prev = nu(0.1);
    for (double x = 0.2; x <= 3.0001; x += 0.1) {
        const double cur = nu(x);
        if (cur >= prev) monotone = false;
        prev = cur;
    }
    if (!monotone) ok = false;
    std::ostringstream ss;
    ss << "nu(1e-4) = " << nuSmall << ", nu(2) = " << nu2
       << (monotone ? ", monotone decreasing on [0.1, 3]" : ", NOT monotone");
    report(3, ok, ss.str());
}

// ------------------------------------------------------------- criterion 4

void criterion4(int threads) {
    const int d = 10, k = 1, L = 200, n0 = 40, n1 = 160;
    const NullGraphQuantities q =
        estimateNullQuantities(Distribution::Gaussian, d, k, L, 10000, 44001);
    const GammaTable gamma = estimateGammaTables(Distribution::Gaussian, d, k, L, n0, n1, 16,
                                                 20000, 44002, threads);

    ArlRequest req;
    req.L = L;
    req.n0 = n0;
    req.n1 = n1;
    req.g = GInputs{k, q};

    const double a1w = solveThreshold(StatKind::W, 10000, req).b;
    req.skew = &gamma;
    const double a2w = solveThreshold(StatKind::W, 10000, req).b;
    ArlRequest reqM = req;
    reqM.kappa = 1.0;
    const double a2m = solveThreshold(StatKind::M, 10000, reqM).b;

    const bool ok = std::fabs(a1w - 4.13) <= 0.03 && std::fabs(a2w - 4.33) <= 0.05 &&
                    std::fabs(a2m - 4.43) <= 0.05;
    std::ostringstream ss;
    ss << "b_w asymptotic " << a1w << " (ref 4.13 +- 0.03), skew-corrected " << a2w
       << " (ref 4.33 +- 0.05), b_M skew-corrected " << a2m << " (ref 4.43 +- 0.05)"
       << "; quantities pK " << q.pK << " qK " << q.qK << " pK+1 " << q.pKplus1 << " qK+1 "
       << q.qKplus1;
    report(4, ok, ss.str());
}

// ------------------------------------------------------- criteria 5 and 6

void criteria5and6(int threads) {
    const int d = 10, k = 1, L = 60, n0 = 10, n1 = 50;
    const double target = 300;

    const NullGraphQuantities q =
        estimateNullQuantities(Distribution::Gaussian, d, k, L, 4000, 55001);
    const GammaTable gamma =
        estimateGammaTables(Distribution::Gaussian, d, k, L, n0, n1, 8, 10000, 55002, threads);

    ArlRequest req;
    req.L = L;
    req.n0 = n0;
    req.n1 = n1;
    req.g = GInputs{k, q};
    req.skew = &gamma;
    const double bThW = solveThreshold(StatKind::W, target, req).b;
    ArlRequest reqM = req;
    reqM.kappa = 1.0;
    const double bThM = solveThreshold(StatKind::M, target, reqM).b;

    McConfig mc;
    mc.scan = {k, L, n0, n1, 1.0, "euclidean"};
    mc.dimension = d;
    mc.N0 = L;
    mc.kinds = {StatKind::W, StatKind::M};
    mc.targetArl = target;
    mc.runs = 500;
    mc.seed = 55003;
    mc.threads = threads;
    const McResult res = mcThreshold(mc);
    const double bMcW = res.thresholds[res.kindIndex(StatKind::W)].b;
    const double bMcM = res.thresholds[res.kindIndex(StatKind::M)].b;

    const bool ok5 = std::fabs(bThW - bMcW) <= 0.2 && std::fabs(bThM - bMcM) <= 0.2;
    std::ostringstream s5;
    s5 << "analytic-skew vs Monte Carlo at desk scale: W " << bThW << " vs " << bMcW
       << " (|diff| " << std::fabs(bThW - bMcW) << "), M " << bThM << " vs " << bMcM
       << " (|diff| " << std::fabs(bThM - bMcM) << "), tolerance 0.2";
    report(5, ok5, s5.str());

    const auto stops = res.stoppingTimes(res.kindIndex(StatKind::W), bMcW);
    const double ks = ksDistanceToExponential(stops);
    std::ostringstream s6;
    s6 << "KS distance of " << stops.size()
       << " change-free stopping times to the fitted exponential: " << ks << " (tol 0.1)";
    report(6, ks < 0.1, s6.str());
}

// ------------------------------------------------------- criteria 7 and 8

void criteria7and8(int threads) {
    const int d = 100, k = 5, L = 200, n0 = 25, n1 = 175;
    const double target = 2000;
    const std::vector<StatKind> kinds{StatKind::Z, StatKind::W, StatKind::S, StatKind::M};

    McConfig mc;
    mc.scan = {k, L, n0, n1, 1.0, "euclidean"};
    mc.dimension = d;
    mc.N0 = L;
    mc.kinds = kinds;
    mc.targetArl = target;
    mc.runs = 150;
    mc.seed = 77001;
    mc.threads = threads;
    const McResult cal = mcThreshold(mc);
    std::vector<double> thresholds;
    for (StatKind kind : kinds) thresholds.push_back(cal.thresholds[cal.kindIndex(kind)].b);

    auto runScenario = [&](double sigma, ScaleMode mode, double delta, long tau,
                           std::uint64_t seed) {
        PowerConfig pc;
        pc.scan = mc.scan;
        pc.scenario.d = d;
        pc.scenario.delta = delta;
        pc.scenario.sigma = sigma;
        pc.scenario.scaleMode = mode;
        pc.scenario.N0 = 200;
        pc.scenario.tau = tau;
        pc.kinds = kinds;
        pc.thresholds = thresholds;
        pc.runs = 200;
        pc.horizon = 300;
        pc.seed = seed;
        pc.threads = threads;
        return powerExperiment(pc);
    };

    // Figure-2 setting: same mean shift, scenario 2 additionally shrinks the scale.
    const ExperimentResult scen1 = runScenario(1.0, ScaleMode::Full, 2.5, 201, 77002);
    const ExperimentResult scen2 = runScenario(0.75, ScaleMode::Full, 2.5, 201, 77003);

    auto med = [&](const ExperimentResult& r, StatKind kind) {
        for (const auto& kp : r.perKind)
            if (kp.kind == kind) {
                if (kp.delays.empty()) return std::numeric_limits<double>::infinity();
                return median(kp.delays);
            }
        return std::numeric_limits<double>::infinity();
    };

    const double s1 = med(scen1, StatKind::S), s2 = med(scen2, StatKind::S);
    const double m1 = med(scen1, StatKind::M), m2 = med(scen2, StatKind::M);
    const double w1 = med(scen1, StatKind::W), w2 = med(scen2, StatKind::W);
    const double z1 = med(scen1, StatKind::Z), z2 = med(scen2, StatKind::Z);
    const bool ok7 = s2 < s1 && m2 < m1 && z2 > z1 && w2 < z2 && s2 < z2 && m2 < z2;
    std::ostringstream s7;
    s7 << "median delays (scen1 -> scen2): S " << s1 << " -> " << s2 << ", M " << m1 << " -> "
       << m2 << ", W " << w1 << " -> " << w2 << ", Z " << z1 << " -> " << z2
       << "; need S,M down, Z up, and W,S,M < Z under scenario 2";
    report(7, ok7, s7.str());

    // Table-5 setting: mild mean shift with a first-fifth scale change.
    const ExperimentResult t5 = runScenario(0.65, ScaleMode::FirstFifth, 0.5, 400, 77004);
    auto p1 = [&](StatKind kind) {
        for (const auto& kp : t5.perKind)
            if (kp.kind == kind) return kp.power1();
        return 0.0;
    };
    const double pS = p1(StatKind::S), pM = p1(StatKind::M), pZ = p1(StatKind::Z);
    const double n = 200;
    auto seDiff = [&](double a, double b) {
        return std::sqrt((a * (1 - a) + b * (1 - b)) / n);
    };
    const bool ok8 =
        pS - pZ >= 3 * seDiff(pS, pZ) && pM - pZ >= 3 * seDiff(pM, pZ);
    std::ostringstream s8;
    s8 << "power1: S " << pS << ", M " << pM << ", Z " << pZ << "; require S,M to beat Z by 3"
       << " binomial SEs (" << 3 * seDiff(pS, pZ) << ", " << 3 * seDiff(pM, pZ) << ")";
    report(8, ok8, s8.str());
}

// ------------------------------------------------------------- criterion 9

void criterion9(int threads) {
    Rng master(9009);
    bool ok = true;
    std::ostringstream ss;
    for (int trial = 0; trial < 3; ++trial) {
        const int L = 8;
        const int k = trial % 2 == 0 ? 1 : 2;
        Rng rng = master.derive(trial);
        const NeighborTable table = buildNeighborTable(gaussianWindow(L, 3, rng), k);
        const auto sweep = exactPermutationSweep(table);
        const GammaTable g =
            sampledThirdMoments(table, 2, 6, 200000, master.derive(100 + trial).seed(), threads);
        for (int u = g.n0; u <= g.n1; ++u) {
            const int x = L - u;
            const auto& em = sweep[x - 2];
            const int i = u - g.n0;
            if (em.varRw > 0 && g.validW[i]) {
                const double exact = em.thirdRw / std::pow(em.varRw, 1.5);
                if (std::fabs(g.gammaW[i] - exact) > 3 * std::max(g.seW[i], 1e-6)) ok = false;
            }
            if (em.varRdiff > 0 && g.validDiff[i]) {
                const double exact = em.thirdRdiff / std::pow(em.varRdiff, 1.5);
                if (std::fabs(g.gammaDiff[i] - exact) > 3 * std::max(g.seDiff[i], 1e-6))
                    ok = false;
            }
        }
        if (trial == 0 && g.validW[2]) {
            const auto& em = sweep[L - 4 - 2];
            ss << "fixture gamma_w(depth 4) " << g.gammaW[2]
               << " vs exact " << em.thirdRw / std::pow(em.varRw, 1.5) << " +- " << g.seW[2]
               << "; ";
        }
    }
    ss << "3 fixtures x all depths, B = 200000, 3 SE band";
    report(9, ok, ss.str());
}

// ------------------------------------------------------------ criterion 10

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// METADATA carries a wall-clock runtime line by design; strip it before the
// byte comparison.
std::string stripRuntime(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("suite_runtime_seconds", 0) != 0) out << line << '\n';
    return out.str();
}

void criterion10(const std::string& cliPath, int threads) {
    if (cliPath.empty()) {
        report(10, false, "no --cli path provided");
        return;
    }
    const fs::path dir = fs::temp_directory_path() / "knnscan_acceptance_c10";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string threadEnv = "KNNSCAN_THREADS=" + std::to_string(threads) + " ";

    auto shell = [&](const std::string& args) {
        const std::string cmd = threadEnv + cliPath + " " + args + " > /dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };

    bool ok = true;
    std::ostringstream notes;

    auto compareTwice = [&](const std::string& label, const std::string& argsTemplate,
                            const std::vector<std::string>& files) {
        for (int round = 1; round <= 2; ++round) {
            std::string args = argsTemplate;
            std::string::size_type pos;
            while ((pos = args.find("{R}")) != std::string::npos)
                args.replace(pos, 3, std::to_string(round));
            if (!shell(args)) {
                ok = false;
                notes << label << " failed to run; ";
                return;
            }
        }
        for (const auto& f : files) {
            std::string a = slurp(dir / ("r1_" + f));
            std::string b = slurp(dir / ("r2_" + f));
            if (f == "METADATA") {
                a = stripRuntime(a);
                b = stripRuntime(b);
            }
            if (a.empty() || a != b) {
                ok = false;
                notes << label << ": " << f << " differs; ";
            }
        }
    };

    const std::string d = dir.string() + "/";

    compareTwice("simulate-csv",
                 "simulate --dim 3 --length 60 --seed 7 --tau 30 --delta 2 --out " + d +
                     "r{R}_sim.csv",
                 {"sim.csv"});
    compareTwice("simulate-jsonl",
                 "simulate --dim 2 --length 25 --seed 8 --format jsonl --out " + d +
                     "r{R}_sim.jsonl",
                 {"sim.jsonl"});

    shell("simulate --dim 4 --length 50 --seed 9 --out " + d + "hist.csv");
    shell("simulate --dim 4 --length 80 --seed 10 --tau 30 --delta 5 --out " + d + "stream.csv");
    compareTwice("calibrate",
                 "calibrate --history " + d + "hist.csv --L 40 --n0 6 --n1 34 --kind W "
                 "--method analytic-skew --arl 500 --gamma-perms 4000 --seed 3 --out " +
                     d + "r{R}_cal.json",
                 {"cal.json"});
    compareTwice("monitor",
                 "monitor --history " + d + "hist.csv --input " + d + "stream.csv "
                 "--L 40 --n0 6 --n1 34 --kind M --threshold 3.5 --trace " + d + "r{R}_trace.csv",
                 {"trace.csv"});
    compareTwice("bench-thresholds",
                 "bench --suite thresholds --scale desk --out " + d + "r{R}_bt "
                 "--windows 200 --mc-runs 100 --gamma-perms 2000 --target-arl 150 --seed 5",
                 {"bt/thresholds.csv", "bt/METADATA"});
    compareTwice("bench-power",
                 "bench --suite power --scale desk --out " + d + "r{R}_bp "
                 "--runs 15 --mc-runs 100 --target-arl 200 --seed 6",
                 {"bp/power.csv", "bp/METADATA"});
    compareTwice("bench-delay",
                 "bench --suite delay --scale desk --out " + d + "r{R}_bd "
                 "--runs 15 --mc-runs 100 --target-arl 200 --seed 6",
                 {"bd/delays.csv", "bd/delay_medians.csv", "bd/METADATA"});

    std::string msg = notes.str();
    if (msg.empty())
        msg = "simulate/calibrate/monitor/bench outputs byte-identical across repeated runs "
              "(METADATA compared without its wall-clock line)";
    report(10, ok, msg);
}

}  // namespace

int main(int argc, char** argv) {
    int criterion = 0;
    std::string group;
    std::string cliPath;
    int threads = defaultThreads();
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        auto next = [&]() -> std::string { return i + 1 < argc ? argv[++i] : ""; };
        if (a == "--criterion") criterion = std::atoi(next().c_str());
        else if (a == "--group") group = next();
        else if (a == "--cli") cliPath = next();
        else if (a == "--threads") threads = std::atoi(next().c_str());
        else {
            std::cerr << "unknown argument: " << a << "\n";
            return 64;
        }
    }

    const bool all = criterion == 0 && group.empty();
    auto want = [&](int n, const std::string& g) {
        return all || criterion == n || group == g;
    };

    try {
        if (want(1, "fast")) criterion1();
        if (want(2, "fast")) criterion2();
        if (want(3, "fast")) criterion3();
        if (want(9, "fast")) criterion9(threads);
        if (want(4, "tables")) criterion4(threads);
        if (want(5, "desk") || want(6, "desk")) criteria5and6(threads);
        if (want(7, "power") || want(8, "power")) criteria7and8(threads);
        if (want(10, "cli")) criterion10(cliPath, threads);
    } catch (const std::exception& e) {
        std::cerr << "acceptance run aborted: " << e.what() << "\n";
        return 65;
    }
    return failures;
}
