#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "knnscan/rng.hpp"
#include "knnscan/simlab.hpp"

using namespace knnscan;

TEST_CASE("generator determinism") {
    ScenarioSpec spec;
    spec.d = 4;
    spec.delta = 1.0;
    spec.sigma = 0.8;
    spec.tau = 50;
    spec.seed = 42;
    const auto a = generate(spec, 80);
    const auto b = generate(spec, 80);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].values == b[i].values);

    StreamSource src(spec);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto o = src();
        REQUIRE(o.has_value());
        CHECK(o->values == a[i].values);
        CHECK(o->index == a[i].index);
    }
}

TEST_CASE("stream length cap") {
    ScenarioSpec spec;
    spec.d = 2;
    spec.streamLength = 5;
    StreamSource src(spec);
    for (int i = 0; i < 5; ++i) CHECK(src().has_value());
    CHECK_FALSE(src().has_value());
}

TEST_CASE("null scenario draws one distribution throughout") {
    ScenarioSpec spec;
    spec.d = 4;
    spec.delta = 0;
    spec.sigma = 1;
    spec.tau = 10001;
    spec.seed = 7;
    const auto obs = generate(spec, 20000);
    double pre = 0, post = 0;
    for (long i = 0; i < 10000; ++i)
        for (double v : obs[i].values) pre += v;
    for (long i = 10000; i < 20000; ++i)
        for (double v : obs[i].values) post += v;
    pre /= 10000.0 * spec.d;
    post /= 10000.0 * spec.d;
    // each mean has sd 1/sqrt(40000) = 0.005
    CHECK(std::fabs(pre - post) < 4 * 0.005 * std::sqrt(2.0));
}

TEST_CASE("mean shift has the configured Euclidean norm") {
    ScenarioSpec spec;
    spec.d = 100;
    spec.delta = 2.5;
    spec.tau = 1;
    spec.seed = 9;
    const long n = 20000;
    const auto obs = generate(spec, n);
    std::vector<double> mean(spec.d, 0.0);
    for (const auto& o : obs)
        for (int c = 0; c < spec.d; ++c) mean[c] += o.values[c];
    double norm = 0;
    for (double& m : mean) {
        m /= n;
        norm += m * m;
    }
    norm = std::sqrt(norm);
    CHECK(norm == doctest::Approx(2.5).epsilon(0.03));
}

TEST_CASE("log-normal coordinates are exponentiated Gaussians") {
    ScenarioSpec spec;
    spec.distribution = Distribution::LogNormal;
    spec.d = 5;
    spec.delta = std::sqrt(5.0) * 0.4;  // underlying shift 0.4 per coordinate
    spec.sigma = 0.5;
    spec.tau = 1;
    spec.seed = 11;
    const long n = 10000;
    const auto obs = generate(spec, n);
    double m = 0, v = 0;
    for (const auto& o : obs)
        for (double y : o.values) {
            CHECK(y > 0);
            const double z = std::log(y);
            m += z;
            v += z * z;
        }
    const double cnt = static_cast<double>(n) * spec.d;
    m /= cnt;
    v = v / cnt - m * m;
    CHECK(m == doctest::Approx(0.4).epsilon(0.05));
    CHECK(v == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("first-fifth scaling leaves trailing coordinates untouched") {
    ScenarioSpec spec;
    spec.d = 10;
    spec.sigma = 3.0;
    spec.scaleMode = ScaleMode::FirstFifth;
    spec.tau = 1;
    spec.seed = 13;
    const long n = 8000;
    const auto obs = generate(spec, n);
    std::vector<double> var(spec.d, 0.0);
    for (const auto& o : obs)
        for (int c = 0; c < spec.d; ++c) var[c] += o.values[c] * o.values[c];
    for (int c = 0; c < spec.d; ++c) var[c] /= n;
    CHECK(var[0] == doctest::Approx(9.0).epsilon(0.15));
    CHECK(var[1] == doctest::Approx(9.0).epsilon(0.15));
    for (int c = 2; c < spec.d; ++c) CHECK(var[c] == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("scenario validation") {
    ScenarioSpec bad;
    bad.d = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    ScenarioSpec tau;
    tau.d = 2;
    tau.N0 = 10;
    tau.tau = 10;
    CHECK_THROWS_AS(tau.validate(), std::invalid_argument);
}

TEST_CASE("record series first crossing") {
    RecordSeries r;
    r.add(3, 1.0);
    r.add(5, 0.5);  // not a record, ignored
    r.add(7, 2.0);
    r.add(20, 3.5);
    CHECK(r.firstCrossing(0.2, 1000) == 3);
    CHECK(r.firstCrossing(1.0, 1000) == 7);
    CHECK(r.firstCrossing(1.5, 1000) == 7);
    CHECK(r.firstCrossing(2.0, 1000) == 20);
    CHECK(r.firstCrossing(3.5, 1000) == 1000);
}

TEST_CASE("monte carlo calibration at toy scale") {
    McConfig mc;
    mc.scan = {1, 12, 3, 9, 1.0, "euclidean"};
    mc.dimension = 2;
    mc.N0 = 12;
    mc.kinds = {StatKind::W, StatKind::M, StatKind::Z};
    mc.targetArl = 60;
    mc.runs = 120;
    mc.seed = 17;

    const McResult res = mcThreshold(mc);
    REQUIRE(res.thresholds.size() == 3);
    for (const auto& kt : res.thresholds) {
        CHECK(kt.b > 0);
        // the step-function mean straddles the target at the returned b
        CHECK(std::fabs(kt.meanStop - mc.targetArl) / mc.targetArl < 0.25);
        CHECK(kt.reliable);
    }

    // same trajectories, larger target -> larger threshold
    McConfig mc2 = mc;
    mc2.targetArl = 120;
    const McResult res2 = mcThreshold(mc2);
    for (std::size_t i = 0; i < res.thresholds.size(); ++i)
        CHECK(res2.thresholds[i].b > res.thresholds[i].b);

    // determinism incl. thread invariance
    McConfig mc3 = mc;
    mc3.threads = 3;
    const McResult res3 = mcThreshold(mc3);
    for (std::size_t i = 0; i < res.thresholds.size(); ++i)
        CHECK(res3.thresholds[i].b == res.thresholds[i].b);

    const auto times = res.stoppingTimes(res.kindIndex(StatKind::W), res.thresholds[0].b);
    CHECK(times.size() == static_cast<std::size_t>(mc.runs));
}

TEST_CASE("dominating cap flags the calibration as unreliable") {
    McConfig mc;
    mc.scan = {1, 12, 3, 9, 1.0, "euclidean"};
    mc.dimension = 2;
    mc.N0 = 12;
    mc.kinds = {StatKind::W};
    mc.targetArl = 120;
    mc.runs = 120;
    mc.seed = 19;
    mc.capFactor = 1.05;  // P(T > cap) ~ e^{-1} >> 20%
    const McResult res = mcThreshold(mc);
    CHECK(res.thresholds[0].cappedFraction > 0.2);
    CHECK_FALSE(res.thresholds[0].reliable);
}

TEST_CASE("power experiment basics and the null false-alarm rate") {
    // calibrate W at a small ARL, then run a change-free scenario: the chance
    // of any alarm inside the horizon follows the exponential approximation.
    McConfig mc;
    mc.scan = {1, 12, 3, 9, 1.0, "euclidean"};
    mc.dimension = 2;
    mc.N0 = 12;
    mc.kinds = {StatKind::W};
    mc.targetArl = 150;
    mc.runs = 150;
    mc.seed = 23;
    const McResult cal = mcThreshold(mc);
    const double b = cal.thresholds[0].b;

    PowerConfig pc;
    pc.scan = mc.scan;
    pc.scenario.d = 2;
    pc.scenario.N0 = 12;
    pc.scenario.tau = 62;  // 50 monitored steps before the "change"
    pc.scenario.delta = 0;
    pc.scenario.sigma = 1;
    pc.kinds = {StatKind::W};
    pc.thresholds = {b};
    pc.runs = 300;
    pc.horizon = 100;
    pc.seed = 29;
    const ExperimentResult res = powerExperiment(pc);
    const KindPower& kp = res.perKind[0];
    CHECK(kp.power2() <= kp.power1());

    const double anyAlarm =
        static_cast<double>(kp.falseAlarms + kp.detections) / pc.runs;
    const double expect = 1.0 - std::exp(-(50.0 + 100.0) / mc.targetArl);
    const double se = std::sqrt(expect * (1 - expect) / pc.runs);
    CHECK(std::fabs(anyAlarm - expect) <= 4 * se + 0.02);
}

TEST_CASE("strong shift is detected with high power") {
    McConfig mc;
    mc.scan = {1, 16, 3, 12, 1.0, "euclidean"};
    mc.dimension = 3;
    mc.N0 = 16;
    mc.kinds = {StatKind::W, StatKind::S, StatKind::M, StatKind::Z};
    mc.targetArl = 200;
    mc.runs = 120;
    mc.seed = 31;
    const McResult cal = mcThreshold(mc);

    PowerConfig pc;
    pc.scan = mc.scan;
    pc.scenario.d = 3;
    pc.scenario.N0 = 16;
    pc.scenario.tau = 60;
    pc.scenario.delta = 4.0;
    pc.kinds = mc.kinds;
    for (const auto& kt : cal.thresholds) pc.thresholds.push_back(kt.b);
    pc.runs = 60;
    pc.horizon = 120;
    pc.seed = 37;
    const ExperimentResult res = powerExperiment(pc);
    for (const auto& kp : res.perKind) {
        CHECK(kp.power1() > 0.5);
        CHECK(kp.power2() <= kp.power1());
        CHECK(kp.delays.size() == static_cast<std::size_t>(kp.detections));
        for (double d : kp.delays) CHECK(d >= 0);
    }
}

TEST_CASE("KS distance helpers") {
    Rng rng(41);
    std::vector<double> expSample;
    for (int i = 0; i < 4000; ++i) expSample.push_back(-std::log(1.0 - rng.uniform()) * 7.0);
    CHECK(ksDistanceToExponential(expSample) < 0.05);

    std::vector<double> uniformSample;
    for (int i = 0; i < 4000; ++i) uniformSample.push_back(rng.uniform());
    CHECK(ksDistanceToExponential(uniformSample) > 0.1);

    const std::vector<double> point(100, 1.0);
    CHECK(ksDistanceToExponential(point) == doctest::Approx(1.0 - std::exp(-1.0)));

    const double d = ksDistance({0.5}, [](double x) { return x; });
    CHECK(d == doctest::Approx(0.5));
}

TEST_CASE("median helper") {
    CHECK(median({3, 1, 2}) == 2);
    CHECK(median({4, 1, 2, 3}) == doctest::Approx(2.5));
    CHECK_THROWS_AS(median({}), std::invalid_argument);
}
