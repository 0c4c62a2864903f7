#include "knnscan/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace knnscan {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
    throw std::runtime_error("config line " + std::to_string(line) + ": " + what);
}

}  // namespace

const std::map<std::string, std::string>& RunConfig::knownKeys() {
    static const std::map<std::string, std::string> keys = {
        {"kind", "string"},          {"k", "int"},
        {"L", "int"},                {"n0", "int"},
        {"n1", "int"},               {"N0", "int"},
        {"kappa", "real"},           {"threshold", "real"},
        {"target_arl", "real"},      {"calibration", "string"},
        {"update_quantities", "bool"}, {"metric", "string"},
        {"dim", "int"},              {"distribution", "string"},
        {"delta", "real"},           {"sigma", "real"},
        {"scale_mode", "string"},    {"tau", "int"},
        {"stream_length", "int"},    {"seed", "int"},
        {"gamma_permutations", "int"},
    };
    return keys;
}

RunConfig RunConfig::parse(std::istream& in) {
    RunConfig cfg;
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(lineNo, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(lineNo, "empty key");
        const auto it = knownKeys().find(key);
        if (it == knownKeys().end()) fail(lineNo, "unknown key '" + key + "'");
        if (value.empty()) fail(lineNo, "empty value for '" + key + "'");
        if (cfg.kv_.count(key)) fail(lineNo, "duplicate key '" + key + "'");

        // validate the value's shape now so parse-validate-reject is total
        const std::string& type = it->second;
        if (type == "int") {
            long v = 0;
            auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc{} || p != value.data() + value.size())
                fail(lineNo, "'" + key + "' expects an integer");
        } else if (type == "real") {
            try {
                std::size_t used = 0;
                (void)std::stod(value, &used);
                if (used != value.size()) throw std::invalid_argument("");
            } catch (...) {
                fail(lineNo, "'" + key + "' expects a real number");
            }
        } else if (type == "bool") {
            if (value != "true" && value != "false")
                fail(lineNo, "'" + key + "' expects true or false");
        }
        cfg.kv_[key] = value;
    }
    return cfg;
}

RunConfig RunConfig::parseString(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

RunConfig RunConfig::parseFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    return parse(in);
}

std::string RunConfig::write() const {
    std::ostringstream out;
    for (const auto& [k, v] : kv_) out << k << " = " << v << "\n";
    return out.str();
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (!knownKeys().count(key)) throw std::invalid_argument("unknown config key: " + key);
    kv_[key] = value;
}

std::optional<long> RunConfig::getInt(const std::string& key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    return std::stol(it->second);
}

std::optional<double> RunConfig::getReal(const std::string& key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    return std::stod(it->second);
}

std::optional<bool> RunConfig::getBool(const std::string& key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    return it->second == "true";
}

std::optional<std::string> RunConfig::getString(const std::string& key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    return it->second;
}

DetectorConfig RunConfig::toDetectorConfig(DetectorConfig base) const {
    if (auto v = getInt("k")) base.k = static_cast<int>(*v);
    if (auto v = getInt("L")) base.L = static_cast<int>(*v);
    if (auto v = getInt("n0")) base.n0 = static_cast<int>(*v);
    if (auto v = getInt("n1")) base.n1 = static_cast<int>(*v);
    if (auto v = getInt("N0")) base.N0 = *v;
    if (auto v = getString("kind")) base.kind = statKindFromName(*v);
    if (auto v = getReal("kappa")) base.kappa = *v;
    if (auto v = getReal("threshold")) base.threshold = *v;
    if (auto v = getReal("target_arl")) base.targetArl = *v;
    if (auto v = getString("calibration")) base.calibration = calibrationFromName(*v);
    if (auto v = getBool("update_quantities")) base.updateQuantities = *v;
    if (auto v = getString("metric")) base.metric = *v;
    if (auto v = getInt("dim")) base.dimension = static_cast<int>(*v);
    if (auto v = getInt("gamma_permutations")) base.gammaPermutations = *v;
    if (auto v = getInt("seed")) base.seed = static_cast<std::uint64_t>(*v);
    return base;
}

ScenarioSpec RunConfig::toScenarioSpec(ScenarioSpec base) const {
    if (auto v = getString("distribution")) base.distribution = distributionFromName(*v);
    if (auto v = getInt("dim")) base.d = static_cast<int>(*v);
    if (auto v = getReal("delta")) base.delta = *v;
    if (auto v = getReal("sigma")) base.sigma = *v;
    if (auto v = getString("scale_mode")) base.scaleMode = scaleModeFromName(*v);
    if (auto v = getInt("tau")) base.tau = *v;
    if (auto v = getInt("N0")) base.N0 = *v;
    if (auto v = getInt("stream_length")) base.streamLength = *v;
    if (auto v = getInt("seed")) base.seed = static_cast<std::uint64_t>(*v);
    return base;
}

}  // namespace knnscan
