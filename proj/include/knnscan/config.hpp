#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>

#include "knnscan/detector.hpp"
#include "knnscan/simlab.hpp"

namespace knnscan {

/// Plain-text key=value run configuration. '#' starts a comment, blank lines
/// are ignored, unknown keys are rejected, and every accepted file
/// round-trips through write() (canonical: sorted keys, one per line).
class RunConfig {
public:
    static RunConfig parse(std::istream& in);
    static RunConfig parseString(const std::string& text);
    static RunConfig parseFile(const std::string& path);

    std::string write() const;

    bool has(const std::string& key) const { return kv_.count(key) != 0; }
    void set(const std::string& key, const std::string& value);

    std::optional<long> getInt(const std::string& key) const;
    std::optional<double> getReal(const std::string& key) const;
    std::optional<bool> getBool(const std::string& key) const;
    std::optional<std::string> getString(const std::string& key) const;

    /// Detector fields present in the config applied over `base`.
    DetectorConfig toDetectorConfig(DetectorConfig base = {}) const;
    ScenarioSpec toScenarioSpec(ScenarioSpec base = {}) const;

    static const std::map<std::string, std::string>& knownKeys();  // key -> type name

private:
    std::map<std::string, std::string> kv_;
};

}  // namespace knnscan
