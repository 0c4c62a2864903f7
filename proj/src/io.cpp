#include "knnscan/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace knnscan {

namespace {

[[noreturn]] void fail(long line, const std::string& what) {
    throw std::runtime_error("input line " + std::to_string(line) + ": " + what);
}

std::vector<double> parseCsvRow(const std::string& line, long lineNo) {
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) comma = line.size();
        std::string cell = line.substr(pos, comma - pos);
        const auto b = cell.find_first_not_of(" \t\r");
        if (b == std::string::npos) fail(lineNo, "empty field");
        const auto e = cell.find_last_not_of(" \t\r");
        cell = cell.substr(b, e - b + 1);
        try {
            std::size_t used = 0;
            row.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument("");
        } catch (...) {
            fail(lineNo, "not a number: '" + cell + "'");
        }
        if (!std::isfinite(row.back())) fail(lineNo, "non-finite value");
        pos = comma + 1;
        if (comma == line.size()) break;
    }
    return row;
}

}  // namespace

std::vector<Observation> readObservations(std::istream& in, long startIndex) {
    std::vector<Observation> out;
    std::string line;
    long lineNo = 0;
    long nextIndex = startIndex;
    long lastT = 0;
    bool sawT = false;
    std::size_t dim = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        Observation obs;
        if (line[b] == '{') {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const std::exception& e) {
                fail(lineNo, std::string("bad JSON: ") + e.what());
            }
            if (!j.contains("y") || !j["y"].is_array()) fail(lineNo, "missing \"y\" array");
            for (const auto& v : j["y"]) {
                if (!v.is_number()) fail(lineNo, "\"y\" must hold numbers");
                obs.values.push_back(v.get<double>());
                if (!std::isfinite(obs.values.back())) fail(lineNo, "non-finite value");
            }
            if (j.contains("t")) {
                if (!j["t"].is_number_integer()) fail(lineNo, "\"t\" must be an integer");
                obs.index = j["t"].get<long>();
                if (sawT && obs.index <= lastT) fail(lineNo, "\"t\" not strictly increasing");
                lastT = obs.index;
                sawT = true;
                nextIndex = obs.index + 1;
            } else {
                obs.index = nextIndex++;
            }
        } else {
            obs.values = parseCsvRow(line.substr(b), lineNo);
            obs.index = nextIndex++;
        }
        if (obs.values.empty()) fail(lineNo, "empty observation");
        if (dim == 0)
            dim = obs.values.size();
        else if (obs.values.size() != dim)
            fail(lineNo, "dimension changed from " + std::to_string(dim) + " to " +
                             std::to_string(obs.values.size()));
        out.push_back(std::move(obs));
    }
    return out;
}

std::vector<Observation> readObservationsFile(const std::string& path, long startIndex) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    return readObservations(in, startIndex);
}

std::string formatDouble(double v) {
    char buf[32];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, p);
}

void writeObservationsCsv(std::ostream& out, const std::vector<Observation>& obs) {
    for (const auto& o : obs) {
        for (std::size_t i = 0; i < o.values.size(); ++i) {
            if (i) out << ',';
            out << formatDouble(o.values[i]);
        }
        out << '\n';
    }
}

void writeObservationsJsonl(std::ostream& out, const std::vector<Observation>& obs) {
    for (const auto& o : obs) {
        out << "{\"t\": " << o.index << ", \"y\": [";
        for (std::size_t i = 0; i < o.values.size(); ++i) {
            if (i) out << ", ";
            out << formatDouble(o.values[i]);
        }
        out << "]}\n";
    }
}

}  // namespace knnscan
