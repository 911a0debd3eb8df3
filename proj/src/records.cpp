#include "graphwalk/records.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "graphwalk/errors.hpp"

namespace graphwalk {

std::string config_hash(const std::string& canonical) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : canonical) {
        h ^= std::uint64_t(std::uint8_t(c));
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file " + path);
    KeyValueConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("config line without '=': " + line);
        cfg.values[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return cfg;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    values[key] = value;
}

std::string KeyValueConfig::get_or(const std::string& key,
                                   const std::string& dflt) const {
    auto it = values.find(key);
    return it == values.end() ? dflt : it->second;
}

std::string KeyValueConfig::canonical() const {
    std::ostringstream os;
    for (const auto& [k, v] : values) os << k << '=' << v << '\n';
    return os.str();
}

std::string return_estimate_record(const ReturnEstimate& est,
                                   const std::string& config_hash_hex,
                                   const std::string& family) {
    nlohmann::ordered_json j;
    j["n"] = est.n;
    j["estimate"] = est.estimate;
    j["stderr"] = est.stderr_est;
    j["method"] = est.method;
    j["samples"] = est.samples;
    j["seed"] = est.seed;
    j["family"] = family;
    j["config"] = config_hash_hex;
    return j.dump();
}

std::string series_csv_header() { return "n,value"; }

std::string series_csv_row(double n, double value) {
    std::ostringstream os;
    os.precision(17);
    os << n << ',' << value;
    return os.str();
}

}  // namespace graphwalk
