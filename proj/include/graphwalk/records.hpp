#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "graphwalk/walk.hpp"

namespace graphwalk {

// FNV-1a of the canonical config string; stamped on every record so runs
// can be tied back to their configuration.
std::string config_hash(const std::string& canonical);

// Key=value configuration: file plus command-line overrides, serialized
// canonically (sorted keys) for hashing and replay.
struct KeyValueConfig {
    std::map<std::string, std::string> values;

    static KeyValueConfig from_file(const std::string& path);
    void set(const std::string& key, const std::string& value);
    std::string get_or(const std::string& key, const std::string& dflt) const;
    std::string canonical() const;
};

// One JSON line per estimate: {"n":..,"estimate":..,"stderr":..,
// "method":..,"samples":..,"seed":..,"config":..}.  No timestamps, so
// equal-seed runs are byte-identical.
std::string return_estimate_record(const ReturnEstimate& est,
                                   const std::string& config_hash_hex,
                                   const std::string& family);

std::string series_csv_header();
std::string series_csv_row(double n, double value);

}  // namespace graphwalk
