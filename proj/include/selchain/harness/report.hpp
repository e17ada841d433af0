#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

namespace selchain::harness {

using Distribution = std::map<unsigned, double>;

/// (1/2) sum |a - b| over the union of supports.
inline double tv_distance(const Distribution& a, const Distribution& b)
{
    std::set<unsigned> keys;
    for (const auto& [k, v] : a) keys.insert(k);
    for (const auto& [k, v] : b) keys.insert(k);
    double s = 0;
    for (const auto k : keys) {
        const auto ia = a.find(k), ib = b.find(k);
        s += std::fabs((ia == a.end() ? 0.0 : ia->second) - (ib == b.end() ? 0.0 : ib->second));
    }
    return 0.5 * s;
}

inline Distribution normalize(const std::map<unsigned, std::uint64_t>& counts)
{
    std::uint64_t total = 0;
    for (const auto& [k, c] : counts) total += c;
    Distribution out;
    for (const auto& [k, c] : counts) out[k] = total ? static_cast<double>(c) / static_cast<double>(total) : 0.0;
    return out;
}

struct DistributionReport {
    std::string kind;
    std::uint64_t H = 0;
    std::uint64_t count = 0;
    std::map<unsigned, std::uint64_t> counts;
    Distribution observed;
    Distribution predicted;
    double tv_distance = 0;
    double threshold = 0;
    bool pass = false;
    std::uint64_t seed = 0;
    double runtime_seconds = 0;
    std::optional<unsigned> given;                  // conditioning value for conditional reports
    std::vector<DistributionReport> conditionals;  // class sweep: r_8 given r_4

    Distribution deviations() const
    {
        Distribution out;
        for (const auto& [k, v] : observed) out[k] = v;
        for (const auto& [k, v] : predicted) out[k] -= v;
        return out;
    }
};

/// Fills observed, count, tv_distance and pass from counts, predicted and threshold.
inline void finish(DistributionReport& r)
{
    r.count = 0;
    for (const auto& [k, c] : r.counts) r.count += c;
    r.observed = normalize(r.counts);
    r.tv_distance = harness::tv_distance(r.observed, r.predicted);
    r.pass = r.count > 0 && r.tv_distance <= r.threshold;
}

namespace detail {

inline nlohmann::ordered_json dist_json(const Distribution& d)
{
    auto j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : d) j[std::to_string(k)] = v;
    return j;
}

} // namespace detail

/// With timing off, runtime_seconds is written as 0 so reruns are byte-identical.
inline nlohmann::ordered_json to_json(const DistributionReport& r, bool timing = true)
{
    nlohmann::ordered_json j;
    j["kind"] = r.kind;
    if (r.given) j["given"] = *r.given;
    j["H"] = r.H;
    j["count"] = r.count;
    j["observed"] = detail::dist_json(r.observed);
    j["predicted"] = detail::dist_json(r.predicted);
    j["deviations"] = detail::dist_json(r.deviations());
    j["tv_distance"] = r.tv_distance;
    j["threshold"] = r.threshold;
    j["pass"] = r.pass;
    j["seed"] = r.seed;
    j["runtime_seconds"] = timing ? r.runtime_seconds : 0.0;
    if (!r.conditionals.empty()) {
        j["conditionals"] = nlohmann::ordered_json::array();
        for (const auto& c : r.conditionals) j["conditionals"].push_back(to_json(c, timing));
    }
    return j;
}

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

} // namespace selchain::harness
