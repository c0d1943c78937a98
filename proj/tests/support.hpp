#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "celds/domain.hpp"
#include "celds/kernel.hpp"
#include "celds/signature.hpp"

namespace celds::testing {

inline std::string data_path(const std::string& name)
{
    return std::string(CELDS_DATA_DIR) + "/" + name;
}

inline Value read(const WorldState& w, const std::string& function, const std::string& argument,
                  const Config& cfg = {})
{
    return read_location(w, Location{function, argument}, cfg);
}

inline Value sym(const std::string& name)
{
    return Symbol{name};
}

/// One node, three assigned monitors and an elected leader, after the first step.
inline WorldState assigned_world(const Config& cfg = {})
{
    StepContext ctx;
    ctx.middleware.cfg = cfg;
    return run_step(make_world(1, 3), ctx).world;
}

inline MonitorId mon(std::uint32_t i)
{
    return MonitorId{i};
}

inline NodeMetrics metrics(std::int64_t latency, double cpu, double storage = 15, double memory = 10,
                           double bandwidth = 50)
{
    return NodeMetrics{latency, cpu, storage, memory, bandwidth};
}

/// Small deterministic generator for property tests.
struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}
    std::int64_t range(std::int64_t lo, std::int64_t hi)
    {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
    }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
    bool coin() { return range(0, 1) == 1; }
    template <typename T, std::size_t N>
    const T& pick(const T (&items)[N])
    {
        return items[static_cast<std::size_t>(range(0, N - 1))];
    }
};

} // namespace celds::testing
