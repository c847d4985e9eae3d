#pragma once

#include <scms/sim/world.hpp>

#include <memory>

// Small deployments for tests that need the whole pipeline.
inline scms::sim::scenario small_scenario(std::size_t devices = 6, std::uint16_t batch = 4, std::uint32_t weeks = 3,
                                          std::uint64_t seed = 42)
{
    scms::sim::scenario s;
    s.name = "test";
    s.seed = seed;
    s.devices = devices;
    s.batch_size = batch;
    s.weeks = weeks;
    s.lookahead = weeks;
    return s;
}

/// Bootstrapped, provisioned, week 0 opened and every batch downloaded.
inline std::unique_ptr<scms::sim::world> provisioned_world(const scms::sim::scenario& s)
{
    auto w = std::make_unique<scms::sim::world>(s);
    w->bootstrap_all();
    w->provision_all();
    w->open_period(0);
    w->download_all(0);
    return w;
}

inline std::vector<scms::persistence::record> scan(scms::sim::world& w, const std::string& owner,
                                                   const std::string& kind)
{
    return w.db().open(owner, owner).scan(owner, kind);
}
