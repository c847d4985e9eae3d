#pragma once

#include <compare>
#include <cstdint>
#include <mutex>
#include <string>

namespace scms::sim {

inline constexpr std::uint32_t minutes_per_day = 24 * 60;
inline constexpr std::uint32_t minutes_per_period = 7 * minutes_per_day; // one week

/// Simulated instant: certificate period (week) plus minutes into it.
struct sim_time
{
    std::uint32_t period = 0;
    std::uint32_t minute = 0;

    std::uint64_t absolute_minutes() const { return std::uint64_t{period} * minutes_per_period + minute; }
    std::uint64_t day() const { return absolute_minutes() / minutes_per_day; }
    std::string str() const;

    friend auto operator<=>(const sim_time&, const sim_time&) = default;
};

/// Explicit clock advanced by the harness; components only read it.
class clock
{
public:
    sim_time now() const;
    void advance_minutes(std::uint64_t minutes);
    void advance_days(std::uint32_t days) { advance_minutes(std::uint64_t{days} * minutes_per_day); }
    /// Jumps to the start of `period`; never moves backwards.
    void start_period(std::uint32_t period);

private:
    mutable std::mutex mutex_;
    sim_time now_;
};

} // namespace scms::sim
