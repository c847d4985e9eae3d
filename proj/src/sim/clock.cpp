#include <scms/sim/clock.hpp>

namespace scms::sim {

std::string sim_time::str() const
{
    return "p" + std::to_string(period) + "+" + std::to_string(minute) + "m";
}

sim_time clock::now() const
{
    std::lock_guard lock(mutex_);
    return now_;
}

void clock::advance_minutes(std::uint64_t minutes)
{
    std::lock_guard lock(mutex_);
    const auto total = now_.absolute_minutes() + minutes;
    now_.period = static_cast<std::uint32_t>(total / minutes_per_period);
    now_.minute = static_cast<std::uint32_t>(total % minutes_per_period);
}

void clock::start_period(std::uint32_t period)
{
    std::lock_guard lock(mutex_);
    if (period > now_.period) {
        now_ = {period, 0};
    }
}

} // namespace scms::sim
