#pragma once

#include <chrono>
#include <map>
#include <string>
#include <string_view>

namespace fairalloc {

using Date = std::chrono::sys_days;

/// Parses YYYY-MM-DD; throws ParseError on anything else.
Date parse_iso_date(std::string_view text);
std::string format_iso_date(Date date);

/// Per-agent dated totals, one value per (agent, date).
struct History {
    std::map<std::string, std::map<Date, double>> series;

    bool empty() const { return series.empty(); }
    std::size_t num_observations() const;
    /// Earliest date over all agents; throws InvalidInput when empty.
    Date first_date() const;
    Date last_date() const;
};

/// Rows strictly before `boundary` go to the first part, the rest to the second.
std::pair<History, History> split_history(const History& history, Date boundary);

} // namespace fairalloc
