#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace tagdebt {

/// UTC instants with second resolution. All timestamps in the bot are UTC.
using Timestamp = std::chrono::sys_seconds;

/// Parses an RFC 3339 timestamp ("2025-08-23T10:15:00Z"). Fractional seconds
/// are accepted and truncated; a "+hh:mm"/"-hh:mm" offset is applied.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Formats as "YYYY-MM-DDThh:mm:ssZ".
std::string format_timestamp(Timestamp t);

/// Whole days elapsed from `from` to `to`, floored (negative spans floor
/// towards minus infinity).
std::int64_t whole_days_between(Timestamp from, Timestamp to);

Timestamp system_now();

}  // namespace tagdebt
