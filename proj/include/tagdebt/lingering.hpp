#pragma once

#include <string>
#include <vector>

#include "tagdebt/config.hpp"
#include "tagdebt/forge.hpp"

namespace tagdebt {

struct LingeringPolicy {
    int threshold_days = 30;
    LingeringMode mode = LingeringMode::creation;
};

inline LingeringPolicy policy_from(const LingeringSettings& settings) {
    return LingeringPolicy{settings.threshold_days, settings.mode};
}

struct LingeringItem {
    int issue_number = 0;
    std::string title;
    long days_lingering = 0;
    std::string link;

    bool operator==(const LingeringItem&) const = default;
};

/// Items are sorted by days_lingering descending, ties by issue number
/// ascending, and every item meets the threshold at generated_at.
struct LingeringReport {
    RepoRef repo;
    Timestamp generated_at{};
    std::vector<LingeringItem> items;
};

/// True iff the issue's age meets the threshold. The reference instant is
/// created_at (mode creation) or updated_at (mode last_modified); age is
/// floored to whole days and the threshold is inclusive.
bool is_lingering(const Issue& issue, const LingeringPolicy& policy, Timestamp now);

/// Scans open issues with the given (already resolved) config.
LingeringReport scan_repo(Forge& forge, const RepoRef& repo, const BotConfig& config,
                          Timestamp now, std::string_view link_base = "https://github.com");

/// Scans with a freshly resolved config, honoring edits to Bot/config.json
/// between runs.
LingeringReport scan_repo(Forge& forge, const RepoRef& repo, Timestamp now,
                          std::string_view link_base = "https://github.com");

}  // namespace tagdebt
