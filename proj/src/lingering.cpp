#include "tagdebt/lingering.hpp"

#include <algorithm>

namespace tagdebt {

bool is_lingering(const Issue& issue, const LingeringPolicy& policy, Timestamp now) {
    const Timestamp reference =
        policy.mode == LingeringMode::creation ? issue.created_at : issue.updated_at;
    return whole_days_between(reference, now) >= policy.threshold_days;
}

LingeringReport scan_repo(Forge& forge, const RepoRef& repo, const BotConfig& config,
                          Timestamp now, std::string_view link_base) {
    const LingeringPolicy policy = policy_from(config.lingering);
    LingeringReport report;
    report.repo = repo;
    report.generated_at = now;

    for (const Issue& issue : forge.list_open_issues(repo)) {
        if (!is_lingering(issue, policy, now)) {
            continue;
        }
        const Timestamp reference =
            policy.mode == LingeringMode::creation ? issue.created_at : issue.updated_at;
        LingeringItem item;
        item.issue_number = issue.number;
        item.title = issue.title;
        item.days_lingering = whole_days_between(reference, now);
        item.link = issue_html_url(repo, issue.number, link_base);
        report.items.push_back(std::move(item));
    }

    std::sort(report.items.begin(), report.items.end(),
              [](const LingeringItem& a, const LingeringItem& b) {
                  if (a.days_lingering != b.days_lingering) {
                      return a.days_lingering > b.days_lingering;
                  }
                  return a.issue_number < b.issue_number;
              });
    return report;
}

LingeringReport scan_repo(Forge& forge, const RepoRef& repo, Timestamp now,
                          std::string_view link_base) {
    return scan_repo(forge, repo, resolve_config(forge, repo), now, link_base);
}

}  // namespace tagdebt
