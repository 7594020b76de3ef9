#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "tagdebt/config.hpp"
#include "tagdebt/detection.hpp"
#include "tagdebt/forge.hpp"
#include "tagdebt/smtp.hpp"
#include "tagdebt/webhook.hpp"

namespace tagdebt {

/// One observable effect performed while handling an event.
struct BotAction {
    enum class Kind { labeled, commented, emailed, ignored, errored };

    Kind kind;
    std::string detail;  // label name for `labeled`, error category for `errored`

    bool operator==(const BotAction&) const = default;
};

std::string to_string(const BotAction& action);

/// Append-only record of what a handler actually did, in order.
struct HandlerOutcome {
    std::vector<BotAction> actions;

    bool performed(BotAction::Kind kind) const;
};

/// Text posted on freshly opened issues when the repo keeps welcome
/// comments enabled.
std::string_view welcome_comment_text();

/// Routes parsed webhook events through config resolution, command handling,
/// detection, labeling, commenting, and notification.
class Orchestrator {
public:
    struct Options {
        std::string link_base = "https://github.com";
        SmtpSettings smtp;
        /// Error/misconfiguration comments are posted at most once per issue
        /// within this window, so a flapping detector cannot flood a thread.
        std::chrono::seconds error_comment_interval{3600};
        /// Injectable clock; empty means the system clock.
        std::function<Timestamp()> now;
    };

    Orchestrator(Forge& forge, const PluginRegistry& registry, SmtpTransport& transport);
    Orchestrator(Forge& forge, const PluginRegistry& registry, SmtpTransport& transport,
                 Options options);

    HandlerOutcome handle_issue_opened(const Event& event);
    HandlerOutcome handle_issue_comment(const Event& event);

    /// Routes by event variant; ignored variants yield a single `ignored` action.
    HandlerOutcome dispatch(const Event& event);

private:
    void auto_label(const Issue& issue, const BotConfig& config, HandlerOutcome& outcome);
    void apply_label(const Issue& issue, const std::string& label, const BotConfig& config,
                     HandlerOutcome& outcome);
    void notify(const Issue& issue, const std::string& label, const BotConfig& config,
                HandlerOutcome& outcome);
    void post_error_comment(const RepoRef& repo, int issue_number, const std::string& text,
                            HandlerOutcome& outcome);

    Forge& forge_;
    const PluginRegistry& registry_;
    SmtpTransport& transport_;
    Options options_;

    std::mutex mu_;
    std::map<std::pair<std::string, int>, Timestamp> last_error_comment_;
};

}  // namespace tagdebt
