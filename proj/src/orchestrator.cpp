#include "tagdebt/orchestrator.hpp"

#include <spdlog/spdlog.h>

#include "tagdebt/commands.hpp"
#include "tagdebt/notifier.hpp"

namespace tagdebt {

namespace {

// Mirrors assets/welcome_comment.md; the asset file is the operator-facing
// copy. A test pins the two to be identical.
constexpr std::string_view kWelcomeComment =
    "Thanks for opening an issue! This repository runs TagDebt, a bot that keeps\n"
    "self-admitted technical debt visible.\n"
    "\n"
    "You can talk to it from any comment on this issue:\n"
    "\n"
    "- `/tdbot label` — classify this issue as TD or non-TD and apply the label\n"
    "- `/tdbot label <name>` — apply a label of your choosing directly\n"
    "- `/tdbot help` — show the full command reference\n"
    "\n"
    "The bot is configured per repository via `Bot/config.json` on the default\n"
    "branch; an annotated example ships in the bot's docs/ directory.\n";

constexpr std::string_view kUnknownCommandReply =
    "Unknown command; try `/tdbot help`.";

std::string misconfig_comment(const ConfigError& error) {
    std::string text = "TagDebt cannot act on this repository: `Bot/config.json` is invalid (";
    text += to_string(error.kind());
    if (!error.path().empty()) {
        text += " at `" + error.path() + "`";
    }
    text += "): " + error.detail() +
            "\n\nThe bot stays inactive here until the file parses; defaults apply only when "
            "the file is absent entirely.";
    return text;
}

std::string error_category(const char* stage, std::string_view kind) {
    return std::string(stage) + ":" + std::string(kind);
}

}  // namespace

std::string to_string(const BotAction& action) {
    switch (action.kind) {
    case BotAction::Kind::labeled: return "labeled(" + action.detail + ")";
    case BotAction::Kind::commented: return "commented";
    case BotAction::Kind::emailed: return "emailed";
    case BotAction::Kind::ignored: return "ignored";
    case BotAction::Kind::errored: return "errored(" + action.detail + ")";
    }
    return "unknown";
}

bool HandlerOutcome::performed(BotAction::Kind kind) const {
    for (const auto& action : actions) {
        if (action.kind == kind) return true;
    }
    return false;
}

std::string_view welcome_comment_text() { return kWelcomeComment; }

Orchestrator::Orchestrator(Forge& forge, const PluginRegistry& registry,
                           SmtpTransport& transport)
    : Orchestrator(forge, registry, transport, Options()) {}

Orchestrator::Orchestrator(Forge& forge, const PluginRegistry& registry,
                           SmtpTransport& transport, Options options)
    : forge_(forge), registry_(registry), transport_(transport), options_(std::move(options)) {
    if (!options_.now) options_.now = [] { return system_now(); };
}

HandlerOutcome Orchestrator::dispatch(const Event& event) {
    switch (event.variant) {
    case EventVariant::issue_opened: return handle_issue_opened(event);
    case EventVariant::issue_commented: return handle_issue_comment(event);
    case EventVariant::ignored: break;
    }
    return HandlerOutcome{{{BotAction::Kind::ignored, ""}}};
}

HandlerOutcome Orchestrator::handle_issue_opened(const Event& event) {
    HandlerOutcome outcome;
    if (event.variant != EventVariant::issue_opened || !event.issue) {
        outcome.actions.push_back({BotAction::Kind::ignored, ""});
        return outcome;
    }
    const Issue& issue = *event.issue;

    BotConfig config;
    try {
        config = resolve_config(forge_, issue.repo);
    } catch (const ConfigError& e) {
        outcome.actions.push_back(
            {BotAction::Kind::errored, error_category("config", to_string(e.kind()))});
        post_error_comment(issue.repo, issue.number, misconfig_comment(e), outcome);
        return outcome;
    } catch (const ForgeError& e) {
        outcome.actions.push_back(
            {BotAction::Kind::errored, error_category("forge", to_string(e.kind()))});
        return outcome;
    }

    if (config.welcome_comment) {
        try {
            forge_.post_comment(issue.repo, issue.number, std::string(kWelcomeComment));
            outcome.actions.push_back({BotAction::Kind::commented, ""});
        } catch (const ForgeError& e) {
            outcome.actions.push_back(
                {BotAction::Kind::errored, error_category("forge", to_string(e.kind()))});
        }
    }

    if (config.auto_label_on_creation) {
        auto_label(issue, config, outcome);
    }
    return outcome;
}

HandlerOutcome Orchestrator::handle_issue_comment(const Event& event) {
    HandlerOutcome outcome;
    if (event.variant != EventVariant::issue_commented || !event.issue || !event.comment) {
        outcome.actions.push_back({BotAction::Kind::ignored, ""});
        return outcome;
    }
    const Issue& issue = *event.issue;

    const CommandParse parsed = parse_command(event.comment->body);
    if (std::holds_alternative<std::monostate>(parsed)) {
        outcome.actions.push_back({BotAction::Kind::ignored, ""});
        return outcome;
    }
    if (std::holds_alternative<UnknownCommand>(parsed)) {
        try {
            forge_.post_comment(issue.repo, issue.number, std::string(kUnknownCommandReply));
            outcome.actions.push_back({BotAction::Kind::commented, ""});
        } catch (const ForgeError& e) {
            outcome.actions.push_back(
                {BotAction::Kind::errored, error_category("forge", to_string(e.kind()))});
        }
        return outcome;
    }

    const Command& command = std::get<Command>(parsed);
    if (command.kind == CommandKind::help) {
        try {
            forge_.post_comment(issue.repo, issue.number, help_text());
            outcome.actions.push_back({BotAction::Kind::commented, ""});
        } catch (const ForgeError& e) {
            outcome.actions.push_back(
                {BotAction::Kind::errored, error_category("forge", to_string(e.kind()))});
        }
        return outcome;
    }

    // Both label forms resolve config freshly first: detection settings for
    // the automatic path, the notification gate and templates for both.
    BotConfig config;
    try {
        config = resolve_config(forge_, issue.repo);
    } catch (const ConfigError& e) {
        outcome.actions.push_back(
            {BotAction::Kind::errored, error_category("config", to_string(e.kind()))});
        post_error_comment(issue.repo, issue.number, misconfig_comment(e), outcome);
        return outcome;
    } catch (const ForgeError& e) {
        outcome.actions.push_back(
            {BotAction::Kind::errored, error_category("forge", to_string(e.kind()))});
        return outcome;
    }

    if (command.kind == CommandKind::label_auto) {
        auto_label(issue, config, outcome);
    } else {
        // Explicit label: applied verbatim, no detector involved.
        apply_label(issue, command.explicit_label, config, outcome);
    }
    return outcome;
}

void Orchestrator::auto_label(const Issue& issue, const BotConfig& config,
                              HandlerOutcome& outcome) {
    Classification verdict;
    try {
        const std::string text = select_text(issue, config.detection.analyzed_part);
        const auto detector = registry_.create_detector(config.detection);
        verdict = detector->classify(ClassificationInput{text, issue.repo, issue.number});
    } catch (const RegistryError& e) {
        outcome.actions.push_back(
            {BotAction::Kind::errored, error_category("detector", to_string(e.kind()))});
        post_error_comment(issue.repo, issue.number,
                           std::string("TagDebt could not run the configured detector: ") +
                               e.what() + "\n\nThe issue was left unlabeled.",
                           outcome);
        return;
    } catch (const DetectorError& e) {
        outcome.actions.push_back(
            {BotAction::Kind::errored, error_category("detector", to_string(e.kind()))});
        post_error_comment(issue.repo, issue.number,
                           std::string("TagDebt's detector failed: ") + e.what() +
                               "\n\nThe issue was left unlabeled; comment `/tdbot label` to retry.",
                           outcome);
        return;
    } catch (const ConfigError& e) {
        // Plugin construction can reject bad plugin-params.
        outcome.actions.push_back(
            {BotAction::Kind::errored, error_category("config", to_string(e.kind()))});
        post_error_comment(issue.repo, issue.number, misconfig_comment(e), outcome);
        return;
    }
    apply_label(issue, std::string(to_wire(verdict.label)), config, outcome);
}

void Orchestrator::apply_label(const Issue& issue, const std::string& label,
                               const BotConfig& config, HandlerOutcome& outcome) {
    try {
        forge_.add_label(issue.repo, issue.number, label);
        outcome.actions.push_back({BotAction::Kind::labeled, label});

        // The verdict pair stays mutually exclusive: applying one side
        // retires the other if the issue still carries it.
        const std::string counterpart =
            label == "TD" ? "non-TD" : label == "non-TD" ? "TD" : "";
        if (!counterpart.empty() && issue.labels.count(counterpart) > 0) {
            forge_.remove_label(issue.repo, issue.number, counterpart);
        }
    } catch (const ForgeError& e) {
        outcome.actions.push_back(
            {BotAction::Kind::errored, error_category("forge", to_string(e.kind()))});
        post_error_comment(issue.repo, issue.number,
                           std::string("TagDebt could not update labels: ") + e.what(), outcome);
        return;
    }
    notify(issue, label, config, outcome);
}

void Orchestrator::notify(const Issue& issue, const std::string& label, const BotConfig& config,
                          HandlerOutcome& outcome) {
    std::optional<EmailMessage> message;
    try {
        message = prepare_label_email(issue, label, config.email, options_.link_base);
    } catch (const std::exception& e) {
        spdlog::error("failed to prepare notification email for {}#{}: {}",
                      issue.repo.full_name(), issue.number, e.what());
        outcome.actions.push_back({BotAction::Kind::errored, "email:prepare"});
        return;
    }
    if (!message) return;

    for (int attempt = 1;; ++attempt) {
        try {
            send_email(*message, options_.smtp, transport_);
            outcome.actions.push_back({BotAction::Kind::emailed, ""});
            return;
        } catch (const NotifyError& e) {
            if (attempt >= 2) {
                spdlog::error("notification email for {}#{} failed: {}", issue.repo.full_name(),
                              issue.number, e.what());
                outcome.actions.push_back(
                    {BotAction::Kind::errored, error_category("email", to_string(e.kind()))});
                return;
            }
            spdlog::warn("notification email for {}#{} failed ({}), retrying once",
                         issue.repo.full_name(), issue.number, e.what());
        }
    }
}

void Orchestrator::post_error_comment(const RepoRef& repo, int issue_number,
                                      const std::string& text, HandlerOutcome& outcome) {
    const Timestamp now = options_.now();
    {
        std::lock_guard lock(mu_);
        const auto key = std::make_pair(repo.full_name(), issue_number);
        auto it = last_error_comment_.find(key);
        if (it != last_error_comment_.end() &&
            now - it->second < options_.error_comment_interval) {
            return;  // stay quiet; the thread already has a fresh error comment
        }
        last_error_comment_[key] = now;
    }
    try {
        forge_.post_comment(repo, issue_number, text);
        outcome.actions.push_back({BotAction::Kind::commented, ""});
    } catch (const ForgeError& e) {
        spdlog::error("could not post error comment on {}#{}: {}", repo.full_name(), issue_number,
                      e.what());
        outcome.actions.push_back(
            {BotAction::Kind::errored, error_category("forge", to_string(e.kind()))});
    }
}

}  // namespace tagdebt
