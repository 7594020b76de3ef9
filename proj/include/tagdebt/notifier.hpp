#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tagdebt/config.hpp"
#include "tagdebt/forge.hpp"
#include "tagdebt/lingering.hpp"

namespace tagdebt {

/// Values substituted into email templates for one labeled issue.
struct RenderContext {
    std::string label;
    std::string issue_link;  // absolute URL
    std::string issue_title;
    std::string repository;  // "owner/name"
};

struct EmailMessage {
    std::string subject;  // single line
    std::string body;     // plain text
    std::vector<std::string> recipients;  // never empty

    bool operator==(const EmailMessage&) const = default;
};

/// The notification gate: emails fire only when the master switch is on, the
/// label is subscribed, and somebody is listed to receive them.
bool should_notify(const std::string& label, const EmailSettings& settings);

using Placeholder = std::pair<std::string_view, std::string_view>;  // token -> value

/// Replaces every "/token" occurrence in a single left-to-right pass; text
/// introduced by a substitution is never rescanned, and unknown "/tokens"
/// pass through verbatim. Longest token wins where tokens share a prefix.
std::string render_template(std::string_view tmpl, std::span<const Placeholder> replacements);

/// Standard placeholder set: /label, /issue_link, /issue_title, /repository.
std::string render_template(std::string_view tmpl, const RenderContext& ctx);

/// Message for a freshly labeled issue, or nullopt when the gate is closed.
/// Uses the per-label template when configured, else the built-in generic one.
std::optional<EmailMessage> prepare_label_email(const Issue& issue, const std::string& label,
                                                const EmailSettings& settings,
                                                std::string_view link_base = "https://github.com");

/// Digest for one repository's lingering issues, or nullopt when mail is off,
/// nobody is subscribed, or the report is empty. Lingering templates support
/// two extra placeholders: /count and /issue_list.
std::optional<EmailMessage> prepare_lingering_email(const LingeringReport& report,
                                                    const EmailSettings& settings);

/// Built-in templates used when a label has no configured entry.
std::string_view generic_subject_template();
std::string_view generic_body_template();
std::string_view lingering_subject_template();
std::string_view lingering_body_template();

}  // namespace tagdebt
