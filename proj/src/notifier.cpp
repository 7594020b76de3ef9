#include "tagdebt/notifier.hpp"

#include <algorithm>
#include <array>

namespace tagdebt {

namespace {

constexpr std::string_view kGenericSubject = "[TagDebt] /label: /issue_title";

constexpr std::string_view kGenericBody =
    "TagDebt labeled an issue in /repository.\n"
    "\n"
    "  Label: /label\n"
    "  Issue: /issue_title\n"
    "  Link:  /issue_link\n"
    "\n"
    "You receive this mail because your address is listed under\n"
    "email-info.recipients in the repository's Bot/config.json.\n";

constexpr std::string_view kLingeringSubject =
    "[TagDebt] /count lingering issue(s) in /repository";

constexpr std::string_view kLingeringBody =
    "TagDebt found /count open issue(s) in /repository that have been\n"
    "inactive past the configured threshold:\n"
    "\n"
    "/issue_list\n"
    "You receive this mail because your address is listed under\n"
    "email-info.recipients in the repository's Bot/config.json.\n";

std::string strip_newlines(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '\r', ' ');
    return s;
}

std::string lookup_template(const std::map<std::string, std::string>& templates,
                            const std::string& label, std::string_view fallback) {
    const auto it = templates.find(label);
    return it == templates.end() ? std::string(fallback) : it->second;
}

}  // namespace

bool should_notify(const std::string& label, const EmailSettings& settings) {
    return settings.send_emails && settings.when_to_send.count(label) > 0 &&
           !settings.recipients.empty();
}

std::string render_template(std::string_view tmpl, std::span<const Placeholder> replacements) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const char c = tmpl[pos];
        if (c != '/') {
            out.push_back(c);
            ++pos;
            continue;
        }
        const std::string_view rest = tmpl.substr(pos);
        const Placeholder* best = nullptr;
        for (const Placeholder& candidate : replacements) {
            if (rest.rfind(candidate.first, 0) == 0 &&
                (best == nullptr || candidate.first.size() > best->first.size())) {
                best = &candidate;
            }
        }
        if (best == nullptr) {
            out.push_back(c);
            ++pos;
            continue;
        }
        out.append(best->second);
        pos += best->first.size();
    }
    return out;
}

std::string render_template(std::string_view tmpl, const RenderContext& ctx) {
    const std::array<Placeholder, 4> replacements{{
        {"/label", ctx.label},
        {"/issue_link", ctx.issue_link},
        {"/issue_title", ctx.issue_title},
        {"/repository", ctx.repository},
    }};
    return render_template(tmpl, replacements);
}

std::optional<EmailMessage> prepare_label_email(const Issue& issue, const std::string& label,
                                                const EmailSettings& settings,
                                                std::string_view link_base) {
    if (!should_notify(label, settings)) {
        return std::nullopt;
    }
    RenderContext ctx;
    ctx.label = label;
    ctx.issue_link = issue_html_url(issue.repo, issue.number, link_base);
    ctx.issue_title = issue.title;
    ctx.repository = issue.repo.full_name();

    EmailMessage message;
    message.subject = strip_newlines(
        render_template(lookup_template(settings.subject_templates, label, kGenericSubject), ctx));
    message.body =
        render_template(lookup_template(settings.body_templates, label, kGenericBody), ctx);
    message.recipients = settings.recipients;
    return message;
}

std::optional<EmailMessage> prepare_lingering_email(const LingeringReport& report,
                                                    const EmailSettings& settings) {
    if (!settings.send_emails || settings.recipients.empty() || report.items.empty()) {
        return std::nullopt;
    }

    std::string issue_list;
    for (const LingeringItem& item : report.items) {
        issue_list += "  #" + std::to_string(item.issue_number) + " " + item.title + " (" +
                      std::to_string(item.days_lingering) + " days) " + item.link + "\n";
    }
    const std::string count = std::to_string(report.items.size());
    const std::string repository = report.repo.full_name();

    const std::array<Placeholder, 4> replacements{{
        {"/count", count},
        {"/issue_list", issue_list},
        {"/repository", repository},
        {"/label", "lingering"},
    }};

    EmailMessage message;
    message.subject = strip_newlines(render_template(
        lookup_template(settings.subject_templates, "lingering", kLingeringSubject),
        replacements));
    message.body = render_template(
        lookup_template(settings.body_templates, "lingering", kLingeringBody), replacements);
    message.recipients = settings.recipients;
    return message;
}

std::string_view generic_subject_template() { return kGenericSubject; }
std::string_view generic_body_template() { return kGenericBody; }
std::string_view lingering_subject_template() { return kLingeringSubject; }
std::string_view lingering_body_template() { return kLingeringBody; }

}  // namespace tagdebt
