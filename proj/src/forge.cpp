#include "tagdebt/forge.hpp"

#include <cctype>

namespace tagdebt {

namespace {

bool valid_name_part(std::string_view part) {
    if (part.empty()) {
        return false;
    }
    for (char c : part) {
        if (c == '/' || std::isspace(static_cast<unsigned char>(c))) {
            return false;
        }
    }
    return true;
}

}  // namespace

std::string_view to_string(IssueState state) {
    return state == IssueState::open ? "open" : "closed";
}

std::optional<IssueState> issue_state_from_string(std::string_view s) {
    if (s == "open") return IssueState::open;
    if (s == "closed") return IssueState::closed;
    return std::nullopt;
}

std::optional<RepoRef> parse_repo_full_name(std::string_view full_name,
                                            std::string_view default_branch) {
    const auto slash = full_name.find('/');
    if (slash == std::string_view::npos) {
        return std::nullopt;
    }
    const std::string_view owner = full_name.substr(0, slash);
    const std::string_view name = full_name.substr(slash + 1);
    if (!valid_name_part(owner) || !valid_name_part(name) || default_branch.empty()) {
        return std::nullopt;
    }
    return RepoRef{std::string(owner), std::string(name), std::string(default_branch)};
}

ForgeError::ForgeError(Kind kind, std::string detail)
    : std::runtime_error("forge error (" + std::string(to_string(kind)) + "): " + detail),
      kind_(kind) {}

std::string_view to_string(ForgeError::Kind kind) {
    switch (kind) {
    case ForgeError::Kind::not_found: return "not_found";
    case ForgeError::Kind::permission_denied: return "permission_denied";
    case ForgeError::Kind::rate_limited: return "rate_limited";
    case ForgeError::Kind::network: return "network";
    case ForgeError::Kind::invalid_response: return "invalid_response";
    }
    return "unknown";
}

std::string issue_html_url(const RepoRef& repo, int issue_number, std::string_view link_base) {
    std::string url{link_base};
    if (!url.empty() && url.back() == '/') {
        url.pop_back();
    }
    url += "/" + repo.full_name() + "/issues/" + std::to_string(issue_number);
    return url;
}

}  // namespace tagdebt
