#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tagdebt/time_util.hpp"

namespace tagdebt {

struct RepoRef {
    std::string owner;
    std::string name;
    std::string default_branch = "main";

    std::string full_name() const { return owner + "/" + name; }
    bool operator==(const RepoRef&) const = default;
    bool operator<(const RepoRef& other) const {
        return full_name() < other.full_name();
    }
};

/// Splits "owner/name"; rejects empty parts, extra slashes and whitespace.
std::optional<RepoRef> parse_repo_full_name(std::string_view full_name,
                                            std::string_view default_branch = "main");

enum class IssueState { open, closed };

std::string_view to_string(IssueState state);
std::optional<IssueState> issue_state_from_string(std::string_view s);

struct Issue {
    RepoRef repo;
    int number = 0;
    std::string title;
    std::string body;
    std::set<std::string> labels;
    IssueState state = IssueState::open;
    Timestamp created_at{};
    Timestamp updated_at{};

    bool operator==(const Issue&) const = default;
};

struct Comment {
    RepoRef repo;
    int issue_number = 0;
    std::string author_login;
    bool author_is_bot = false;
    std::string body;
    Timestamp created_at{};
};

class ForgeError : public std::runtime_error {
public:
    enum class Kind { not_found, permission_denied, rate_limited, network, invalid_response };

    ForgeError(Kind kind, std::string detail);

    Kind kind() const { return kind_; }
    /// Only rate-limit and transport failures are worth retrying.
    bool retryable() const {
        return kind_ == Kind::rate_limited || kind_ == Kind::network;
    }

private:
    Kind kind_;
};

std::string_view to_string(ForgeError::Kind kind);

/// Minimal surface the bot needs from a GitHub-style forge. Implementations:
/// HttpForge (real REST API) and FakeForge (in-memory, for tests and the
/// simulator). The whole pipeline is written against this interface.
class Forge {
public:
    virtual ~Forge() = default;

    /// Raw bytes of `path` at the head of `branch`, or nullopt if the file
    /// does not exist. Never cached: every call reflects the current head.
    virtual std::optional<std::string> fetch_file(const RepoRef& repo, const std::string& path,
                                                  const std::string& branch) = 0;

    /// Adds `label` to the issue, creating the label definition on the forge
    /// if needed. Idempotent.
    virtual void add_label(const RepoRef& repo, int issue_number, const std::string& label) = 0;

    /// Removes `label` from the issue if present; no-op otherwise.
    virtual void remove_label(const RepoRef& repo, int issue_number, const std::string& label) = 0;

    /// Appends a bot-authored comment.
    virtual void post_comment(const RepoRef& repo, int issue_number, const std::string& body) = 0;

    /// All currently open issues with their labels and timestamps.
    virtual std::vector<Issue> list_open_issues(const RepoRef& repo) = 0;
};

/// Browser-facing URL of an issue, e.g. "https://github.com/o/r/issues/7".
std::string issue_html_url(const RepoRef& repo, int issue_number,
                           std::string_view link_base = "https://github.com");

}  // namespace tagdebt
