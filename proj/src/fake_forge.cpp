#include "tagdebt/fake_forge.hpp"

#include <algorithm>

namespace tagdebt {

void CallLog::append(std::string entry) {
    std::lock_guard lock(mu_);
    entries_.push_back(std::move(entry));
}

std::vector<std::string> CallLog::entries() const {
    std::lock_guard lock(mu_);
    return entries_;
}

void CallLog::clear() {
    std::lock_guard lock(mu_);
    entries_.clear();
}

std::ptrdiff_t CallLog::index_of(std::string_view prefix) const {
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].rfind(prefix, 0) == 0) {
            return static_cast<std::ptrdiff_t>(i);
        }
    }
    return -1;
}

std::size_t CallLog::count_of(std::string_view prefix) const {
    std::lock_guard lock(mu_);
    return static_cast<std::size_t>(
        std::count_if(entries_.begin(), entries_.end(),
                      [&](const std::string& e) { return e.rfind(prefix, 0) == 0; }));
}

FakeForge::RepoState& FakeForge::state_locked(const RepoRef& repo) {
    auto it = repos_.find(repo.full_name());
    if (it == repos_.end()) {
        throw ForgeError(ForgeError::Kind::not_found, "repository " + repo.full_name());
    }
    return it->second;
}

const FakeForge::RepoState* FakeForge::find_locked(const RepoRef& repo) const {
    auto it = repos_.find(repo.full_name());
    return it == repos_.end() ? nullptr : &it->second;
}

void FakeForge::record(const std::string& entry) {
    if (call_log_ != nullptr) {
        call_log_->append(entry);
    }
}

void FakeForge::maybe_fail_locked(const std::string& op, const std::string& repo_full_name) {
    for (auto it = failures_.begin(); it != failures_.end(); ++it) {
        const bool op_match = it->op.empty() || it->op == op;
        const bool repo_match = it->repo.empty() || it->repo == repo_full_name;
        if (op_match && repo_match) {
            const ForgeError::Kind kind = it->kind;
            if (--it->remaining <= 0) {
                failures_.erase(it);
            }
            throw ForgeError(kind, "injected failure on " + op + " for " + repo_full_name);
        }
    }
}

std::optional<std::string> FakeForge::fetch_file(const RepoRef& repo, const std::string& path,
                                                const std::string& branch) {
    std::lock_guard lock(mu_);
    record("fetch_file " + repo.full_name() + " " + branch + ":" + path);
    maybe_fail_locked("fetch_file", repo.full_name());
    RepoState& state = state_locked(repo);
    auto branch_it = state.files.find(branch);
    if (branch_it == state.files.end()) {
        return std::nullopt;
    }
    auto file_it = branch_it->second.find(path);
    if (file_it == branch_it->second.end()) {
        return std::nullopt;
    }
    return file_it->second;
}

void FakeForge::add_label(const RepoRef& repo, int issue_number, const std::string& label) {
    std::lock_guard lock(mu_);
    record("add_label " + repo.full_name() + "#" + std::to_string(issue_number) + " " + label);
    maybe_fail_locked("add_label", repo.full_name());
    RepoState& state = state_locked(repo);
    auto it = state.issues.find(issue_number);
    if (it == state.issues.end()) {
        throw ForgeError(ForgeError::Kind::not_found,
                         repo.full_name() + "#" + std::to_string(issue_number));
    }
    state.label_definitions.insert(label);
    it->second.labels.insert(label);
}

void FakeForge::remove_label(const RepoRef& repo, int issue_number, const std::string& label) {
    std::lock_guard lock(mu_);
    record("remove_label " + repo.full_name() + "#" + std::to_string(issue_number) + " " + label);
    maybe_fail_locked("remove_label", repo.full_name());
    RepoState& state = state_locked(repo);
    auto it = state.issues.find(issue_number);
    if (it == state.issues.end()) {
        throw ForgeError(ForgeError::Kind::not_found,
                         repo.full_name() + "#" + std::to_string(issue_number));
    }
    it->second.labels.erase(label);
}

void FakeForge::post_comment(const RepoRef& repo, int issue_number, const std::string& body) {
    std::lock_guard lock(mu_);
    record("post_comment " + repo.full_name() + "#" + std::to_string(issue_number));
    maybe_fail_locked("post_comment", repo.full_name());
    RepoState& state = state_locked(repo);
    if (state.issues.find(issue_number) == state.issues.end()) {
        throw ForgeError(ForgeError::Kind::not_found,
                         repo.full_name() + "#" + std::to_string(issue_number));
    }
    Comment comment;
    comment.repo = repo;
    comment.issue_number = issue_number;
    comment.author_login = "tagdebt[bot]";
    comment.author_is_bot = true;
    comment.body = body;
    comment.created_at = now_();
    state.comments[issue_number].push_back(std::move(comment));
}

std::vector<Issue> FakeForge::list_open_issues(const RepoRef& repo) {
    std::lock_guard lock(mu_);
    record("list_open_issues " + repo.full_name());
    maybe_fail_locked("list_open_issues", repo.full_name());
    RepoState& state = state_locked(repo);
    std::vector<Issue> open;
    for (const auto& [number, issue] : state.issues) {
        if (issue.state == IssueState::open) {
            open.push_back(issue);
        }
    }
    return open;
}

void FakeForge::add_repo(const RepoRef& repo) {
    std::lock_guard lock(mu_);
    repos_.try_emplace(repo.full_name(), RepoState{repo, {}, {}, {}, {}});
}

void FakeForge::put_file(const RepoRef& repo, const std::string& branch, const std::string& path,
                         std::string content) {
    std::lock_guard lock(mu_);
    auto [it, inserted] = repos_.try_emplace(repo.full_name(), RepoState{repo, {}, {}, {}, {}});
    it->second.files[branch][path] = std::move(content);
}

void FakeForge::delete_file(const RepoRef& repo, const std::string& branch,
                            const std::string& path) {
    std::lock_guard lock(mu_);
    auto it = repos_.find(repo.full_name());
    if (it == repos_.end()) {
        return;
    }
    auto branch_it = it->second.files.find(branch);
    if (branch_it != it->second.files.end()) {
        branch_it->second.erase(path);
    }
}

void FakeForge::seed_issue(Issue issue) {
    std::lock_guard lock(mu_);
    auto [it, inserted] =
        repos_.try_emplace(issue.repo.full_name(), RepoState{issue.repo, {}, {}, {}, {}});
    it->second.issues[issue.number] = std::move(issue);
}

Issue FakeForge::issue(const RepoRef& repo, int number) const {
    std::lock_guard lock(mu_);
    const RepoState* state = find_locked(repo);
    if (state == nullptr) {
        throw ForgeError(ForgeError::Kind::not_found, "repository " + repo.full_name());
    }
    auto it = state->issues.find(number);
    if (it == state->issues.end()) {
        throw ForgeError(ForgeError::Kind::not_found,
                         repo.full_name() + "#" + std::to_string(number));
    }
    return it->second;
}

std::vector<Comment> FakeForge::comments(const RepoRef& repo, int issue_number) const {
    std::lock_guard lock(mu_);
    const RepoState* state = find_locked(repo);
    if (state == nullptr) {
        throw ForgeError(ForgeError::Kind::not_found, "repository " + repo.full_name());
    }
    auto it = state->comments.find(issue_number);
    return it == state->comments.end() ? std::vector<Comment>{} : it->second;
}

std::set<std::string> FakeForge::defined_labels(const RepoRef& repo) const {
    std::lock_guard lock(mu_);
    const RepoState* state = find_locked(repo);
    if (state == nullptr) {
        throw ForgeError(ForgeError::Kind::not_found, "repository " + repo.full_name());
    }
    return state->label_definitions;
}

std::vector<RepoRef> FakeForge::installed_repos() const {
    std::lock_guard lock(mu_);
    std::vector<RepoRef> out;
    out.reserve(repos_.size());
    for (const auto& [_, state] : repos_) {
        out.push_back(state.ref);
    }
    return out;
}

void FakeForge::inject_failure(ForgeError::Kind kind, std::string op, std::string repo_full_name,
                               int times) {
    std::lock_guard lock(mu_);
    failures_.push_back(InjectedFailure{kind, std::move(op), std::move(repo_full_name), times});
}

}  // namespace tagdebt
