#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "tagdebt/forge.hpp"

namespace tagdebt {

/// Thread-safe append-only record of named calls. The fake forge and
/// instrumented detectors share one log so tests can assert ordering of
/// effects across components.
class CallLog {
public:
    void append(std::string entry);
    std::vector<std::string> entries() const;
    void clear();

    /// Index of the first entry starting with `prefix`, or -1.
    std::ptrdiff_t index_of(std::string_view prefix) const;
    std::size_t count_of(std::string_view prefix) const;

private:
    mutable std::mutex mu_;
    std::vector<std::string> entries_;
};

/// In-memory forge. Mutations are atomic per operation; reads and writes may
/// come concurrently from webhook handlers and the lingering scheduler.
///
/// Issue timestamps are never touched implicitly: what a test seeds is what
/// every later read returns, so age-sensitive scenarios stay deterministic.
class FakeForge : public Forge {
public:
    // Forge interface
    std::optional<std::string> fetch_file(const RepoRef& repo, const std::string& path,
                                          const std::string& branch) override;
    void add_label(const RepoRef& repo, int issue_number, const std::string& label) override;
    void remove_label(const RepoRef& repo, int issue_number, const std::string& label) override;
    void post_comment(const RepoRef& repo, int issue_number, const std::string& body) override;
    std::vector<Issue> list_open_issues(const RepoRef& repo) override;

    // Seeding
    void add_repo(const RepoRef& repo);
    void put_file(const RepoRef& repo, const std::string& branch, const std::string& path,
                  std::string content);
    void delete_file(const RepoRef& repo, const std::string& branch, const std::string& path);
    void seed_issue(Issue issue);

    // Inspection
    Issue issue(const RepoRef& repo, int number) const;
    std::vector<Comment> comments(const RepoRef& repo, int issue_number) const;
    std::set<std::string> defined_labels(const RepoRef& repo) const;
    std::vector<RepoRef> installed_repos() const;

    // Instrumentation
    void set_call_log(CallLog* log) { call_log_ = log; }
    void set_clock(std::function<Timestamp()> now) { now_ = std::move(now); }

    /// Makes up to `times` subsequent calls fail with `kind`. Empty `op` or
    /// `repo_full_name` match any operation / repository.
    void inject_failure(ForgeError::Kind kind, std::string op = "", std::string repo_full_name = "",
                        int times = 1);

private:
    struct RepoState {
        RepoRef ref;
        // branch -> path -> content
        std::map<std::string, std::map<std::string, std::string>> files;
        std::map<int, Issue> issues;
        std::map<int, std::vector<Comment>> comments;
        std::set<std::string> label_definitions;
    };

    struct InjectedFailure {
        ForgeError::Kind kind;
        std::string op;
        std::string repo;
        int remaining;
    };

    RepoState& state_locked(const RepoRef& repo);
    const RepoState* find_locked(const RepoRef& repo) const;
    void record(const std::string& entry);
    void maybe_fail_locked(const std::string& op, const std::string& repo_full_name);

    mutable std::mutex mu_;
    std::map<std::string, RepoState> repos_;
    std::deque<InjectedFailure> failures_;
    CallLog* call_log_ = nullptr;
    std::function<Timestamp()> now_ = system_now;
};

}  // namespace tagdebt
