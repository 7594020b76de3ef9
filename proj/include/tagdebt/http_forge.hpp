#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <string>

#include "tagdebt/forge.hpp"

namespace tagdebt {

struct HttpForgeOptions {
    std::string base_url = "https://api.github.com";
    std::string token;
    int attempts = 3;  // total tries per operation, including the first
    std::chrono::milliseconds base_backoff{500};
    std::chrono::seconds timeout{30};
};

/// Reads the API token from FORGE_TOKEN, falling back to GITHUB_TOKEN.
std::string forge_token_from_env();

/// Forge backed by a GitHub-style REST API.
///
/// Retryable failures (rate limiting, transport errors) are retried up to
/// `attempts` times with exponentially growing backoff; everything else
/// surfaces immediately as a ForgeError.
class HttpForge : public Forge {
public:
    explicit HttpForge(HttpForgeOptions options);
    ~HttpForge() override;

    HttpForge(const HttpForge&) = delete;
    HttpForge& operator=(const HttpForge&) = delete;

    std::optional<std::string> fetch_file(const RepoRef& repo, const std::string& path,
                                          const std::string& ref) override;
    void add_label(const RepoRef& repo, int issue_number, const std::string& label) override;
    void remove_label(const RepoRef& repo, int issue_number, const std::string& label) override;
    void post_comment(const RepoRef& repo, int issue_number, const std::string& body) override;
    std::vector<Issue> list_open_issues(const RepoRef& repo) override;

    /// Injection point for tests; defaults to a real sleep.
    void set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace tagdebt
