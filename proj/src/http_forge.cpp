#include "tagdebt/http_forge.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdlib>
#include <json.hpp>
#include <thread>

#include "tagdebt/time_util.hpp"

namespace tagdebt {

namespace {

using nlohmann::json;

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path_prefix;
};

SplitUrl split_base_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ForgeError(ForgeError::Kind::invalid_response,
                         "forge base URL must be an absolute http(s) URL: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return SplitUrl{url, ""};
    }
    std::string prefix = url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return SplitUrl{url.substr(0, path_start), prefix};
}

/// Percent-encodes one path segment (labels may contain spaces or slashes).
std::string encode_segment(const std::string& raw) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : raw) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 15];
        }
    }
    return out;
}

bool mentions_rate_limit(const httplib::Response& res) {
    if (res.get_header_value("x-ratelimit-remaining") == "0") return true;
    if (res.get_header_value("retry-after") != "") return true;
    return res.body.find("rate limit") != std::string::npos;
}

[[noreturn]] void throw_for_status(const httplib::Response& res, const std::string& what) {
    switch (res.status) {
    case 404:
        throw ForgeError(ForgeError::Kind::not_found, what + ": not found");
    case 401:
        throw ForgeError(ForgeError::Kind::permission_denied, what + ": unauthorized");
    case 403:
        if (mentions_rate_limit(res)) {
            throw ForgeError(ForgeError::Kind::rate_limited, what + ": rate limited");
        }
        throw ForgeError(ForgeError::Kind::permission_denied, what + ": forbidden");
    case 429:
        throw ForgeError(ForgeError::Kind::rate_limited, what + ": rate limited");
    default:
        if (res.status >= 500) {
            throw ForgeError(ForgeError::Kind::network,
                             what + ": server error " + std::to_string(res.status));
        }
        throw ForgeError(ForgeError::Kind::invalid_response,
                         what + ": unexpected status " + std::to_string(res.status));
    }
}

}  // namespace

std::string forge_token_from_env() {
    if (const char* token = std::getenv("FORGE_TOKEN")) return token;
    if (const char* token = std::getenv("GITHUB_TOKEN")) return token;
    return "";
}

struct HttpForge::Impl {
    HttpForgeOptions options;
    SplitUrl base;
    std::function<void(std::chrono::milliseconds)> sleeper;

    explicit Impl(HttpForgeOptions opts)
        : options(std::move(opts)), base(split_base_url(options.base_url)) {
        sleeper = [](std::chrono::milliseconds delay) { std::this_thread::sleep_for(delay); };
    }

    httplib::Client make_client() const {
        httplib::Client client(base.origin);
        client.set_connection_timeout(options.timeout);
        client.set_read_timeout(options.timeout);
        client.set_write_timeout(options.timeout);
        client.set_follow_location(true);
        httplib::Headers headers = {
            {"User-Agent", "tagdebt-bot"},
            {"Accept", "application/vnd.github+json"},
            {"X-GitHub-Api-Version", "2022-11-28"},
        };
        if (!options.token.empty()) {
            headers.emplace("Authorization", "Bearer " + options.token);
        }
        client.set_default_headers(std::move(headers));
        return client;
    }

    std::string url(const std::string& path) const { return base.path_prefix + path; }

    /// Runs `call`, retrying rate-limit and transport failures with
    /// exponential backoff up to options.attempts total tries.
    template <typename F>
    auto with_retries(const std::string& what, F&& call) -> decltype(call()) {
        const int attempts = std::max(1, options.attempts);
        for (int attempt = 1;; ++attempt) {
            try {
                return call();
            } catch (const ForgeError& e) {
                if (!e.retryable() || attempt >= attempts) throw;
                const auto delay = options.base_backoff * (1 << (attempt - 1));
                spdlog::warn("{} failed ({}), retrying in {} ms (attempt {}/{})", what, e.what(),
                             delay.count(), attempt, attempts);
                sleeper(delay);
            }
        }
    }

    httplib::Response checked(const httplib::Result& result, const std::string& what,
                              int expected_status) {
        if (!result) {
            throw ForgeError(ForgeError::Kind::network,
                             what + ": transport error: " + httplib::to_string(result.error()));
        }
        if (result->status != expected_status) {
            throw_for_status(*result, what);
        }
        return *result;
    }
};

HttpForge::HttpForge(HttpForgeOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

HttpForge::~HttpForge() = default;

void HttpForge::set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper) {
    impl_->sleeper = std::move(sleeper);
}

std::optional<std::string> HttpForge::fetch_file(const RepoRef& repo, const std::string& path,
                                                 const std::string& ref) {
    const std::string what = "fetch_file " + repo.full_name() + " " + ref + ":" + path;
    return impl_->with_retries(what, [&]() -> std::optional<std::string> {
        auto client = impl_->make_client();
        httplib::Headers headers = {{"Accept", "application/vnd.github.raw+json"}};
        auto result = client.Get(
            impl_->url("/repos/" + repo.owner + "/" + repo.name + "/contents/" + path +
                       "?ref=" + encode_segment(ref)),
            headers);
        if (result && result->status == 404) return std::nullopt;
        return impl_->checked(result, what, 200).body;
    });
}

void HttpForge::add_label(const RepoRef& repo, int issue_number, const std::string& label) {
    const std::string what =
        "add_label " + repo.full_name() + "#" + std::to_string(issue_number) + " " + label;
    impl_->with_retries(what, [&] {
        auto client = impl_->make_client();

        // Make sure the label is defined repo-wide first; 422 means it
        // already exists, which is fine.
        json definition = {{"name", label}};
        auto created = client.Post(impl_->url("/repos/" + repo.owner + "/" + repo.name + "/labels"),
                                   definition.dump(), "application/json");
        if (!created) {
            throw ForgeError(ForgeError::Kind::network,
                             what + ": transport error: " + httplib::to_string(created.error()));
        }
        if (created->status != 201 && created->status != 422) {
            throw_for_status(*created, what);
        }

        json body = {{"labels", json::array({label})}};
        auto result = client.Post(impl_->url("/repos/" + repo.owner + "/" + repo.name +
                                             "/issues/" + std::to_string(issue_number) + "/labels"),
                                  body.dump(), "application/json");
        impl_->checked(result, what, 200);
    });
}

void HttpForge::remove_label(const RepoRef& repo, int issue_number, const std::string& label) {
    const std::string what =
        "remove_label " + repo.full_name() + "#" + std::to_string(issue_number) + " " + label;
    impl_->with_retries(what, [&] {
        auto client = impl_->make_client();
        auto result = client.Delete(impl_->url("/repos/" + repo.owner + "/" + repo.name +
                                               "/issues/" + std::to_string(issue_number) +
                                               "/labels/" + encode_segment(label)));
        // Removing a label the issue does not carry is a no-op, matching the
        // idempotent contract.
        if (result && result->status == 404) return;
        impl_->checked(result, what, 200);
    });
}

void HttpForge::post_comment(const RepoRef& repo, int issue_number, const std::string& body) {
    const std::string what =
        "post_comment " + repo.full_name() + "#" + std::to_string(issue_number);
    impl_->with_retries(what, [&] {
        auto client = impl_->make_client();
        json payload = {{"body", body}};
        auto result = client.Post(impl_->url("/repos/" + repo.owner + "/" + repo.name +
                                             "/issues/" + std::to_string(issue_number) +
                                             "/comments"),
                                  payload.dump(), "application/json");
        impl_->checked(result, what, 201);
    });
}

std::vector<Issue> HttpForge::list_open_issues(const RepoRef& repo) {
    const std::string what = "list_open_issues " + repo.full_name();
    return impl_->with_retries(what, [&]() -> std::vector<Issue> {
        std::vector<Issue> issues;
        auto client = impl_->make_client();
        for (int page = 1;; ++page) {
            auto result = client.Get(impl_->url("/repos/" + repo.owner + "/" + repo.name +
                                                "/issues?state=open&per_page=100&page=" +
                                                std::to_string(page)));
            auto response = impl_->checked(result, what, 200);
            json parsed;
            try {
                parsed = json::parse(response.body);
            } catch (const json::parse_error& e) {
                throw ForgeError(ForgeError::Kind::invalid_response,
                                 what + ": response is not JSON: " + std::string(e.what()));
            }
            if (!parsed.is_array()) {
                throw ForgeError(ForgeError::Kind::invalid_response,
                                 what + ": expected a JSON array");
            }
            for (const auto& entry : parsed) {
                if (!entry.is_object()) {
                    throw ForgeError(ForgeError::Kind::invalid_response,
                                     what + ": issue entry is not an object");
                }
                if (entry.contains("pull_request")) continue;  // the endpoint mixes in PRs
                try {
                    Issue issue;
                    issue.repo = repo;
                    issue.number = entry.at("number").get<int>();
                    issue.title = entry.at("title").get<std::string>();
                    if (entry.contains("body") && entry["body"].is_string()) {
                        issue.body = entry["body"].get<std::string>();
                    }
                    for (const auto& label : entry.value("labels", json::array())) {
                        issue.labels.insert(label.at("name").get<std::string>());
                    }
                    const auto state = issue_state_from_string(entry.value("state", "open"));
                    if (!state) {
                        throw ForgeError(ForgeError::Kind::invalid_response,
                                         what + ": unknown issue state");
                    }
                    issue.state = *state;
                    const auto created = parse_timestamp(entry.at("created_at").get<std::string>());
                    const auto updated = parse_timestamp(entry.at("updated_at").get<std::string>());
                    if (!created || !updated) {
                        throw ForgeError(ForgeError::Kind::invalid_response,
                                         what + ": unparsable issue timestamps");
                    }
                    issue.created_at = *created;
                    issue.updated_at = *updated;
                    issues.push_back(std::move(issue));
                } catch (const std::exception& e) {
                    throw ForgeError(ForgeError::Kind::invalid_response,
                                     what + ": malformed issue entry: " + std::string(e.what()));
                }
            }
            if (parsed.size() < 100) break;
        }
        return issues;
    });
}

}  // namespace tagdebt
