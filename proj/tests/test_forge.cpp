#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <json.hpp>
#include <thread>

#include "support/generators.hpp"
#include "tagdebt/fake_forge.hpp"
#include "tagdebt/http_forge.hpp"

using namespace tagdebt;
using nlohmann::json;

namespace {

const RepoRef kRepo{"acme", "widgets", "main"};

Issue make_issue(int number, IssueState state = IssueState::open) {
    Issue issue;
    issue.repo = kRepo;
    issue.number = number;
    issue.title = "issue " + std::to_string(number);
    issue.body = "body";
    issue.state = state;
    issue.created_at = *parse_timestamp("2025-01-01T00:00:00Z");
    issue.updated_at = issue.created_at;
    return issue;
}

}  // namespace

TEST_CASE("repo names parse strictly") {
    const auto repo = parse_repo_full_name("acme/widgets");
    REQUIRE(repo.has_value());
    CHECK(repo->owner == "acme");
    CHECK(repo->name == "widgets");
    CHECK(repo->default_branch == "main");
    CHECK(repo->full_name() == "acme/widgets");

    CHECK_FALSE(parse_repo_full_name("acme"));
    CHECK_FALSE(parse_repo_full_name("/widgets"));
    CHECK_FALSE(parse_repo_full_name("acme/"));
    CHECK_FALSE(parse_repo_full_name("acme/wid gets"));
    CHECK_FALSE(parse_repo_full_name("acme/widgets/extra"));
    CHECK_FALSE(parse_repo_full_name(""));
}

TEST_CASE("issue links point at the forge's web UI") {
    CHECK(issue_html_url(kRepo, 17) == "https://github.com/acme/widgets/issues/17");
    CHECK(issue_html_url(kRepo, 1, "https://forge.example") ==
          "https://forge.example/acme/widgets/issues/1");
}

TEST_CASE("fake forge stores and serves files per branch") {
    FakeForge forge;
    forge.put_file(kRepo, "main", "Bot/config.json", "{}");

    CHECK(forge.fetch_file(kRepo, "Bot/config.json", "main") == "{}");
    CHECK_FALSE(forge.fetch_file(kRepo, "Bot/config.json", "dev").has_value());
    CHECK_FALSE(forge.fetch_file(kRepo, "other.txt", "main").has_value());

    forge.put_file(kRepo, "main", "Bot/config.json", "{\"welcome-comment\":false}");
    CHECK(forge.fetch_file(kRepo, "Bot/config.json", "main") == "{\"welcome-comment\":false}");

    forge.delete_file(kRepo, "main", "Bot/config.json");
    CHECK_FALSE(forge.fetch_file(kRepo, "Bot/config.json", "main").has_value());

    const RepoRef unknown{"no", "where", "main"};
    CHECK_THROWS_AS(forge.fetch_file(unknown, "x", "main"), ForgeError);
}

TEST_CASE("fake forge labels are idempotent and removable") {
    FakeForge forge;
    forge.seed_issue(make_issue(1));

    forge.add_label(kRepo, 1, "TD");
    forge.add_label(kRepo, 1, "TD");
    CHECK(forge.issue(kRepo, 1).labels == std::set<std::string>{"TD"});
    CHECK(forge.defined_labels(kRepo) == std::set<std::string>{"TD"});

    forge.add_label(kRepo, 1, "non-TD");
    CHECK(forge.issue(kRepo, 1).labels == std::set<std::string>{"TD", "non-TD"});

    forge.remove_label(kRepo, 1, "TD");
    CHECK(forge.issue(kRepo, 1).labels == std::set<std::string>{"non-TD"});
    // Removing an absent label is a no-op, not an error.
    forge.remove_label(kRepo, 1, "TD");
    CHECK(forge.issue(kRepo, 1).labels == std::set<std::string>{"non-TD"});

    CHECK_THROWS_AS(forge.add_label(kRepo, 99, "TD"), ForgeError);
}

TEST_CASE("fake forge comments carry the bot author and clock") {
    FakeForge forge;
    forge.seed_issue(make_issue(4));
    const Timestamp frozen = *parse_timestamp("2025-06-01T12:00:00Z");
    forge.set_clock([frozen] { return frozen; });

    forge.post_comment(kRepo, 4, "hello");
    const auto comments = forge.comments(kRepo, 4);
    REQUIRE(comments.size() == 1);
    CHECK(comments[0].body == "hello");
    CHECK(comments[0].author_is_bot);
    CHECK(comments[0].created_at == frozen);

    // Posting never rewrites the issue's own timestamps.
    CHECK(forge.issue(kRepo, 4).updated_at == make_issue(4).updated_at);
}

TEST_CASE("list_open_issues returns open issues only, fresh on every call") {
    FakeForge forge;
    forge.seed_issue(make_issue(1));
    forge.seed_issue(make_issue(2, IssueState::closed));
    forge.seed_issue(make_issue(3));

    auto open = forge.list_open_issues(kRepo);
    REQUIRE(open.size() == 2);
    CHECK(open[0].number == 1);
    CHECK(open[1].number == 3);

    Issue reopened = make_issue(2);
    forge.seed_issue(reopened);
    CHECK(forge.list_open_issues(kRepo).size() == 3);
}

TEST_CASE("call log captures effect order across operations") {
    FakeForge forge;
    CallLog log;
    forge.set_call_log(&log);
    forge.put_file(kRepo, "main", "Bot/config.json", "{}");
    forge.seed_issue(make_issue(1));

    forge.fetch_file(kRepo, "Bot/config.json", "main");
    forge.add_label(kRepo, 1, "TD");
    forge.post_comment(kRepo, 1, "done");

    const auto entries = log.entries();
    REQUIRE(entries.size() == 3);
    CHECK(log.index_of("fetch_file") == 0);
    CHECK(log.index_of("add_label") == 1);
    CHECK(log.index_of("post_comment") == 2);
    CHECK(log.count_of("fetch_file") == 1);
    CHECK(log.index_of("remove_label") == -1);

    log.clear();
    CHECK(log.entries().empty());
}

TEST_CASE("injected failures fire per operation and count down") {
    FakeForge forge;
    forge.seed_issue(make_issue(1));

    forge.inject_failure(ForgeError::Kind::rate_limited, "add_label", "", 2);
    for (int i = 0; i < 2; ++i) {
        try {
            forge.add_label(kRepo, 1, "TD");
            FAIL("expected rate_limited");
        } catch (const ForgeError& e) {
            CHECK(e.kind() == ForgeError::Kind::rate_limited);
            CHECK(e.retryable());
        }
    }
    forge.add_label(kRepo, 1, "TD");  // budget exhausted, call succeeds
    CHECK(forge.issue(kRepo, 1).labels.count("TD") == 1);

    // Op filter: post_comment passes untouched while fetch_file fails.
    forge.put_file(kRepo, "main", "f", "x");
    forge.inject_failure(ForgeError::Kind::network, "fetch_file");
    forge.post_comment(kRepo, 1, "ok");
    CHECK_THROWS_AS(forge.fetch_file(kRepo, "f", "main"), ForgeError);
    CHECK(forge.fetch_file(kRepo, "f", "main") == "x");
}

TEST_CASE("fake forge tolerates concurrent writers") {
    FakeForge forge;
    forge.seed_issue(make_issue(1));
    std::atomic<int> failures{0};

    std::vector<std::thread> workers;
    for (int t = 0; t < 8; ++t) {
        workers.emplace_back([&forge, &failures, t] {
            try {
                for (int i = 0; i < 50; ++i) {
                    forge.add_label(kRepo, 1, "label-" + std::to_string(t));
                    forge.post_comment(kRepo, 1, "c");
                    forge.list_open_issues(kRepo);
                }
            } catch (...) {
                failures.fetch_add(1);
            }
        });
    }
    for (auto& worker : workers) worker.join();

    CHECK(failures.load() == 0);
    CHECK(forge.issue(kRepo, 1).labels.size() == 8);
    CHECK(forge.comments(kRepo, 1).size() == 8 * 50);
}

// ---------------------------------------------------------------------------
// HttpForge against a loopback REST stub.

namespace {

struct StubServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;

    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~StubServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

HttpForgeOptions fast_options(const std::string& base_url) {
    HttpForgeOptions options;
    options.base_url = base_url;
    options.token = "test-token";
    options.base_backoff = std::chrono::milliseconds{1};
    return options;
}

}  // namespace

TEST_CASE("http forge fetches raw file content and maps 404 to absence") {
    StubServer stub;
    stub.server.Get("/repos/acme/widgets/contents/Bot/config.json",
                    [](const httplib::Request& req, httplib::Response& res) {
                        CHECK(req.get_param_value("ref") == "main");
                        CHECK(req.get_header_value("Authorization") == "Bearer test-token");
                        res.set_content("{\"welcome-comment\":false}", "application/json");
                    });
    stub.start();

    HttpForge forge(fast_options(stub.base_url()));
    CHECK(forge.fetch_file(kRepo, "Bot/config.json", "main") == "{\"welcome-comment\":false}");
    CHECK_FALSE(forge.fetch_file(kRepo, "missing.txt", "main").has_value());
}

TEST_CASE("http forge add_label defines the label then applies it") {
    StubServer stub;
    std::vector<std::string> calls;
    std::mutex mu;
    stub.server.Post("/repos/acme/widgets/labels",
                     [&](const httplib::Request& req, httplib::Response& res) {
                         std::lock_guard lock(mu);
                         calls.push_back("define:" + json::parse(req.body)["name"].get<std::string>());
                         res.status = calls.size() == 1 ? 201 : 422;  // second define: exists
                     });
    stub.server.Post("/repos/acme/widgets/issues/5/labels",
                     [&](const httplib::Request& req, httplib::Response& res) {
                         std::lock_guard lock(mu);
                         calls.push_back("apply:" + json::parse(req.body)["labels"][0].get<std::string>());
                         res.status = 200;
                         res.set_content("[]", "application/json");
                     });
    stub.start();

    HttpForge forge(fast_options(stub.base_url()));
    forge.add_label(kRepo, 5, "TD");
    forge.add_label(kRepo, 5, "TD");  // 422 on define is tolerated
    CHECK(calls == std::vector<std::string>{"define:TD", "apply:TD", "define:TD", "apply:TD"});
}

TEST_CASE("http forge remove_label treats 404 as already gone") {
    StubServer stub;
    std::atomic<int> hits{0};
    stub.server.Delete("/repos/acme/widgets/issues/5/labels/TD",
                       [&](const httplib::Request&, httplib::Response& res) {
                           res.status = ++hits == 1 ? 200 : 404;
                           res.set_content("[]", "application/json");
                       });
    stub.start();

    HttpForge forge(fast_options(stub.base_url()));
    forge.remove_label(kRepo, 5, "TD");
    forge.remove_label(kRepo, 5, "TD");  // no throw on 404
    CHECK(hits == 2);
}

TEST_CASE("http forge lists open issues across filters") {
    StubServer stub;
    stub.server.Get("/repos/acme/widgets/issues",
                    [](const httplib::Request& req, httplib::Response& res) {
                        CHECK(req.get_param_value("state") == "open");
                        json issues = json::array();
                        issues.push_back({{"number", 1},
                                          {"title", "real issue"},
                                          {"body", "text"},
                                          {"state", "open"},
                                          {"labels", json::array({{{"name", "TD"}}})},
                                          {"created_at", "2025-01-01T00:00:00Z"},
                                          {"updated_at", "2025-01-02T00:00:00Z"}});
                        issues.push_back({{"number", 2},
                                          {"title", "actually a PR"},
                                          {"body", nullptr},
                                          {"state", "open"},
                                          {"pull_request", {{"url", "x"}}},
                                          {"labels", json::array()},
                                          {"created_at", "2025-01-01T00:00:00Z"},
                                          {"updated_at", "2025-01-01T00:00:00Z"}});
                        res.set_content(issues.dump(), "application/json");
                    });
    stub.start();

    HttpForge forge(fast_options(stub.base_url()));
    const auto issues = forge.list_open_issues(kRepo);
    REQUIRE(issues.size() == 1);  // the pull request entry is skipped
    CHECK(issues[0].number == 1);
    CHECK(issues[0].labels == std::set<std::string>{"TD"});
    CHECK(issues[0].created_at == *parse_timestamp("2025-01-01T00:00:00Z"));
}

TEST_CASE("http forge retries transient failures with backoff") {
    StubServer stub;
    std::atomic<int> hits{0};
    stub.server.Post("/repos/acme/widgets/issues/9/comments",
                     [&](const httplib::Request&, httplib::Response& res) {
                         if (++hits < 3) {
                             res.status = 500;
                         } else {
                             res.status = 201;
                             res.set_content("{}", "application/json");
                         }
                     });
    stub.start();

    HttpForge forge(fast_options(stub.base_url()));
    std::vector<std::chrono::milliseconds> delays;
    forge.set_sleeper([&delays](std::chrono::milliseconds d) { delays.push_back(d); });

    forge.post_comment(kRepo, 9, "hello");
    CHECK(hits == 3);
    REQUIRE(delays.size() == 2);
    CHECK(delays[1] == delays[0] * 2);  // exponential growth
}

TEST_CASE("http forge gives up after the attempt budget") {
    StubServer stub;
    std::atomic<int> hits{0};
    stub.server.Post("/repos/acme/widgets/issues/9/comments",
                     [&](const httplib::Request&, httplib::Response& res) {
                         ++hits;
                         res.status = 503;
                     });
    stub.start();

    HttpForge forge(fast_options(stub.base_url()));
    forge.set_sleeper([](std::chrono::milliseconds) {});
    CHECK_THROWS_AS(forge.post_comment(kRepo, 9, "hello"), ForgeError);
    CHECK(hits == 3);
}

TEST_CASE("http forge does not retry permission errors") {
    StubServer stub;
    std::atomic<int> hits{0};
    stub.server.Post("/repos/acme/widgets/issues/9/comments",
                     [&](const httplib::Request&, httplib::Response& res) {
                         ++hits;
                         res.status = 401;
                     });
    stub.start();

    HttpForge forge(fast_options(stub.base_url()));
    try {
        forge.post_comment(kRepo, 9, "hello");
        FAIL("expected permission_denied");
    } catch (const ForgeError& e) {
        CHECK(e.kind() == ForgeError::Kind::permission_denied);
        CHECK_FALSE(e.retryable());
    }
    CHECK(hits == 1);
}

TEST_CASE("http forge reads 403 rate-limit markers") {
    StubServer stub;
    stub.server.Post("/repos/acme/widgets/issues/9/comments",
                     [&](const httplib::Request&, httplib::Response& res) {
                         res.status = 403;
                         res.set_header("x-ratelimit-remaining", "0");
                     });
    stub.start();

    auto options = fast_options(stub.base_url());
    options.attempts = 1;  // surface the mapped kind without retry noise
    HttpForge forge(options);
    try {
        forge.post_comment(kRepo, 9, "hello");
        FAIL("expected rate_limited");
    } catch (const ForgeError& e) {
        CHECK(e.kind() == ForgeError::Kind::rate_limited);
        CHECK(e.retryable());
    }
}
