#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "tagdebt/detection.hpp"
#include "tagdebt/llm_detector.hpp"
#include "tagdebt/rest_detector.hpp"

using namespace tagdebt;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    REQUIRE_MESSAGE(bool(file), "cannot open " << path);
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return buffer.str();
}

Issue issue_with(std::string title, std::string body) {
    Issue issue;
    issue.repo = {"acme", "widgets", "main"};
    issue.number = 1;
    issue.title = std::move(title);
    issue.body = std::move(body);
    return issue;
}

ClassificationInput input_for(std::string text) {
    return ClassificationInput{std::move(text), {"acme", "widgets", "main"}, 1};
}

DetectionSettings settings_with(std::map<std::string, std::string> params,
                                const std::string& type = "heuristic") {
    DetectionSettings settings;
    settings.type = type;
    settings.plugin_params = std::move(params);
    return settings;
}

/// RAII temp file for lexicon/prompt fixtures.
struct TempFile {
    std::string path;

    explicit TempFile(const std::string& contents) {
        static std::atomic<int> counter{0};
        path = "build/tmp_detection_" + std::to_string(counter.fetch_add(1)) + ".txt";
        std::ofstream out(path, std::ios::binary);
        out << contents;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("verdict wire strings are exactly TD and non-TD") {
    CHECK(to_wire(SatdLabel::td) == "TD");
    CHECK(to_wire(SatdLabel::non_td) == "non-TD");
    CHECK(label_from_wire("TD") == SatdLabel::td);
    CHECK(label_from_wire("non-TD") == SatdLabel::non_td);
    for (const char* bogus : {"td", "NON-TD", "TD ", " non-TD", "", "yes", "Non-TD"}) {
        CAPTURE(bogus);
        CHECK_FALSE(label_from_wire(bogus).has_value());
    }
}

TEST_CASE("select_text picks the configured issue part") {
    const Issue issue = issue_with("A title", "A body\nwith lines");
    CHECK(select_text(issue, AnalyzedPart::title) == "A title");
    CHECK(select_text(issue, AnalyzedPart::description) == "A body\nwith lines");
    CHECK(select_text(issue, AnalyzedPart::both) == "A title\n\nA body\nwith lines");

    // An empty body still yields the separator, the title remains analysable.
    CHECK(select_text(issue_with("Only title", ""), AnalyzedPart::both) == "Only title\n\n");
}

// ---------------------------------------------------------------------------
// Plugin registry.

TEST_CASE("registry rejects use before freeze and mutation after") {
    PluginRegistry registry;
    registry.register_plugin("stub", [](const DetectionSettings&) {
        return std::make_unique<HeuristicDetector>();
    });

    try {
        registry.create_detector(settings_with({}, "stub"));
        FAIL("expected not_frozen");
    } catch (const RegistryError& e) {
        CHECK(e.kind() == RegistryError::Kind::not_frozen);
    }

    registry.freeze();
    CHECK(registry.frozen());
    CHECK(registry.create_detector(settings_with({}, "stub")) != nullptr);

    try {
        registry.register_plugin("late", [](const DetectionSettings&) {
            return std::make_unique<HeuristicDetector>();
        });
        FAIL("expected frozen");
    } catch (const RegistryError& e) {
        CHECK(e.kind() == RegistryError::Kind::frozen);
    }
}

TEST_CASE("registry rejects duplicate type ids and unknown types") {
    PluginRegistry registry;
    auto make = [](const DetectionSettings&) -> std::unique_ptr<Detector> {
        return std::make_unique<HeuristicDetector>();
    };
    registry.register_plugin("stub", make);
    try {
        registry.register_plugin("stub", make);
        FAIL("expected duplicate");
    } catch (const RegistryError& e) {
        CHECK(e.kind() == RegistryError::Kind::duplicate);
    }

    registry.freeze();
    try {
        registry.create_detector(settings_with({}, "no-such-plugin"));
        FAIL("expected unknown_type");
    } catch (const RegistryError& e) {
        CHECK(e.kind() == RegistryError::Kind::unknown_type);
        CHECK(std::string(e.what()).find("no-such-plugin") != std::string::npos);
    }
}

TEST_CASE("the built-in registry ships the three detectors, frozen") {
    const PluginRegistry& registry = builtin_registry();
    CHECK(registry.frozen());
    CHECK(registry.registered_types() == std::vector<std::string>{"heuristic", "llm", "rest"});
    // One process-wide instance, not a copy per call.
    CHECK(&registry == &builtin_registry());

    auto detector = registry.create_detector(settings_with({}));
    REQUIRE(detector != nullptr);
    CHECK(detector->classify(input_for("this is a temporary hack")).label == SatdLabel::td);
}

TEST_CASE("detector selection is driven purely by the type string") {
    // Selecting "rest" instantiates the REST client (here failing on its
    // missing endpoint), proving the string picked a different constructor.
    CHECK_THROWS_AS(builtin_registry().create_detector(settings_with({}, "rest")), ConfigError);
    auto heuristic = builtin_registry().create_detector(settings_with({}, "heuristic"));
    CHECK(dynamic_cast<HeuristicDetector*>(heuristic.get()) != nullptr);
}

// ---------------------------------------------------------------------------
// Lexicon handling and the heuristic baseline.

TEST_CASE("lexicon parsing skips comments and blanks, lowercases phrases") {
    const auto phrases = parse_lexicon("# comment\n\nHack\n  quick FIX  \n#another\ntodo");
    CHECK(phrases == std::vector<std::string>{"hack", "quick fix", "todo"});
    CHECK(parse_lexicon("").empty());
    CHECK(parse_lexicon("# only comments\n# here").empty());
}

TEST_CASE("lexicon files round-trip through the parser") {
    TempFile file("# test lexicon\nkludge\nband-aid\n");
    CHECK(load_lexicon_file(file.path) == std::vector<std::string>{"kludge", "band-aid"});
    CHECK_THROWS_AS(load_lexicon_file("build/definitely-missing.txt"), std::runtime_error);
}

TEST_CASE("phrase matching respects word boundaries") {
    const std::vector<std::string> phrases{"hack", "technical debt"};

    CHECK(lexicon_match("this is a hack", phrases));
    CHECK(lexicon_match("hack", phrases));
    CHECK(lexicon_match("a hack.", phrases));
    CHECK(lexicon_match("(hack)", phrases));
    CHECK(lexicon_match("HACK ALERT", phrases));  // case-insensitive
    CHECK(lexicon_match("known technical debt here", phrases));
    CHECK(lexicon_match("Technical Debt", phrases));

    // Embedded occurrences flanked by word characters do not count.
    CHECK_FALSE(lexicon_match("hackathon signup", phrases));
    CHECK_FALSE(lexicon_match("the shack", phrases));
    CHECK_FALSE(lexicon_match("hack_job", phrases));
    CHECK_FALSE(lexicon_match("hack2", phrases));
    CHECK_FALSE(lexicon_match("nontechnical debtors", phrases));
    CHECK_FALSE(lexicon_match("", phrases));

    // A later clean occurrence still matches after an embedded one.
    CHECK(lexicon_match("hackathon plus a real hack", phrases));
}

TEST_CASE("heuristic verdicts derive from the lexicon") {
    HeuristicDetector detector;
    CHECK_FALSE(detector.lexicon().empty());

    const auto td = detector.classify(input_for("TODO: clean this up later"));
    CHECK(td.label == SatdLabel::td);
    CHECK(td.confidence == 0.5);

    const auto clean = detector.classify(input_for("Add a dark theme to the settings page"));
    CHECK(clean.label == SatdLabel::non_td);
    CHECK(clean.confidence == 0.5);

    // Every shipped phrase, used in a sentence, triggers a TD verdict.
    for (const std::string& phrase : detector.lexicon()) {
        CAPTURE(phrase);
        CHECK(detector.classify(input_for("note: " + phrase + " here")).label == SatdLabel::td);
    }
}

TEST_CASE("heuristic honours a custom lexicon file from plugin params") {
    TempFile file("flux capacitor\n");
    auto detector = HeuristicDetector::from_settings(settings_with({{"lexicon-file", file.path}}));
    CHECK(detector->lexicon() == std::vector<std::string>{"flux capacitor"});
    CHECK(detector->classify(input_for("the flux capacitor is fluxing")).label == SatdLabel::td);
    // With a replacement lexicon the built-in phrases no longer apply.
    CHECK(detector->classify(input_for("just a hack")).label == SatdLabel::non_td);

    CHECK_THROWS_AS(
        HeuristicDetector::from_settings(settings_with({{"lexicon-file", "no/such/file.txt"}})),
        std::runtime_error);
}

TEST_CASE("the shipped lexicon asset matches the built-in phrases") {
    CHECK(slurp("assets/satd_lexicon.txt") == builtin_lexicon_text());
    CHECK(parse_lexicon(builtin_lexicon_text()) == HeuristicDetector().lexicon());
}

TEST_CASE("heuristic tolerates concurrent classification") {
    HeuristicDetector detector;
    std::atomic<int> mismatches{0};
    std::vector<std::thread> workers;
    for (int t = 0; t < 4; ++t) {
        workers.emplace_back([&detector, &mismatches] {
            for (int i = 0; i < 200; ++i) {
                if (detector.classify(input_for("a temporary fix")).label != SatdLabel::td) {
                    mismatches.fetch_add(1);
                }
            }
        });
    }
    for (auto& worker : workers) worker.join();
    CHECK(mismatches.load() == 0);
}

// ---------------------------------------------------------------------------
// The labelled corpus fixture and metric computation.

TEST_CASE("the labelled fixture is classified perfectly by the heuristic") {
    const auto corpus = load_corpus_file("assets/heuristic_fixture.tsv");
    REQUIRE(corpus.size() == 20);

    // Both classes are represented, and the obsolete-code admission that
    // keyword-free detectors historically miss is present and marked TD.
    int td_count = 0;
    bool found_obsolete = false;
    for (const auto& item : corpus) {
        if (item.gold == SatdLabel::td) ++td_count;
        if (item.text == "TODO: I believe the following code is obsolete") {
            found_obsolete = true;
            CHECK(item.gold == SatdLabel::td);
        }
    }
    CHECK(td_count == 10);
    CHECK(found_obsolete);

    HeuristicDetector detector;
    for (const auto& item : corpus) {
        CAPTURE(item.text);
        CHECK(detector.classify(input_for(item.text)).label == item.gold);
    }
    const auto metrics = evaluate_detector(detector, corpus);
    CHECK(metrics.precision == 1.0);
    CHECK(metrics.recall == 1.0);
    CHECK(metrics.f1 == 1.0);
}

TEST_CASE("corpus loader rejects malformed rows") {
    TempFile good("# header\nTD\tneeds a refactor\nnon-TD\tall fine\n");
    const auto corpus = load_corpus_file(good.path);
    REQUIRE(corpus.size() == 2);
    CHECK(corpus[0].gold == SatdLabel::td);
    CHECK(corpus[0].text == "needs a refactor");
    CHECK(corpus[1].gold == SatdLabel::non_td);

    TempFile bad_label("maybe\tsomething\n");
    CHECK_THROWS_AS(load_corpus_file(bad_label.path), std::runtime_error);
    TempFile no_tab("TD only text\n");
    CHECK_THROWS_AS(load_corpus_file(no_tab.path), std::runtime_error);
    CHECK_THROWS_AS(load_corpus_file("build/definitely-missing.tsv"), std::runtime_error);
}

namespace {

/// Answers from a fixed text -> label table; the mirror of a perfect model.
class TableDetector : public Detector {
public:
    explicit TableDetector(std::map<std::string, SatdLabel> table) : table_(std::move(table)) {}

    Classification classify(const ClassificationInput& input) override {
        return Classification{table_.at(input.text), std::nullopt};
    }

private:
    std::map<std::string, SatdLabel> table_;
};

}  // namespace

TEST_CASE("metrics match a worked example counted by hand") {
    // Four items: one true positive, one false negative, one false positive,
    // one true negative. Counting by hand: precision = 1/(1+1) = 0.5,
    // recall = 1/(1+1) = 0.5, F1 = 2*0.25/1.0 = 0.5.
    const std::vector<CorpusItem> corpus{
        {"admitted shortcut", SatdLabel::td},
        {"missed admission", SatdLabel::td},
        {"false alarm", SatdLabel::non_td},
        {"clean feature request", SatdLabel::non_td},
    };
    TableDetector detector({{"admitted shortcut", SatdLabel::td},
                            {"missed admission", SatdLabel::non_td},
                            {"false alarm", SatdLabel::td},
                            {"clean feature request", SatdLabel::non_td}});

    const auto metrics = evaluate_detector(detector, corpus);
    CHECK(metrics.precision == 0.5);
    CHECK(metrics.recall == 0.5);
    CHECK(metrics.f1 == 0.5);
}

TEST_CASE("a detector that copies the gold labels scores perfectly") {
    const std::vector<CorpusItem> corpus{
        {"a", SatdLabel::td}, {"b", SatdLabel::non_td}, {"c", SatdLabel::td}};
    TableDetector copier(
        {{"a", SatdLabel::td}, {"b", SatdLabel::non_td}, {"c", SatdLabel::td}});
    const auto metrics = evaluate_detector(copier, corpus);
    CHECK(metrics.precision == 1.0);
    CHECK(metrics.recall == 1.0);
    CHECK(metrics.f1 == 1.0);
}

TEST_CASE("empty denominators score zero instead of dividing by zero") {
    // Detector never fires on an all-TD corpus: no predicted positives.
    TableDetector never({{"x", SatdLabel::non_td}, {"y", SatdLabel::non_td}});
    const auto m1 =
        evaluate_detector(never, {{"x", SatdLabel::td}, {"y", SatdLabel::td}});
    CHECK(m1.precision == 0.0);
    CHECK(m1.recall == 0.0);
    CHECK(m1.f1 == 0.0);

    // Detector always fires on an all-clean corpus: no gold positives.
    TableDetector always({{"x", SatdLabel::td}, {"y", SatdLabel::td}});
    const auto m2 =
        evaluate_detector(always, {{"x", SatdLabel::non_td}, {"y", SatdLabel::non_td}});
    CHECK(m2.precision == 0.0);
    CHECK(m2.recall == 0.0);
    CHECK(m2.f1 == 0.0);

    HeuristicDetector heuristic;
    const auto m3 = evaluate_detector(heuristic, {});
    CHECK(m3.precision == 0.0);
    CHECK(m3.recall == 0.0);
    CHECK(m3.f1 == 0.0);
}

// ---------------------------------------------------------------------------
// REST classifier plugin.

TEST_CASE("classifier responses are parsed strictly") {
    const auto td = parse_classifier_response(R"({"label":"TD"})");
    CHECK(td.label == SatdLabel::td);
    CHECK_FALSE(td.confidence.has_value());

    const auto scored = parse_classifier_response(R"({"label":"non-TD","confidence":0.87})");
    CHECK(scored.label == SatdLabel::non_td);
    CHECK(scored.confidence == 0.87);

    // Confidence bounds are inclusive.
    CHECK(parse_classifier_response(R"({"label":"TD","confidence":0})").confidence == 0.0);
    CHECK(parse_classifier_response(R"({"label":"TD","confidence":1})").confidence == 1.0);

    for (const char* bad : {
             "not json",
             "[]",
             "{}",
             R"({"label":1})",
             R"({"label":"maybe"})",
             R"({"label":"td"})",
             R"({"label":"TD","confidence":"high"})",
             R"({"label":"TD","confidence":-0.1})",
             R"({"label":"TD","confidence":1.5})",
         }) {
        CAPTURE(bad);
        try {
            parse_classifier_response(bad);
            FAIL_CHECK("expected bad_response for ", bad);
        } catch (const DetectorError& e) {
            CHECK(e.kind() == DetectorError::Kind::bad_response);
        }
    }
}

TEST_CASE("rest plugin validates its parameters up front") {
    CHECK_THROWS_AS(RestDetector(settings_with({}, "rest")), ConfigError);
    CHECK_THROWS_AS(RestDetector(settings_with({{"endpoint", ""}}, "rest")), ConfigError);
    CHECK_THROWS_AS(RestDetector(settings_with({{"endpoint", "not-a-url"}}, "rest")),
                    ConfigError);
    CHECK_THROWS_AS(RestDetector(settings_with({{"endpoint", "http://h/c"},
                                                {"timeout-seconds", "soon"}},
                                               "rest")),
                    ConfigError);

    try {
        RestDetector(settings_with({}, "rest"));
    } catch (const ConfigError& e) {
        CHECK(e.path() == "detection.plugin-params.endpoint");
    }
}

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

    std::string url(const std::string& path) const {
        return "http://127.0.0.1:" + std::to_string(port) + path;
    }
};

}  // namespace

TEST_CASE("rest plugin posts the text and reads the verdict") {
    StubServer stub;
    stub.server.Post("/classify", [](const httplib::Request& req, httplib::Response& res) {
        CHECK(req.get_header_value("Content-Type") == "application/json");
        const json body = json::parse(req.body);
        CHECK(body["text"] == "TODO fix this");
        res.set_content(R"({"label":"TD","confidence":0.93})", "application/json");
    });
    stub.start();

    RestDetector detector(settings_with({{"endpoint", stub.url("/classify")}}, "rest"));
    const auto result = detector.classify(input_for("TODO fix this"));
    CHECK(result.label == SatdLabel::td);
    CHECK(result.confidence == 0.93);
}

TEST_CASE("rest plugin surfaces HTTP failures as bad responses") {
    StubServer stub;
    stub.server.Post("/classify", [](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
    });
    stub.start();

    RestDetector detector(settings_with({{"endpoint", stub.url("/classify")}}, "rest"));
    try {
        detector.classify(input_for("x"));
        FAIL("expected bad_response");
    } catch (const DetectorError& e) {
        CHECK(e.kind() == DetectorError::Kind::bad_response);
    }
}

TEST_CASE("rest plugin reports unreachable services as network errors") {
    // Nothing listens on this port; connection is refused immediately.
    RestDetector detector(
        settings_with({{"endpoint", "http://127.0.0.1:1/classify"}}, "rest"));
    try {
        detector.classify(input_for("x"));
        FAIL("expected network error");
    } catch (const DetectorError& e) {
        CHECK(e.kind() == DetectorError::Kind::network);
    }
}

TEST_CASE("rest plugin retries one timeout before giving up") {
    StubServer stub;
    std::atomic<int> hits{0};
    stub.server.Post("/classify", [&](const httplib::Request&, httplib::Response& res) {
        if (hits.fetch_add(1) == 0) {
            // First call stalls past the client's 1s read timeout.
            std::this_thread::sleep_for(std::chrono::milliseconds(1400));
        }
        res.set_content(R"({"label":"non-TD"})", "application/json");
    });
    stub.start();

    RestDetector detector(settings_with(
        {{"endpoint", stub.url("/classify")}, {"timeout-seconds", "1"}}, "rest"));
    const auto result = detector.classify(input_for("x"));
    CHECK(result.label == SatdLabel::non_td);
    CHECK(hits.load() == 2);
}

// ---------------------------------------------------------------------------
// LLM plugin.

namespace {

DetectionSettings llm_settings(std::map<std::string, std::string> params) {
    return settings_with(std::move(params), "llm");
}

LlmDetector::EnvReader fixed_key(const std::string& value) {
    return [value](const std::string&) -> std::optional<std::string> { return value; };
}

LlmDetector::EnvReader no_keys() {
    return [](const std::string&) -> std::optional<std::string> { return std::nullopt; };
}

}  // namespace

TEST_CASE("llm plugin validates provider and model") {
    CHECK_THROWS_AS(LlmDetector(llm_settings({{"model", "m"}})), ConfigError);
    CHECK_THROWS_AS(LlmDetector(llm_settings({{"provider", "cloudbrain"}, {"model", "m"}})),
                    ConfigError);
    CHECK_THROWS_AS(LlmDetector(llm_settings({{"provider", "openai"}})), ConfigError);
    CHECK_THROWS_AS(LlmDetector(llm_settings({{"provider", "openai"}, {"model", ""}})),
                    ConfigError);
    CHECK_THROWS_AS(LlmDetector(llm_settings({{"provider", "openai"},
                                              {"model", "m"},
                                              {"timeout-seconds", "a while"}})),
                    ConfigError);
    CHECK_THROWS_AS(LlmDetector(llm_settings({{"provider", "openai"},
                                              {"model", "m"},
                                              {"prompt-file", "missing.txt"}})),
                    ConfigError);

    const LlmDetector ok(llm_settings({{"provider", "gemini"}, {"model", "gem-1"}}));
    CHECK(ok.provider() == "gemini");
    CHECK(ok.model() == "gem-1");
    CHECK(ok.prompt() == LlmDetector::default_prompt());
}

TEST_CASE("the shipped prompt asset matches the built-in prompt") {
    CHECK(slurp("assets/llm_prompt.txt") == LlmDetector::default_prompt());
    // The prompt pins the exact reply vocabulary the parser expects.
    CHECK(LlmDetector::default_prompt().find("TD\nnon-TD") != std::string_view::npos);
}

TEST_CASE("a custom prompt file replaces the default prompt") {
    TempFile prompt("Answer TD or non-TD.\n");
    LlmDetector detector(llm_settings(
        {{"provider", "openai"}, {"model", "m"}, {"prompt-file", prompt.path}}));
    CHECK(detector.prompt() == "Answer TD or non-TD.\n");
}

TEST_CASE("a missing API key fails before any network traffic") {
    StubServer stub;
    std::atomic<int> hits{0};
    stub.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.set_content("{}", "application/json");
    });
    stub.start();

    LlmDetector detector(
        llm_settings({{"provider", "openai"}, {"model", "m"}, {"endpoint", stub.url("")}}),
        no_keys());
    try {
        detector.classify(input_for("x"));
        FAIL("expected auth error");
    } catch (const DetectorError& e) {
        CHECK(e.kind() == DetectorError::Kind::auth);
        CHECK(std::string(e.what()).find("OPENAI_API_KEY") != std::string::npos);
    }
    CHECK(hits.load() == 0);
}

TEST_CASE("openai requests carry the bearer token and chat payload") {
    StubServer stub;
    stub.server.Post("/v1/chat/completions", [](const httplib::Request& req,
                                                httplib::Response& res) {
        CHECK(req.get_header_value("Authorization") == "Bearer key-123");
        const json body = json::parse(req.body);
        CHECK(body["model"] == "gpt-test");
        const std::string content = body["messages"][0]["content"];
        CHECK(content.find("self-admitted technical debt") != std::string::npos);
        CHECK(content.find("the cache is a hack") != std::string::npos);
        res.set_content(R"({"choices":[{"message":{"content":"TD"}}]})", "application/json");
    });
    stub.start();

    LlmDetector detector(llm_settings({{"provider", "openai"},
                                       {"model", "gpt-test"},
                                       {"endpoint", stub.url("")}}),
                         fixed_key("key-123"));
    CHECK(detector.classify(input_for("the cache is a hack")).label == SatdLabel::td);
}

TEST_CASE("anthropic requests use the x-api-key header and messages shape") {
    StubServer stub;
    stub.server.Post("/v1/messages", [](const httplib::Request& req, httplib::Response& res) {
        CHECK(req.get_header_value("x-api-key") == "key-456");
        CHECK(req.get_header_value("anthropic-version") == "2023-06-01");
        const json body = json::parse(req.body);
        CHECK(body["model"] == "claude-test");
        CHECK(body["messages"][0]["role"] == "user");
        // Whitespace around the model's reply is tolerated.
        res.set_content(R"({"content":[{"type":"text","text":" non-TD\n"}]})",
                        "application/json");
    });
    stub.start();

    LlmDetector detector(llm_settings({{"provider", "anthropic"},
                                       {"model", "claude-test"},
                                       {"endpoint", stub.url("")}}),
                         fixed_key("key-456"));
    CHECK(detector.classify(input_for("plain feature request")).label == SatdLabel::non_td);
}

TEST_CASE("gemini requests embed the model in the path") {
    StubServer stub;
    stub.server.Post("/v1beta/models/gem-test:generateContent",
                     [](const httplib::Request& req, httplib::Response& res) {
                         CHECK(req.get_header_value("x-goog-api-key") == "key-789");
                         const json body = json::parse(req.body);
                         CHECK(body["contents"][0]["parts"][0].contains("text"));
                         res.set_content(
                             R"({"candidates":[{"content":{"parts":[{"text":"TD"}]}}]})",
                             "application/json");
                     });
    stub.start();

    LlmDetector detector(llm_settings({{"provider", "gemini"},
                                       {"model", "gem-test"},
                                       {"endpoint", stub.url("")}}),
                         fixed_key("key-789"));
    CHECK(detector.classify(input_for("x")).label == SatdLabel::td);
}

TEST_CASE("free-text model replies are rejected, not reinterpreted") {
    StubServer stub;
    stub.server.Post("/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(
            R"({"choices":[{"message":{"content":"I think this is TD because..."}}]})",
            "application/json");
    });
    stub.start();

    LlmDetector detector(llm_settings({{"provider", "openai"},
                                       {"model", "m"},
                                       {"endpoint", stub.url("")}}),
                         fixed_key("k"));
    try {
        detector.classify(input_for("x"));
        FAIL("expected bad_response");
    } catch (const DetectorError& e) {
        CHECK(e.kind() == DetectorError::Kind::bad_response);
    }
}

TEST_CASE("provider-side auth failures map to auth errors") {
    StubServer stub;
    stub.server.Post("/v1/messages", [](const httplib::Request&, httplib::Response& res) {
        res.status = 401;
    });
    stub.start();

    LlmDetector detector(llm_settings({{"provider", "anthropic"},
                                       {"model", "m"},
                                       {"endpoint", stub.url("")}}),
                         fixed_key("bad-key"));
    try {
        detector.classify(input_for("x"));
        FAIL("expected auth error");
    } catch (const DetectorError& e) {
        CHECK(e.kind() == DetectorError::Kind::auth);
    }
}

TEST_CASE("malformed provider envelopes are bad responses") {
    StubServer stub;
    stub.server.Post("/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"choices":[]})", "application/json");
    });
    stub.start();

    LlmDetector detector(llm_settings({{"provider", "openai"},
                                       {"model", "m"},
                                       {"endpoint", stub.url("")}}),
                         fixed_key("k"));
    CHECK_THROWS_AS(detector.classify(input_for("x")), DetectorError);
}
