#include "tagdebt/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <csignal>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <ostream>
#include <sstream>
#include <thread>

#include "tagdebt/config.hpp"
#include "tagdebt/detection.hpp"
#include "tagdebt/fake_forge.hpp"
#include "tagdebt/http_forge.hpp"
#include "tagdebt/orchestrator.hpp"
#include "tagdebt/server.hpp"
#include "tagdebt/smtp.hpp"
#include "tagdebt/time_util.hpp"
#include "tagdebt/webhook.hpp"

namespace tagdebt {

namespace {

using nlohmann::json;

volatile std::sig_atomic_t g_interrupted = 0;

void on_signal(int) { g_interrupted = 1; }

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) return std::nullopt;
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return buffer.str();
}

/// Reads one issue from the export format: {number, title, body, created_at,
/// updated_at, state, labels}. Labels may be plain strings or {name: ...}.
Issue issue_from_export(const json& entry) {
    if (!entry.is_object()) throw std::runtime_error("issue entry is not an object");
    Issue issue;
    issue.number = entry.at("number").get<int>();
    issue.title = entry.at("title").get<std::string>();
    if (entry.contains("body") && entry["body"].is_string()) {
        issue.body = entry["body"].get<std::string>();
    }
    for (const auto& label : entry.value("labels", json::array())) {
        if (label.is_string()) {
            issue.labels.insert(label.get<std::string>());
        } else if (label.is_object() && label.contains("name")) {
            issue.labels.insert(label.at("name").get<std::string>());
        }
    }
    issue.state = issue_state_from_string(entry.value("state", "open")).value_or(IssueState::open);
    if (entry.contains("created_at")) {
        auto created = parse_timestamp(entry.at("created_at").get<std::string>());
        if (!created) throw std::runtime_error("bad created_at on issue " +
                                               std::to_string(issue.number));
        issue.created_at = *created;
    }
    if (entry.contains("updated_at")) {
        auto updated = parse_timestamp(entry.at("updated_at").get<std::string>());
        if (!updated) throw std::runtime_error("bad updated_at on issue " +
                                               std::to_string(issue.number));
        issue.updated_at = *updated;
    }
    return issue;
}

int do_validate_config(const std::string& path, std::ostream& out, std::ostream& err) {
    const auto raw = read_file(path);
    if (!raw) {
        err << "cannot read " << path << "\n";
        return 1;
    }
    try {
        const BotConfig config = parse_config(*raw);
        out << serialize_config(config);
        return 0;
    } catch (const ConfigError& e) {
        err << "invalid config: " << to_string(e.kind());
        if (!e.path().empty()) err << " at " << e.path();
        err << ": " << e.detail() << "\n";
        return 1;
    }
}

int do_classify(const std::string& issues_path, const std::string& config_path, std::ostream& out,
                std::ostream& err) {
    BotConfig config;
    if (!config_path.empty()) {
        const auto raw = read_file(config_path);
        if (!raw) {
            err << "cannot read " << config_path << "\n";
            return 1;
        }
        try {
            config = parse_config(*raw);
        } catch (const ConfigError& e) {
            err << "invalid config: " << e.what() << "\n";
            return 1;
        }
    }

    const auto raw = read_file(issues_path);
    if (!raw) {
        err << "cannot read " << issues_path << "\n";
        return 1;
    }
    json parsed;
    try {
        parsed = json::parse(*raw);
    } catch (const json::parse_error& e) {
        err << issues_path << " is not valid JSON: " << e.what() << "\n";
        return 1;
    }
    if (!parsed.is_array()) {
        err << issues_path << " must hold a JSON array of issues\n";
        return 1;
    }

    try {
        const auto detector = builtin_registry().create_detector(config.detection);
        for (const auto& entry : parsed) {
            const Issue issue = issue_from_export(entry);
            const std::string text = select_text(issue, config.detection.analyzed_part);
            const Classification verdict =
                detector->classify(ClassificationInput{text, issue.repo, issue.number});
            out << issue.number << "\t" << to_wire(verdict.label) << "\n";
        }
    } catch (const std::exception& e) {
        err << "classification failed: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int do_simulate(const std::string& scenario_path, std::ostream& out, std::ostream& err) {
    const auto raw = read_file(scenario_path);
    if (!raw) {
        err << "cannot read " << scenario_path << "\n";
        return 1;
    }
    json scenario;
    try {
        scenario = json::parse(*raw);
    } catch (const json::parse_error& e) {
        err << scenario_path << " is not valid JSON: " << e.what() << "\n";
        return 1;
    }
    if (!scenario.is_array()) {
        err << scenario_path << " must hold a JSON array of scenario entries\n";
        return 1;
    }

    FakeForge forge;
    auto current = std::make_shared<Timestamp>();
    forge.set_clock([current] { return *current; });
    RecordingSmtpTransport transport;

    Orchestrator::Options orch_options;
    orch_options.smtp.host = "smtp.simulated.local";  // mail lands in the recording double
    orch_options.smtp.username = "tagdebt@simulated.local";
    orch_options.now = [current] { return *current; };
    Orchestrator orchestrator(forge, builtin_registry(), transport, orch_options);

    int index = 0;
    for (const auto& entry : scenario) {
        ++index;
        const std::string tag = "[" + std::to_string(index) + "] ";
        if (!entry.is_object() || !entry.contains("at")) {
            out << tag << "skipped: entry needs an \"at\" timestamp\n";
            continue;
        }
        const auto at = parse_timestamp(entry.at("at").get<std::string>());
        if (!at) {
            out << tag << "skipped: unparsable \"at\" timestamp\n";
            continue;
        }
        *current = *at;

        // Convenience beyond plain events: {"at", "repo", "config"} entries
        // update Bot/config.json mid-scenario.
        if (entry.contains("config")) {
            const auto repo = parse_repo_full_name(entry.value("repo", ""));
            if (!repo) {
                out << tag << "skipped: config entry needs a \"repo\" (owner/name)\n";
                continue;
            }
            forge.put_file(*repo, repo->default_branch, std::string(kConfigFilePath),
                           entry.at("config").dump());
            out << tag << "config updated for " << repo->full_name() << "\n";
            continue;
        }

        if (!entry.contains("event") || !entry.at("event").is_object()) {
            out << tag << "skipped: entry needs an \"event\" payload object\n";
            continue;
        }
        const json& payload = entry.at("event");
        WebhookEnvelope envelope;
        envelope.payload = payload.dump();
        envelope.delivery_id = "sim-" + std::to_string(index);
        envelope.event_name = payload.contains("comment")  ? "issue_comment"
                              : payload.contains("issue") ? "issues"
                                                          : "unknown";

        Event event;
        try {
            event = parse_event(envelope);
        } catch (const GatewayError& e) {
            out << tag << envelope.event_name << " rejected: " << e.what() << "\n";
            continue;
        }

        std::string where = event.repo.owner.empty() ? "?" : event.repo.full_name();
        if (event.issue) {
            // The payload carries the issue's current state; mirror it into
            // the fake forge so handler effects have something to land on.
            forge.seed_issue(*event.issue);
            where += "#" + std::to_string(event.issue->number);
        } else if (!event.repo.owner.empty()) {
            forge.add_repo(event.repo);
        }

        const HandlerOutcome outcome = orchestrator.dispatch(event);
        out << tag << envelope.event_name << " " << where << " ->";
        for (const auto& action : outcome.actions) {
            out << " " << to_string(action);
        }
        out << "\n";
    }
    out << "emails recorded: " << transport.messages_sent() << "\n";
    return 0;
}

int do_serve(const std::string& bind, int port, bool fake, const std::string& forge_base,
             const std::vector<std::string>& repo_names, int frequency_hours,
             const std::string& link_base, std::ostream& out, std::ostream& err) {
    const char* secret = std::getenv("WEBHOOK_SECRET");
    if (secret == nullptr || *secret == '\0') {
        err << "WEBHOOK_SECRET must be set to serve webhooks\n";
        return 1;
    }

    ServerOptions options;
    options.bind_address = bind;
    options.port = port;
    options.webhook_secret = secret;
    options.lingering_frequency_hours = frequency_hours;
    options.smtp = load_smtp_settings();
    options.link_base = link_base;
    for (const auto& name : repo_names) {
        const auto repo = parse_repo_full_name(name);
        if (!repo) {
            err << "--repo expects owner/name, got \"" << name << "\"\n";
            return 1;
        }
        options.scheduled_repos.push_back(*repo);
    }

    std::unique_ptr<Forge> forge;
    if (fake) {
        auto demo = std::make_unique<FakeForge>();
        const RepoRef repo{"demo", "project", "main"};
        demo->add_repo(repo);
        Issue seeded;
        seeded.repo = repo;
        seeded.number = 1;
        seeded.title = "Cache layer needs a rewrite";
        seeded.body = "The current cache is a temporary hack; we should replace it.";
        seeded.created_at = system_now();
        seeded.updated_at = seeded.created_at;
        demo->seed_issue(seeded);
        forge = std::move(demo);
        out << "demo mode: in-memory forge with demo/project#1 seeded\n";
    } else {
        HttpForgeOptions forge_options;
        forge_options.base_url = forge_base;
        forge_options.token = forge_token_from_env();
        if (forge_options.token.empty()) {
            err << "warning: no FORGE_TOKEN/GITHUB_TOKEN set; forge writes will fail\n";
        }
        forge = std::make_unique<HttpForge>(std::move(forge_options));
    }

    SocketSmtpTransport transport;
    BotServer server(*forge, builtin_registry(), transport, std::move(options));
    try {
        server.start();
    } catch (const std::exception& e) {
        err << "startup failed: " << e.what() << "\n";
        return 1;
    }
    out << "listening on " << bind << ":" << server.port() << " (Ctrl-C to stop)\n";
    out.flush();

    g_interrupted = 0;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (g_interrupted == 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(200));
    }
    out << "shutting down\n";
    server.stop();
    return 0;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"TagDebt: a bot that labels self-admitted technical debt in issues"};
    app.require_subcommand(1);

    std::string bind = "0.0.0.0";
    int port = 8080;
    bool fake = false;
    std::string forge_base = "https://api.github.com";
    std::vector<std::string> repo_names;
    int frequency_hours = 24;
    std::string link_base = "https://github.com";
    auto* serve = app.add_subcommand("serve", "Run the webhook server");
    serve->add_option("--bind", bind, "Address to listen on");
    serve->add_option("--port", port, "Port to listen on");
    serve->add_flag("--fake-forge", fake, "Use an in-memory forge (demo mode)");
    serve->add_option("--forge-base-url", forge_base, "Forge REST API base URL");
    serve->add_option("--repo", repo_names,
                      "owner/name swept by the lingering scanner (repeatable)");
    serve->add_option("--lingering-frequency-hours", frequency_hours,
                      "How often the lingering scanner ticks");
    serve->add_option("--link-base", link_base, "Base URL for issue links in emails");

    std::string config_path;
    auto* validate = app.add_subcommand("validate-config", "Check a config file");
    validate->add_option("file", config_path, "Path to a Bot/config.json candidate")->required();

    std::string issues_path;
    std::string classify_config;
    auto* classify = app.add_subcommand("classify", "Label an exported issue list offline");
    classify->add_option("file", issues_path, "Path to an issues.json export")->required();
    classify->add_option("--config", classify_config, "Config file selecting the detector");

    std::string scenario_path;
    auto* simulate = app.add_subcommand("simulate", "Replay a scripted event sequence");
    simulate->add_option("file", scenario_path, "Path to a scenario.json script")->required();

    app.add_subcommand("print-default-config", "Emit the built-in default configuration");

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("tagdebt");
    for (const auto& arg : args) argv.push_back(arg.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n\n" << app.help();
        return 2;
    }

    if (serve->parsed()) {
        return do_serve(bind, port, fake, forge_base, repo_names, frequency_hours, link_base, out,
                        err);
    }
    if (validate->parsed()) {
        return do_validate_config(config_path, out, err);
    }
    if (classify->parsed()) {
        return do_classify(issues_path, classify_config, out, err);
    }
    if (simulate->parsed()) {
        return do_simulate(scenario_path, out, err);
    }
    out << serialize_config(default_config());
    return 0;
}

}  // namespace tagdebt
