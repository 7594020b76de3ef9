#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tagdebt/orchestrator.hpp"
#include "tagdebt/scheduler.hpp"

namespace tagdebt {

struct ServerOptions {
    std::string bind_address = "0.0.0.0";
    int port = 8080;  // 0 picks an ephemeral port (tests)
    std::string webhook_secret;
    std::string bot_login = std::string(kBotLogin);
    /// Repositories the lingering scheduler sweeps.
    std::vector<RepoRef> scheduled_repos;
    int lingering_frequency_hours = 24;
    SmtpSettings smtp;
    std::string link_base = "https://github.com";
};

/// The bot's HTTP face: POST /webhook (signature-gated) and GET /healthz,
/// with the lingering scheduler running alongside.
class BotServer {
public:
    BotServer(Forge& forge, const PluginRegistry& registry, SmtpTransport& transport,
              ServerOptions options);
    ~BotServer();

    BotServer(const BotServer&) = delete;
    BotServer& operator=(const BotServer&) = delete;

    /// Binds and serves on background threads. Throws std::runtime_error when
    /// the secret is missing, the registry is not frozen, or the bind fails.
    void start();
    void stop();

    /// Actual listening port, meaningful after start().
    int port() const;

    Orchestrator& orchestrator();
    LingeringScheduler& scheduler();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace tagdebt
