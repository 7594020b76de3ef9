#include "tagdebt/server.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <thread>

namespace tagdebt {

struct BotServer::Impl {
    ServerOptions options;
    const PluginRegistry& registry;
    Orchestrator orchestrator;
    LingeringScheduler scheduler;
    httplib::Server http;
    std::thread serve_thread;
    std::thread scheduler_thread;
    int actual_port = 0;
    bool running = false;

    Impl(Forge& forge, const PluginRegistry& registry, SmtpTransport& transport,
         ServerOptions opts)
        : options(std::move(opts)), registry(registry),
          orchestrator(forge, registry, transport,
                       Orchestrator::Options{options.link_base, options.smtp,
                                             std::chrono::seconds{3600},
                                             [] { return system_now(); }}),
          scheduler(forge, transport, [this] { return options.scheduled_repos; },
                    LingeringScheduler::Options{options.lingering_frequency_hours, options.smtp,
                                                options.link_base}) {
        http.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("ok", "text/plain");
        });

        http.Post("/webhook", [this](const httplib::Request& req, httplib::Response& res) {
            handle_webhook(req, res);
        });
    }

    void handle_webhook(const httplib::Request& req, httplib::Response& res) {
        WebhookEnvelope envelope;
        envelope.event_name = req.get_header_value("X-GitHub-Event");
        envelope.delivery_id = req.get_header_value("X-GitHub-Delivery");
        envelope.signature = req.get_header_value("X-Hub-Signature-256");
        envelope.payload = req.body;

        if (!verify_signature(envelope.payload, envelope.signature, options.webhook_secret)) {
            spdlog::warn("rejected webhook delivery {}: bad signature", envelope.delivery_id);
            res.status = 401;
            res.set_content("invalid signature", "text/plain");
            return;
        }

        Event event;
        try {
            event = parse_event(envelope, options.bot_login);
        } catch (const GatewayError& e) {
            spdlog::warn("rejected webhook delivery {}: {}", envelope.delivery_id, e.what());
            res.status = 400;
            res.set_content(e.what(), "text/plain");
            return;
        }

        if (event.variant == EventVariant::ignored) {
            res.status = 200;
            res.set_content("ignored", "text/plain");
            return;
        }

        // The HTTP layer's thread pool already runs distinct deliveries
        // concurrently, so handling inline keeps 202 truthful: by the time
        // the response leaves, the effects are on the forge.
        const HandlerOutcome outcome = orchestrator.dispatch(event);
        std::string summary;
        for (const auto& action : outcome.actions) {
            if (!summary.empty()) summary += ",";
            summary += to_string(action);
        }
        spdlog::info("delivery {} ({}): {}", envelope.delivery_id, envelope.event_name, summary);
        res.status = 202;
        res.set_content("accepted: " + summary, "text/plain");
    }
};

BotServer::BotServer(Forge& forge, const PluginRegistry& registry, SmtpTransport& transport,
                     ServerOptions options)
    : impl_(std::make_unique<Impl>(forge, registry, transport, std::move(options))) {}

BotServer::~BotServer() {
    stop();
}

void BotServer::start() {
    if (impl_->options.webhook_secret.empty()) {
        throw std::runtime_error("refusing to start without a webhook secret (set WEBHOOK_SECRET)");
    }
    if (!impl_->registry.frozen()) {
        throw std::runtime_error("plugin registry must be frozen before serving");
    }

    if (impl_->options.port == 0) {
        impl_->actual_port = impl_->http.bind_to_any_port(impl_->options.bind_address);
        if (impl_->actual_port <= 0) {
            throw std::runtime_error("could not bind to an ephemeral port on " +
                                     impl_->options.bind_address);
        }
    } else {
        if (!impl_->http.bind_to_port(impl_->options.bind_address, impl_->options.port)) {
            throw std::runtime_error("could not bind to " + impl_->options.bind_address + ":" +
                                     std::to_string(impl_->options.port));
        }
        impl_->actual_port = impl_->options.port;
    }

    impl_->serve_thread = std::thread([this] { impl_->http.listen_after_bind(); });
    impl_->http.wait_until_ready();
    impl_->scheduler_thread = std::thread([this] { impl_->scheduler.run(); });
    impl_->running = true;
    spdlog::info("listening on {}:{}", impl_->options.bind_address, impl_->actual_port);
}

void BotServer::stop() {
    if (!impl_->running) return;
    impl_->running = false;
    impl_->scheduler.stop();
    impl_->http.stop();
    if (impl_->serve_thread.joinable()) impl_->serve_thread.join();
    if (impl_->scheduler_thread.joinable()) impl_->scheduler_thread.join();
}

int BotServer::port() const { return impl_->actual_port; }

Orchestrator& BotServer::orchestrator() { return impl_->orchestrator; }

LingeringScheduler& BotServer::scheduler() { return impl_->scheduler; }

}  // namespace tagdebt
