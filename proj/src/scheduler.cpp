#include "tagdebt/scheduler.hpp"

#include <spdlog/spdlog.h>

#include "tagdebt/config.hpp"
#include "tagdebt/notifier.hpp"

namespace tagdebt {

LingeringScheduler::LingeringScheduler(Forge& forge, SmtpTransport& transport, RepoSource repos,
                                       Options options)
    : forge_(forge), transport_(transport), repos_(std::move(repos)),
      options_(std::move(options)) {
    if (options_.frequency_hours < 1) options_.frequency_hours = 1;
}

void LingeringScheduler::start(Timestamp now) {
    std::lock_guard lock(mu_);
    started_ = true;
    epoch_ = now;
}

int LingeringScheduler::poll(Timestamp now) {
    long due = 0;
    {
        std::lock_guard lock(mu_);
        if (!started_) {
            started_ = true;
            epoch_ = now;
        }
        const auto elapsed = now - epoch_;
        const auto period = std::chrono::hours(options_.frequency_hours);
        due = elapsed.count() > 0 ? elapsed / period : 0;
    }
    int executed = 0;
    while (true) {
        {
            std::lock_guard lock(mu_);
            if (ticks_ >= due) break;
            ++ticks_;
        }
        run_tick(now);
        ++executed;
    }
    return executed;
}

long LingeringScheduler::ticks_executed() const {
    std::lock_guard lock(mu_);
    return ticks_;
}

std::vector<LingeringReport> LingeringScheduler::last_reports() const {
    std::lock_guard lock(mu_);
    return last_reports_;
}

void LingeringScheduler::run_tick(Timestamp now) {
    std::vector<RepoRef> repos = repos_ ? repos_() : std::vector<RepoRef>{};
    std::vector<LingeringReport> reports;
    for (const auto& repo : repos) {
        try {
            const BotConfig config = resolve_config(forge_, repo);
            LingeringReport report = scan_repo(forge_, repo, config, now, options_.link_base);
            if (auto email = prepare_lingering_email(report, config.email)) {
                send_email(*email, options_.smtp, transport_);
            }
            reports.push_back(std::move(report));
        } catch (const std::exception& e) {
            // One broken repo must not stop the sweep.
            spdlog::error("lingering scan failed for {}: {}", repo.full_name(), e.what());
        }
    }
    std::lock_guard lock(mu_);
    last_reports_ = std::move(reports);
}

void LingeringScheduler::run() {
    std::unique_lock lock(mu_);
    while (!stopped_) {
        lock.unlock();
        poll(system_now());
        lock.lock();
        stop_cv_.wait_for(lock, std::chrono::seconds(1), [this] { return stopped_; });
    }
}

void LingeringScheduler::stop() {
    std::lock_guard lock(mu_);
    stopped_ = true;
    stop_cv_.notify_all();
}

}  // namespace tagdebt
