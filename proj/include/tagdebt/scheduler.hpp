#pragma once

#include <condition_variable>
#include <functional>
#include <mutex>
#include <vector>

#include "tagdebt/forge.hpp"
#include "tagdebt/lingering.hpp"
#include "tagdebt/smtp.hpp"

namespace tagdebt {

/// Periodically scans every installed repository for lingering issues and
/// mails the digest where a repo's config asks for it.
///
/// Ticks are pure clock arithmetic: after `elapsed` time, exactly
/// floor(elapsed / frequency) ticks have run, catching up if poll() is
/// called late. A repo that fails to scan never blocks the others.
class LingeringScheduler {
public:
    using RepoSource = std::function<std::vector<RepoRef>()>;

    struct Options {
        int frequency_hours = 24;
        SmtpSettings smtp;
        std::string link_base = "https://github.com";
    };

    LingeringScheduler(Forge& forge, SmtpTransport& transport, RepoSource repos,
                       Options options);

    /// Anchors the tick epoch; the first tick comes due one full period later.
    /// Without an explicit start, the first poll() anchors it.
    void start(Timestamp now);

    /// Runs every tick due by `now`; returns how many ran in this call.
    int poll(Timestamp now);

    long ticks_executed() const;

    /// Reports from the most recent tick, one per repo that scanned cleanly.
    std::vector<LingeringReport> last_reports() const;

    /// Blocking loop on the system clock; returns after stop().
    void run();
    void stop();

private:
    void run_tick(Timestamp now);

    Forge& forge_;
    SmtpTransport& transport_;
    RepoSource repos_;
    Options options_;

    mutable std::mutex mu_;
    std::condition_variable stop_cv_;
    bool stopped_ = false;
    bool started_ = false;
    Timestamp epoch_{};
    long ticks_ = 0;
    std::vector<LingeringReport> last_reports_;
};

}  // namespace tagdebt
