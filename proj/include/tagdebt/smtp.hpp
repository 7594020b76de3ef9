#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tagdebt/notifier.hpp"

namespace tagdebt {

struct SmtpSettings {
    std::string host;
    int port = 587;
    std::string username;  // also used as the envelope/From address
    std::string password;
};

/// SMTP_HOST, SMTP_PORT, SMTP_USER, SMTP_PASS from the environment, then
/// key=value lines from the dotfile override them when the file exists.
SmtpSettings load_smtp_settings(
    const std::string& dotfile_path = ".tagdebt-smtp",
    const std::function<std::optional<std::string>(const std::string&)>& env = {});

class NotifyError : public std::runtime_error {
public:
    enum class Kind { connect, tls_unavailable, auth, send_rejected };

    NotifyError(Kind kind, std::string detail);
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

std::string_view to_string(NotifyError::Kind kind);

/// One SMTP connection. Closing happens in the destructor; a session is
/// never reused across messages.
class SmtpSession {
public:
    virtual ~SmtpSession() = default;
    virtual void start_tls() = 0;
    virtual void authenticate(const std::string& username, const std::string& password) = 0;
    virtual void send_message(const EmailMessage& message, const std::string& from) = 0;
};

class SmtpTransport {
public:
    virtual ~SmtpTransport() = default;
    virtual std::unique_ptr<SmtpSession> open_session(const std::string& host, int port) = 0;
};

/// Sends one message over one fresh session: connect, upgrade to TLS,
/// authenticate, send, close. Fails closed: nothing is transmitted unless
/// the TLS upgrade succeeded.
void send_email(const EmailMessage& message, const SmtpSettings& settings,
                SmtpTransport& transport);

/// Real client: SMTP over a TCP socket with STARTTLS (OpenSSL) and
/// AUTH PLAIN.
class SocketSmtpTransport : public SmtpTransport {
public:
    struct Options {
        std::chrono::seconds timeout{30};
        bool verify_peer = true;
    };

    SocketSmtpTransport() = default;
    explicit SocketSmtpTransport(Options options) : options_(options) {}

    std::unique_ptr<SmtpSession> open_session(const std::string& host, int port) override;

private:
    Options options_;
};

/// In-process double. Records every session and message; can be scripted to
/// fail at a given stage of the next session(s).
class RecordingSmtpTransport : public SmtpTransport {
public:
    enum class FailAt { connect, tls, auth, send };

    struct SessionRecord {
        std::string host;
        int port = 0;
        bool tls_started = false;
        bool authenticated = false;
        std::string username;
        std::vector<EmailMessage> messages;
        bool closed = false;
    };

    std::unique_ptr<SmtpSession> open_session(const std::string& host, int port) override;

    void fail_at(FailAt stage, int times = 1);

    std::vector<SessionRecord> sessions() const;
    std::size_t session_count() const;
    std::size_t messages_sent() const;

private:
    class Session;

    std::optional<FailAt> take_failure();

    mutable std::mutex mu_;
    std::vector<std::shared_ptr<SessionRecord>> sessions_;
    std::deque<FailAt> failures_;
};

}  // namespace tagdebt
