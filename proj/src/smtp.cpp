#include "tagdebt/smtp.hpp"

#include <netdb.h>
#include <openssl/err.h>
#include <openssl/ssl.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <utility>

namespace tagdebt {

namespace {

std::optional<std::string> getenv_lookup(const std::string& name) {
    const char* value = std::getenv(name.c_str());
    if (value == nullptr) return std::nullopt;
    return std::string(value);
}

std::string trim_copy(std::string_view text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    return std::string(text.substr(begin, end - begin));
}

}  // namespace

SmtpSettings load_smtp_settings(
    const std::string& dotfile_path,
    const std::function<std::optional<std::string>(const std::string&)>& env) {
    const auto& lookup = env ? env : getenv_lookup;

    SmtpSettings settings;
    if (auto host = lookup("SMTP_HOST")) settings.host = *host;
    if (auto port = lookup("SMTP_PORT")) {
        try {
            settings.port = std::stoi(*port);
        } catch (const std::exception&) {
            // Leave the default; a bogus SMTP_PORT should not take the bot down.
        }
    }
    if (auto user = lookup("SMTP_USER")) settings.username = *user;
    if (auto pass = lookup("SMTP_PASS")) settings.password = *pass;

    std::ifstream file(dotfile_path);
    if (file) {
        std::string line;
        while (std::getline(file, line)) {
            std::string entry = trim_copy(line);
            if (entry.empty() || entry.front() == '#') continue;
            auto eq = entry.find('=');
            if (eq == std::string::npos) continue;
            std::string key = trim_copy(entry.substr(0, eq));
            std::string value = trim_copy(entry.substr(eq + 1));
            if (key == "host") {
                settings.host = value;
            } else if (key == "port") {
                try {
                    settings.port = std::stoi(value);
                } catch (const std::exception&) {
                }
            } else if (key == "user") {
                settings.username = value;
            } else if (key == "pass") {
                settings.password = value;
            }
        }
    }
    return settings;
}

NotifyError::NotifyError(Kind kind, std::string detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

std::string_view to_string(NotifyError::Kind kind) {
    switch (kind) {
    case NotifyError::Kind::connect: return "connect";
    case NotifyError::Kind::tls_unavailable: return "tls-unavailable";
    case NotifyError::Kind::auth: return "auth";
    case NotifyError::Kind::send_rejected: return "send-rejected";
    }
    return "unknown";
}

void send_email(const EmailMessage& message, const SmtpSettings& settings,
                SmtpTransport& transport) {
    if (message.recipients.empty()) {
        throw NotifyError(NotifyError::Kind::send_rejected, "message has no recipients");
    }
    if (settings.host.empty()) {
        throw NotifyError(NotifyError::Kind::connect, "no SMTP host configured");
    }
    auto session = transport.open_session(settings.host, settings.port);
    session->start_tls();
    session->authenticate(settings.username, settings.password);
    session->send_message(message, settings.username);
}

namespace {

std::string base64_encode(std::string_view input) {
    static constexpr char alphabet[] =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((input.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= input.size()) {
        unsigned v = (static_cast<unsigned char>(input[i]) << 16) |
                     (static_cast<unsigned char>(input[i + 1]) << 8) |
                     static_cast<unsigned char>(input[i + 2]);
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += alphabet[(v >> 6) & 63];
        out += alphabet[v & 63];
        i += 3;
    }
    if (i + 1 == input.size()) {
        unsigned v = static_cast<unsigned char>(input[i]) << 16;
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += "==";
    } else if (i + 2 == input.size()) {
        unsigned v = (static_cast<unsigned char>(input[i]) << 16) |
                     (static_cast<unsigned char>(input[i + 1]) << 8);
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += alphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

/// Message body with SMTP dot-stuffing: a leading '.' on any line is doubled
/// so the server cannot mistake it for the end-of-data marker.
std::string dot_stuff(std::string_view body) {
    std::string out;
    out.reserve(body.size());
    bool at_line_start = true;
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (at_line_start && c == '.') out += '.';
        if (c == '\n' && (i == 0 || body[i - 1] != '\r')) {
            out += '\r';  // normalize bare LF to CRLF for the wire
        }
        out += c;
        at_line_start = (c == '\n');
    }
    if (!out.empty() && out.back() != '\n') out += "\r\n";
    return out;
}

struct SmtpReply {
    int code = 0;
    std::vector<std::string> lines;

    bool has_capability(std::string_view name) const {
        for (const auto& line : lines) {
            std::string upper(line);
            std::transform(upper.begin(), upper.end(), upper.begin(),
                           [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
            if (upper.rfind(name, 0) == 0) return true;
        }
        return false;
    }

    std::string text() const {
        std::string joined;
        for (const auto& line : lines) {
            if (!joined.empty()) joined += " / ";
            joined += line;
        }
        return joined;
    }
};

class SocketSmtpSession : public SmtpSession {
public:
    SocketSmtpSession(const std::string& host, int port, SocketSmtpTransport::Options options)
        : host_(host), options_(options) {
        connect_socket(host, port);
        SmtpReply greeting = read_reply(NotifyError::Kind::connect);
        if (greeting.code != 220) {
            throw NotifyError(NotifyError::Kind::connect,
                              "unexpected SMTP greeting: " + greeting.text());
        }
        ehlo_ = exchange("EHLO tagdebt.local", NotifyError::Kind::connect);
        if (ehlo_.code != 250) {
            throw NotifyError(NotifyError::Kind::connect, "EHLO rejected: " + ehlo_.text());
        }
    }

    ~SocketSmtpSession() override {
        if (fd_ >= 0) {
            // Best effort; the server may already be gone.
            try {
                write_line("QUIT");
            } catch (const NotifyError&) {
            }
        }
        if (ssl_ != nullptr) SSL_free(ssl_);
        if (ssl_ctx_ != nullptr) SSL_CTX_free(ssl_ctx_);
        if (fd_ >= 0) ::close(fd_);
    }

    void start_tls() override {
        if (!ehlo_.has_capability("STARTTLS")) {
            throw NotifyError(NotifyError::Kind::tls_unavailable,
                              "server does not advertise STARTTLS");
        }
        SmtpReply reply = exchange("STARTTLS", NotifyError::Kind::tls_unavailable);
        if (reply.code != 220) {
            throw NotifyError(NotifyError::Kind::tls_unavailable,
                              "STARTTLS refused: " + reply.text());
        }

        ssl_ctx_ = SSL_CTX_new(TLS_client_method());
        if (ssl_ctx_ == nullptr) {
            throw NotifyError(NotifyError::Kind::tls_unavailable, "SSL_CTX_new failed");
        }
        SSL_CTX_set_default_verify_paths(ssl_ctx_);
        SSL_CTX_set_verify(ssl_ctx_,
                           options_.verify_peer ? SSL_VERIFY_PEER : SSL_VERIFY_NONE, nullptr);
        ssl_ = SSL_new(ssl_ctx_);
        if (ssl_ == nullptr) {
            throw NotifyError(NotifyError::Kind::tls_unavailable, "SSL_new failed");
        }
        SSL_set_tlsext_host_name(ssl_, host_.c_str());
        SSL_set1_host(ssl_, host_.c_str());
        SSL_set_fd(ssl_, fd_);
        if (SSL_connect(ssl_) != 1) {
            unsigned long err = ERR_get_error();
            char buf[256] = {};
            ERR_error_string_n(err, buf, sizeof buf);
            SSL_free(ssl_);
            ssl_ = nullptr;
            throw NotifyError(NotifyError::Kind::tls_unavailable,
                              std::string("TLS handshake failed: ") + buf);
        }

        // RFC 3207: state resets after the upgrade, so EHLO again.
        ehlo_ = exchange("EHLO tagdebt.local", NotifyError::Kind::tls_unavailable);
        if (ehlo_.code != 250) {
            throw NotifyError(NotifyError::Kind::tls_unavailable,
                              "EHLO after STARTTLS rejected: " + ehlo_.text());
        }
    }

    void authenticate(const std::string& username, const std::string& password) override {
        std::string token;
        token += '\0';
        token += username;
        token += '\0';
        token += password;
        SmtpReply reply =
            exchange("AUTH PLAIN " + base64_encode(token), NotifyError::Kind::auth);
        if (reply.code != 235) {
            throw NotifyError(NotifyError::Kind::auth,
                              "authentication rejected: " + reply.text());
        }
    }

    void send_message(const EmailMessage& message, const std::string& from) override {
        SmtpReply reply =
            exchange("MAIL FROM:<" + from + ">", NotifyError::Kind::send_rejected);
        if (reply.code != 250) {
            throw NotifyError(NotifyError::Kind::send_rejected,
                              "MAIL FROM rejected: " + reply.text());
        }
        for (const auto& recipient : message.recipients) {
            reply = exchange("RCPT TO:<" + recipient + ">", NotifyError::Kind::send_rejected);
            if (reply.code != 250 && reply.code != 251) {
                throw NotifyError(NotifyError::Kind::send_rejected,
                                  "RCPT TO rejected for " + recipient + ": " + reply.text());
            }
        }
        reply = exchange("DATA", NotifyError::Kind::send_rejected);
        if (reply.code != 354) {
            throw NotifyError(NotifyError::Kind::send_rejected,
                              "DATA rejected: " + reply.text());
        }

        std::string payload;
        payload += "From: <" + from + ">\r\n";
        payload += "To: ";
        for (std::size_t i = 0; i < message.recipients.size(); ++i) {
            if (i > 0) payload += ", ";
            payload += "<" + message.recipients[i] + ">";
        }
        payload += "\r\n";
        payload += "Subject: " + message.subject + "\r\n";
        payload += "MIME-Version: 1.0\r\n";
        payload += "Content-Type: text/plain; charset=utf-8\r\n";
        payload += "\r\n";
        payload += dot_stuff(message.body);
        payload += ".";

        reply = exchange(payload, NotifyError::Kind::send_rejected);
        if (reply.code != 250) {
            throw NotifyError(NotifyError::Kind::send_rejected,
                              "message rejected: " + reply.text());
        }
    }

private:
    void connect_socket(const std::string& host, int port) {
        addrinfo hints = {};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* results = nullptr;
        int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &results);
        if (rc != 0) {
            throw NotifyError(NotifyError::Kind::connect,
                              "cannot resolve " + host + ": " + gai_strerror(rc));
        }
        int saved_errno = 0;
        for (addrinfo* entry = results; entry != nullptr; entry = entry->ai_next) {
            int fd = ::socket(entry->ai_family, entry->ai_socktype, entry->ai_protocol);
            if (fd < 0) {
                saved_errno = errno;
                continue;
            }
            timeval tv = {};
            tv.tv_sec = options_.timeout.count();
            ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
            ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
            if (::connect(fd, entry->ai_addr, entry->ai_addrlen) == 0) {
                fd_ = fd;
                break;
            }
            saved_errno = errno;
            ::close(fd);
        }
        ::freeaddrinfo(results);
        if (fd_ < 0) {
            throw NotifyError(NotifyError::Kind::connect,
                              "cannot connect to " + host + ":" + std::to_string(port) + ": " +
                                  std::strerror(saved_errno));
        }
    }

    void write_line(const std::string& line) {
        std::string wire = line + "\r\n";
        std::size_t sent = 0;
        while (sent < wire.size()) {
            ssize_t n;
            if (ssl_ != nullptr) {
                n = SSL_write(ssl_, wire.data() + sent, static_cast<int>(wire.size() - sent));
            } else {
                n = ::send(fd_, wire.data() + sent, wire.size() - sent, MSG_NOSIGNAL);
            }
            if (n <= 0) {
                throw NotifyError(NotifyError::Kind::connect, "connection lost while writing");
            }
            sent += static_cast<std::size_t>(n);
        }
    }

    std::string read_line(NotifyError::Kind on_error) {
        std::string line;
        while (true) {
            auto nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                if (!line.empty() && line.back() == '\r') line.pop_back();
                return line;
            }
            char chunk[512];
            ssize_t n;
            if (ssl_ != nullptr) {
                n = SSL_read(ssl_, chunk, sizeof chunk);
            } else {
                n = ::recv(fd_, chunk, sizeof chunk, 0);
            }
            if (n <= 0) {
                throw NotifyError(on_error, "connection lost while reading");
            }
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    SmtpReply read_reply(NotifyError::Kind on_error) {
        SmtpReply reply;
        while (true) {
            std::string line = read_line(on_error);
            if (line.size() < 3 || !std::isdigit(static_cast<unsigned char>(line[0]))) {
                throw NotifyError(on_error, "malformed SMTP reply: " + line);
            }
            reply.code = std::stoi(line.substr(0, 3));
            reply.lines.push_back(line.size() > 4 ? line.substr(4) : std::string());
            if (line.size() == 3 || line[3] != '-') break;
        }
        return reply;
    }

    SmtpReply exchange(const std::string& command, NotifyError::Kind on_error) {
        write_line(command);
        return read_reply(on_error);
    }

    std::string host_;
    SocketSmtpTransport::Options options_;
    int fd_ = -1;
    SSL_CTX* ssl_ctx_ = nullptr;
    SSL* ssl_ = nullptr;
    std::string buffer_;
    SmtpReply ehlo_;
};

}  // namespace

std::unique_ptr<SmtpSession> SocketSmtpTransport::open_session(const std::string& host,
                                                               int port) {
    return std::make_unique<SocketSmtpSession>(host, port, options_);
}

class RecordingSmtpTransport::Session : public SmtpSession {
public:
    Session(std::shared_ptr<SessionRecord> record, std::optional<FailAt> failure)
        : record_(std::move(record)), failure_(failure) {}

    ~Session() override { record_->closed = true; }

    void start_tls() override {
        if (failure_ == FailAt::tls) {
            throw NotifyError(NotifyError::Kind::tls_unavailable, "scripted TLS failure");
        }
        record_->tls_started = true;
    }

    void authenticate(const std::string& username, const std::string&) override {
        if (failure_ == FailAt::auth) {
            throw NotifyError(NotifyError::Kind::auth, "scripted auth failure");
        }
        record_->authenticated = true;
        record_->username = username;
    }

    void send_message(const EmailMessage& message, const std::string&) override {
        if (failure_ == FailAt::send) {
            throw NotifyError(NotifyError::Kind::send_rejected, "scripted send failure");
        }
        record_->messages.push_back(message);
    }

private:
    std::shared_ptr<SessionRecord> record_;
    std::optional<FailAt> failure_;
};

std::unique_ptr<SmtpSession> RecordingSmtpTransport::open_session(const std::string& host,
                                                                  int port) {
    std::optional<FailAt> failure = take_failure();
    if (failure == FailAt::connect) {
        throw NotifyError(NotifyError::Kind::connect, "scripted connect failure");
    }
    auto record = std::make_shared<SessionRecord>();
    record->host = host;
    record->port = port;
    {
        std::lock_guard lock(mu_);
        sessions_.push_back(record);
    }
    return std::make_unique<Session>(std::move(record), failure);
}

void RecordingSmtpTransport::fail_at(FailAt stage, int times) {
    std::lock_guard lock(mu_);
    for (int i = 0; i < times; ++i) failures_.push_back(stage);
}

std::optional<RecordingSmtpTransport::FailAt> RecordingSmtpTransport::take_failure() {
    std::lock_guard lock(mu_);
    if (failures_.empty()) return std::nullopt;
    FailAt stage = failures_.front();
    failures_.pop_front();
    return stage;
}

std::vector<RecordingSmtpTransport::SessionRecord> RecordingSmtpTransport::sessions() const {
    std::lock_guard lock(mu_);
    std::vector<SessionRecord> out;
    out.reserve(sessions_.size());
    for (const auto& record : sessions_) out.push_back(*record);
    return out;
}

std::size_t RecordingSmtpTransport::session_count() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
}

std::size_t RecordingSmtpTransport::messages_sent() const {
    std::lock_guard lock(mu_);
    std::size_t total = 0;
    for (const auto& record : sessions_) total += record->messages.size();
    return total;
}

}  // namespace tagdebt
