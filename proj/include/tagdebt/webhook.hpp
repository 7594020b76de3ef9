#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "tagdebt/forge.hpp"

namespace tagdebt {

inline constexpr std::string_view kBotLogin = "tagdebt[bot]";

/// One webhook delivery as received on the wire.
struct WebhookEnvelope {
    std::string event_name;   // X-GitHub-Event
    std::string delivery_id;  // X-GitHub-Delivery
    std::string signature;    // X-Hub-Signature-256, "sha256=<64 hex>"
    std::string payload;      // raw request body
};

enum class EventVariant { issue_opened, issue_commented, ignored };

struct Event {
    EventVariant variant = EventVariant::ignored;
    RepoRef repo;
    std::optional<Issue> issue;      // present for both active variants
    std::optional<Comment> comment;  // present for issue_commented
};

class GatewayError : public std::runtime_error {
public:
    enum class Kind { bad_payload };

    GatewayError(Kind kind, std::string detail);
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Lowercase-hex HMAC-SHA256 of `payload` keyed with `secret`.
std::string hmac_sha256_hex(std::string_view secret, std::string_view payload);

/// True iff the header equals "sha256=" + hmac_sha256_hex(secret, payload).
/// Malformed headers are false; the digest comparison is constant-time.
bool verify_signature(std::string_view payload, std::string_view signature_header,
                      std::string_view secret);

/// Maps a verified delivery onto a typed event. Only issues/opened and
/// issue_comment/created are active; everything else (other event families,
/// edits, and comments authored by the bot itself) is ignored.
Event parse_event(const WebhookEnvelope& envelope, std::string_view bot_login = kBotLogin);

}  // namespace tagdebt
