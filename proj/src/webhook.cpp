#include "tagdebt/webhook.hpp"

#include <openssl/crypto.h>
#include <openssl/hmac.h>
#include <openssl/sha.h>

#include <json.hpp>

namespace tagdebt {

namespace {

using nlohmann::json;

constexpr std::string_view kSignaturePrefix = "sha256=";

[[noreturn]] void bad_payload(const std::string& detail) {
    throw GatewayError(GatewayError::Kind::bad_payload, detail);
}

const json& require(const json& object, const char* key, const std::string& where) {
    auto it = object.find(key);
    if (it == object.end()) {
        bad_payload("missing field " + where);
    }
    return *it;
}

std::string require_string(const json& object, const char* key, const std::string& where) {
    const json& value = require(object, key, where);
    if (!value.is_string()) {
        bad_payload("field " + where + " is not a string");
    }
    return value.get<std::string>();
}

Timestamp require_timestamp(const json& object, const char* key, const std::string& where) {
    const auto parsed = parse_timestamp(require_string(object, key, where));
    if (!parsed) {
        bad_payload("field " + where + " is not a timestamp");
    }
    return *parsed;
}

RepoRef parse_repository(const json& payload) {
    const json& repository = require(payload, "repository", "repository");
    if (!repository.is_object()) {
        bad_payload("repository is not an object");
    }
    const std::string full_name = require_string(repository, "full_name", "repository.full_name");
    const std::string branch =
        require_string(repository, "default_branch", "repository.default_branch");
    const auto repo = parse_repo_full_name(full_name, branch);
    if (!repo) {
        bad_payload("repository.full_name is not \"owner/name\"");
    }
    return *repo;
}

Issue parse_issue(const json& payload, const RepoRef& repo) {
    const json& raw = require(payload, "issue", "issue");
    if (!raw.is_object()) {
        bad_payload("issue is not an object");
    }
    Issue issue;
    issue.repo = repo;

    const json& number = require(raw, "number", "issue.number");
    if (!number.is_number_integer() || number.get<long long>() < 1) {
        bad_payload("issue.number is not a positive integer");
    }
    issue.number = number.get<int>();

    issue.title = require_string(raw, "title", "issue.title");
    // GitHub sends null for empty bodies.
    const json& body = require(raw, "body", "issue.body");
    if (body.is_string()) {
        issue.body = body.get<std::string>();
    } else if (!body.is_null()) {
        bad_payload("issue.body is not a string");
    }

    const json& labels = require(raw, "labels", "issue.labels");
    if (!labels.is_array()) {
        bad_payload("issue.labels is not an array");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        issue.labels.insert(
            require_string(labels[i], "name", "issue.labels[" + std::to_string(i) + "].name"));
    }

    const std::string state = require_string(raw, "state", "issue.state");
    if (state == "open") {
        issue.state = IssueState::open;
    } else if (state == "closed") {
        issue.state = IssueState::closed;
    } else {
        bad_payload("issue.state is neither \"open\" nor \"closed\"");
    }

    issue.created_at = require_timestamp(raw, "created_at", "issue.created_at");
    issue.updated_at = require_timestamp(raw, "updated_at", "issue.updated_at");
    if (issue.updated_at < issue.created_at) {
        bad_payload("issue.updated_at precedes issue.created_at");
    }
    return issue;
}

Comment parse_comment(const json& payload, const RepoRef& repo, int issue_number) {
    const json& raw = require(payload, "comment", "comment");
    if (!raw.is_object()) {
        bad_payload("comment is not an object");
    }
    const json& user = require(raw, "user", "comment.user");
    if (!user.is_object()) {
        bad_payload("comment.user is not an object");
    }
    Comment comment;
    comment.repo = repo;
    comment.issue_number = issue_number;
    comment.body = require_string(raw, "body", "comment.body");
    comment.author_login = require_string(user, "login", "comment.user.login");
    comment.author_is_bot = require_string(user, "type", "comment.user.type") == "Bot";
    if (raw.contains("created_at") && (*raw.find("created_at")).is_string()) {
        comment.created_at = parse_timestamp(raw["created_at"].get<std::string>()).value_or(Timestamp{});
    }
    return comment;
}

}  // namespace

GatewayError::GatewayError(Kind kind, std::string detail)
    : std::runtime_error("gateway error: " + detail), kind_(kind) {}

std::string hmac_sha256_hex(std::string_view secret, std::string_view payload) {
    unsigned char digest[SHA256_DIGEST_LENGTH];
    unsigned int digest_len = 0;
    HMAC(EVP_sha256(), secret.data(), static_cast<int>(secret.size()),
         reinterpret_cast<const unsigned char*>(payload.data()), payload.size(), digest,
         &digest_len);

    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(digest_len * 2);
    for (unsigned int i = 0; i < digest_len; ++i) {
        hex.push_back(kHex[digest[i] >> 4]);
        hex.push_back(kHex[digest[i] & 0x0f]);
    }
    return hex;
}

bool verify_signature(std::string_view payload, std::string_view signature_header,
                      std::string_view secret) {
    if (secret.empty()) {
        return false;
    }
    if (signature_header.size() != kSignaturePrefix.size() + 64 ||
        signature_header.substr(0, kSignaturePrefix.size()) != kSignaturePrefix) {
        return false;
    }
    const std::string_view provided = signature_header.substr(kSignaturePrefix.size());
    for (char c : provided) {
        const bool hex_digit = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
        if (!hex_digit) {
            return false;
        }
    }
    const std::string expected = hmac_sha256_hex(secret, payload);
    return CRYPTO_memcmp(expected.data(), provided.data(), expected.size()) == 0;
}

Event parse_event(const WebhookEnvelope& envelope, std::string_view bot_login) {
    json payload;
    try {
        payload = json::parse(envelope.payload);
    } catch (const json::parse_error& e) {
        bad_payload(e.what());
    }
    if (!payload.is_object()) {
        bad_payload("payload is not an object");
    }

    const std::string action =
        payload.contains("action") && payload["action"].is_string()
            ? payload["action"].get<std::string>()
            : "";

    Event event;
    if (envelope.event_name == "issues" && action == "opened") {
        event.repo = parse_repository(payload);
        event.issue = parse_issue(payload, event.repo);
        event.variant = EventVariant::issue_opened;
        return event;
    }
    if (envelope.event_name == "issue_comment" && action == "created") {
        event.repo = parse_repository(payload);
        event.issue = parse_issue(payload, event.repo);
        event.comment = parse_comment(payload, event.repo, event.issue->number);
        // The bot must never react to its own comments.
        if (event.comment->author_is_bot || event.comment->author_login == bot_login) {
            return Event{EventVariant::ignored, event.repo, std::nullopt, std::nullopt};
        }
        event.variant = EventVariant::issue_commented;
        return event;
    }

    // Anything else (pushes, edits, deletions, unknown families) is ignored.
    if (payload.contains("repository") && payload["repository"].is_object() &&
        payload["repository"].contains("full_name")) {
        const auto repo = parse_repo_full_name(
            payload["repository"]["full_name"].get<std::string>(),
            payload["repository"].value("default_branch", "main"));
        if (repo) {
            event.repo = *repo;
        }
    }
    event.variant = EventVariant::ignored;
    return event;
}

}  // namespace tagdebt
