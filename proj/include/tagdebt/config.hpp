#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tagdebt/forge.hpp"

namespace tagdebt {

enum class AnalyzedPart { title, description, both };
enum class LingeringMode { creation, last_modified };

std::string_view to_string(AnalyzedPart part);
std::string_view to_string(LingeringMode mode);
std::optional<AnalyzedPart> analyzed_part_from_string(std::string_view s);
std::optional<LingeringMode> lingering_mode_from_string(std::string_view s);

struct DetectionSettings {
    std::string type = "heuristic";
    AnalyzedPart analyzed_part = AnalyzedPart::both;
    std::map<std::string, std::string> plugin_params;

    bool operator==(const DetectionSettings&) const = default;
};

struct EmailSettings {
    bool send_emails = false;
    std::set<std::string> when_to_send{"TD"};
    std::vector<std::string> recipients;
    std::map<std::string, std::string> subject_templates;  // label -> template
    std::map<std::string, std::string> body_templates;     // label -> template

    bool operator==(const EmailSettings&) const = default;
};

struct LingeringSettings {
    int threshold_days = 30;
    LingeringMode mode = LingeringMode::creation;
    int check_frequency_hours = 24;

    bool operator==(const LingeringSettings&) const = default;
};

/// Per-repository behavior, resolved from Bot/config.json or built-in
/// defaults. Immutable once constructed.
struct BotConfig {
    DetectionSettings detection;
    EmailSettings email;
    LingeringSettings lingering;
    bool welcome_comment = true;
    bool auto_label_on_creation = false;

    bool operator==(const BotConfig&) const = default;
};

class ConfigError : public std::runtime_error {
public:
    enum class Kind { malformed_json, unknown_field, invalid_value, invariant_violation };

    ConfigError(Kind kind, std::string path, std::string detail);

    Kind kind() const { return kind_; }
    /// Dotted path of the offending field ("lingering.lingering-issue-threshold");
    /// empty only for malformed_json.
    const std::string& path() const { return path_; }
    const std::string& detail() const { return detail_; }

private:
    Kind kind_;
    std::string path_;
    std::string detail_;
};

std::string_view to_string(ConfigError::Kind kind);

/// The canonical defaults used when a repository ships no config file.
BotConfig default_config();

/// Parses a full or partial config; absent fields keep their defaults,
/// unknown fields at any level are rejected. Throws ConfigError.
BotConfig parse_config(std::string_view raw);

/// Canonical serialization: parse_config(serialize_config(c)) == c, and
/// serialize_config(default_config()) matches the shipped default file.
std::string serialize_config(const BotConfig& config);

inline constexpr std::string_view kConfigFilePath = "Bot/config.json";

/// Fetches Bot/config.json from the repo's default branch on every call (no
/// caching). Absent file -> defaults; unparseable file -> ConfigError.
BotConfig resolve_config(Forge& forge, const RepoRef& repo);

}  // namespace tagdebt
