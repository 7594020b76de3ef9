#include "tagdebt/config.hpp"

#include <json.hpp>

namespace tagdebt {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail(ConfigError::Kind kind, const std::string& path, const std::string& detail) {
    throw ConfigError(kind, path, detail);
}

std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

void require_known_fields(const json& object, const std::string& prefix,
                          std::initializer_list<std::string_view> known) {
    for (const auto& [key, _] : object.items()) {
        bool found = false;
        for (std::string_view k : known) {
            if (key == k) {
                found = true;
                break;
            }
        }
        if (!found) {
            fail(ConfigError::Kind::unknown_field, join(prefix, key), "unrecognized field");
        }
    }
}

bool expect_bool(const json& value, const std::string& path) {
    if (!value.is_boolean()) {
        fail(ConfigError::Kind::invalid_value, path, "expected a boolean");
    }
    return value.get<bool>();
}

std::string expect_string(const json& value, const std::string& path) {
    if (!value.is_string()) {
        fail(ConfigError::Kind::invalid_value, path, "expected a string");
    }
    return value.get<std::string>();
}

int expect_positive_int(const json& value, const std::string& path) {
    if (!value.is_number_integer() || value.get<long long>() < 1 ||
        value.get<long long>() > 1000000) {
        fail(ConfigError::Kind::invalid_value, path, "expected a positive integer");
    }
    return value.get<int>();
}

const json& expect_object(const json& value, const std::string& path) {
    if (!value.is_object()) {
        fail(ConfigError::Kind::invalid_value, path, "expected an object");
    }
    return value;
}

// One "@", non-empty local and domain parts, no whitespace.
bool plausible_email_address(std::string_view address) {
    const auto at = address.find('@');
    if (at == std::string_view::npos || at == 0 || at + 1 == address.size()) {
        return false;
    }
    if (address.find('@', at + 1) != std::string_view::npos) {
        return false;
    }
    for (char c : address) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            return false;
        }
    }
    return true;
}

void parse_detection(const json& section, DetectionSettings& out) {
    expect_object(section, "detection");
    require_known_fields(section, "detection", {"type", "analyzed-part", "plugin-params"});
    if (section.contains("type")) {
        out.type = expect_string(section["type"], "detection.type");
        if (out.type.empty()) {
            fail(ConfigError::Kind::invalid_value, "detection.type", "must be non-empty");
        }
    }
    if (section.contains("analyzed-part")) {
        const std::string raw = expect_string(section["analyzed-part"], "detection.analyzed-part");
        const auto part = analyzed_part_from_string(raw);
        if (!part) {
            fail(ConfigError::Kind::invalid_value, "detection.analyzed-part",
                 "must be one of \"title\", \"description\", \"both\"");
        }
        out.analyzed_part = *part;
    }
    if (section.contains("plugin-params")) {
        const json& params = expect_object(section["plugin-params"], "detection.plugin-params");
        out.plugin_params.clear();
        for (const auto& [key, value] : params.items()) {
            out.plugin_params[key] =
                expect_string(value, join("detection.plugin-params", key));
        }
    }
}

void parse_email_info(const json& section, EmailSettings& out) {
    expect_object(section, "email-info");
    require_known_fields(section, "email-info", {"send-emails", "when-to-send", "recipients"});
    if (section.contains("send-emails")) {
        out.send_emails = expect_bool(section["send-emails"], "email-info.send-emails");
    }
    if (section.contains("when-to-send")) {
        const json& labels = section["when-to-send"];
        if (!labels.is_array()) {
            fail(ConfigError::Kind::invalid_value, "email-info.when-to-send",
                 "expected an array of label strings");
        }
        out.when_to_send.clear();
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const std::string path = "email-info.when-to-send[" + std::to_string(i) + "]";
            const std::string label = expect_string(labels[i], path);
            if (label.empty()) {
                fail(ConfigError::Kind::invalid_value, path, "label must be non-empty");
            }
            out.when_to_send.insert(label);
        }
    }
    if (section.contains("recipients")) {
        const json& recipients = section["recipients"];
        if (!recipients.is_array()) {
            fail(ConfigError::Kind::invalid_value, "email-info.recipients",
                 "expected an array of email addresses");
        }
        out.recipients.clear();
        for (std::size_t i = 0; i < recipients.size(); ++i) {
            const std::string path = "email-info.recipients[" + std::to_string(i) + "]";
            const std::string address = expect_string(recipients[i], path);
            if (!plausible_email_address(address)) {
                fail(ConfigError::Kind::invalid_value, path,
                     "not an email address: \"" + address + "\"");
            }
            out.recipients.push_back(address);
        }
    }
}

void parse_template_map(const json& section, const std::string& path,
                        std::map<std::string, std::string>& out) {
    expect_object(section, path);
    out.clear();
    for (const auto& [label, value] : section.items()) {
        out[label] = expect_string(value, join(path, label));
    }
}

void parse_lingering(const json& section, LingeringSettings& out) {
    expect_object(section, "lingering");
    require_known_fields(section, "lingering",
                         {"lingering-issue-threshold", "lingering-mode",
                          "lingering-check-frequency", "threshold-days"});
    if (section.contains("lingering-issue-threshold")) {
        out.threshold_days = expect_positive_int(section["lingering-issue-threshold"],
                                                 "lingering.lingering-issue-threshold");
    }
    // "threshold-days" is the field's earlier spelling, kept as a deprecated
    // alias; serialization always emits the canonical name.
    if (section.contains("threshold-days")) {
        if (section.contains("lingering-issue-threshold")) {
            fail(ConfigError::Kind::invalid_value, "lingering.threshold-days",
                 "conflicts with lingering-issue-threshold");
        }
        out.threshold_days =
            expect_positive_int(section["threshold-days"], "lingering.threshold-days");
    }
    if (section.contains("lingering-mode")) {
        const std::string raw =
            expect_string(section["lingering-mode"], "lingering.lingering-mode");
        const auto mode = lingering_mode_from_string(raw);
        if (!mode) {
            fail(ConfigError::Kind::invalid_value, "lingering.lingering-mode",
                 "must be \"creation\" or \"last-modified\"");
        }
        out.mode = *mode;
    }
    if (section.contains("lingering-check-frequency")) {
        out.check_frequency_hours = expect_positive_int(section["lingering-check-frequency"],
                                                        "lingering.lingering-check-frequency");
    }
}

// Template sections may only name labels that can actually fire.
void check_template_keys(const BotConfig& config, const std::string& section_path,
                         const std::map<std::string, std::string>& templates) {
    for (const auto& [label, _] : templates) {
        if (label != "lingering" && config.email.when_to_send.count(label) == 0) {
            fail(ConfigError::Kind::invariant_violation, join(section_path, label),
                 "template label is neither in email-info.when-to-send nor \"lingering\"");
        }
    }
}

}  // namespace

std::string_view to_string(AnalyzedPart part) {
    switch (part) {
    case AnalyzedPart::title: return "title";
    case AnalyzedPart::description: return "description";
    case AnalyzedPart::both: return "both";
    }
    return "both";
}

std::string_view to_string(LingeringMode mode) {
    return mode == LingeringMode::creation ? "creation" : "last-modified";
}

std::optional<AnalyzedPart> analyzed_part_from_string(std::string_view s) {
    if (s == "title") return AnalyzedPart::title;
    if (s == "description") return AnalyzedPart::description;
    if (s == "both") return AnalyzedPart::both;
    return std::nullopt;
}

std::optional<LingeringMode> lingering_mode_from_string(std::string_view s) {
    if (s == "creation") return LingeringMode::creation;
    if (s == "last-modified") return LingeringMode::last_modified;
    return std::nullopt;
}

ConfigError::ConfigError(Kind kind, std::string path, std::string detail)
    : std::runtime_error("config error (" + std::string(to_string(kind)) + ") at \"" + path +
                         "\": " + detail),
      kind_(kind),
      path_(std::move(path)),
      detail_(std::move(detail)) {}

std::string_view to_string(ConfigError::Kind kind) {
    switch (kind) {
    case ConfigError::Kind::malformed_json: return "malformed_json";
    case ConfigError::Kind::unknown_field: return "unknown_field";
    case ConfigError::Kind::invalid_value: return "invalid_value";
    case ConfigError::Kind::invariant_violation: return "invariant_violation";
    }
    return "unknown";
}

BotConfig default_config() {
    return BotConfig{};
}

BotConfig parse_config(std::string_view raw) {
    json document;
    try {
        document = json::parse(raw);
    } catch (const json::parse_error& e) {
        fail(ConfigError::Kind::malformed_json, "", e.what());
    }
    if (!document.is_object()) {
        fail(ConfigError::Kind::invalid_value, "", "top-level value must be an object");
    }

    require_known_fields(document, "",
                         {"detection", "email-info", "email-subject-template",
                          "email-body-template", "lingering", "welcome-comment",
                          "auto-label-on-creation"});

    BotConfig config = default_config();
    if (document.contains("detection")) {
        parse_detection(document["detection"], config.detection);
    }
    if (document.contains("email-info")) {
        parse_email_info(document["email-info"], config.email);
    }
    if (document.contains("email-subject-template")) {
        parse_template_map(document["email-subject-template"], "email-subject-template",
                           config.email.subject_templates);
    }
    if (document.contains("email-body-template")) {
        parse_template_map(document["email-body-template"], "email-body-template",
                           config.email.body_templates);
    }
    if (document.contains("lingering")) {
        parse_lingering(document["lingering"], config.lingering);
    }
    if (document.contains("welcome-comment")) {
        config.welcome_comment = expect_bool(document["welcome-comment"], "welcome-comment");
    }
    if (document.contains("auto-label-on-creation")) {
        config.auto_label_on_creation =
            expect_bool(document["auto-label-on-creation"], "auto-label-on-creation");
    }

    check_template_keys(config, "email-subject-template", config.email.subject_templates);
    check_template_keys(config, "email-body-template", config.email.body_templates);
    return config;
}

std::string serialize_config(const BotConfig& config) {
    ordered_json document;

    ordered_json detection;
    detection["type"] = config.detection.type;
    detection["analyzed-part"] = std::string(to_string(config.detection.analyzed_part));
    detection["plugin-params"] = ordered_json::object();
    for (const auto& [key, value] : config.detection.plugin_params) {
        detection["plugin-params"][key] = value;
    }
    document["detection"] = std::move(detection);

    ordered_json email_info;
    email_info["send-emails"] = config.email.send_emails;
    email_info["when-to-send"] = ordered_json::array();
    for (const auto& label : config.email.when_to_send) {
        email_info["when-to-send"].push_back(label);
    }
    email_info["recipients"] = config.email.recipients;
    document["email-info"] = std::move(email_info);

    document["email-subject-template"] = ordered_json::object();
    for (const auto& [label, tmpl] : config.email.subject_templates) {
        document["email-subject-template"][label] = tmpl;
    }
    document["email-body-template"] = ordered_json::object();
    for (const auto& [label, tmpl] : config.email.body_templates) {
        document["email-body-template"][label] = tmpl;
    }

    ordered_json lingering;
    lingering["lingering-issue-threshold"] = config.lingering.threshold_days;
    lingering["lingering-mode"] = std::string(to_string(config.lingering.mode));
    lingering["lingering-check-frequency"] = config.lingering.check_frequency_hours;
    document["lingering"] = std::move(lingering);

    document["welcome-comment"] = config.welcome_comment;
    document["auto-label-on-creation"] = config.auto_label_on_creation;

    return document.dump(2) + "\n";
}

BotConfig resolve_config(Forge& forge, const RepoRef& repo) {
    const auto raw = forge.fetch_file(repo, std::string(kConfigFilePath), repo.default_branch);
    if (!raw) {
        return default_config();
    }
    return parse_config(*raw);
}

}  // namespace tagdebt
