#include "tagdebt/llm_detector.hpp"

#include <httplib.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tagdebt {

namespace {

using nlohmann::json;

// Mirrors assets/llm_prompt.txt; a test pins the two to be identical.
constexpr std::string_view kDefaultPrompt =
    "You are a classifier for self-admitted technical debt in issue trackers.\n"
    "Read the issue text below and decide whether the author admits technical\n"
    "debt: shortcuts, temporary solutions, known suboptimal code or design,\n"
    "postponed rework, or similar.\n"
    "\n"
    "Reply with exactly one of these two words and nothing else:\n"
    "TD\n"
    "non-TD\n"
    "\n"
    "Issue text:\n";

std::optional<std::string> read_environment(const std::string& name) {
    const char* value = std::getenv(name.c_str());
    if (value == nullptr || *value == '\0') {
        return std::nullopt;
    }
    return std::string(value);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

std::string load_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(ConfigError::Kind::invalid_value,
                          "detection.plugin-params.prompt-file",
                          "cannot open prompt file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

const json* find_path(const json& root, std::initializer_list<const char*> keys) {
    const json* node = &root;
    for (const char* key : keys) {
        if (!node->is_object() || !node->contains(key)) {
            return nullptr;
        }
        node = &(*node)[key];
    }
    return node;
}

}  // namespace

std::string_view LlmDetector::default_prompt() {
    return kDefaultPrompt;
}

LlmDetector::LlmDetector(const DetectionSettings& settings)
    : LlmDetector(settings, read_environment) {}

LlmDetector::LlmDetector(const DetectionSettings& settings, EnvReader env)
    : env_(std::move(env)) {
    const auto& params = settings.plugin_params;

    const auto provider_it = params.find("provider");
    if (provider_it == params.end()) {
        throw ConfigError(ConfigError::Kind::invalid_value, "detection.plugin-params.provider",
                          "the \"llm\" plugin requires a provider");
    }
    provider_ = provider_it->second;
    if (provider_ != "openai" && provider_ != "anthropic" && provider_ != "gemini") {
        throw ConfigError(ConfigError::Kind::invalid_value, "detection.plugin-params.provider",
                          "provider must be \"openai\", \"anthropic\" or \"gemini\"");
    }

    const auto model_it = params.find("model");
    if (model_it == params.end() || model_it->second.empty()) {
        throw ConfigError(ConfigError::Kind::invalid_value, "detection.plugin-params.model",
                          "the \"llm\" plugin requires a model name");
    }
    model_ = model_it->second;

    if (const auto it = params.find("endpoint"); it != params.end()) {
        base_url_ = it->second;
    } else if (provider_ == "openai") {
        base_url_ = "https://api.openai.com";
    } else if (provider_ == "anthropic") {
        base_url_ = "https://api.anthropic.com";
    } else {
        base_url_ = "https://generativelanguage.googleapis.com";
    }

    if (const auto it = params.find("prompt-file"); it != params.end()) {
        prompt_ = load_text_file(it->second);
    } else {
        prompt_ = std::string(kDefaultPrompt);
    }

    if (const auto it = params.find("timeout-seconds"); it != params.end()) {
        try {
            timeout_ = std::chrono::seconds(std::stoi(it->second));
        } catch (const std::exception&) {
            throw ConfigError(ConfigError::Kind::invalid_value,
                              "detection.plugin-params.timeout-seconds",
                              "expected a number of seconds");
        }
    }
}

std::string LlmDetector::api_key_env_name() const {
    if (provider_ == "openai") return "OPENAI_API_KEY";
    if (provider_ == "anthropic") return "ANTHROPIC_API_KEY";
    return "GEMINI_API_KEY";
}

std::string LlmDetector::extract_reply(const std::string& body) const {
    json parsed;
    try {
        parsed = json::parse(body);
    } catch (const json::parse_error& e) {
        throw DetectorError(DetectorError::Kind::bad_response,
                            std::string("provider response is not JSON: ") + e.what());
    }

    const json* reply = nullptr;
    if (provider_ == "openai") {
        if (const json* choices = find_path(parsed, {"choices"});
            choices != nullptr && choices->is_array() && !choices->empty()) {
            reply = find_path((*choices)[0], {"message", "content"});
        }
    } else if (provider_ == "anthropic") {
        if (const json* content = find_path(parsed, {"content"});
            content != nullptr && content->is_array() && !content->empty()) {
            reply = find_path((*content)[0], {"text"});
        }
    } else {
        if (const json* candidates = find_path(parsed, {"candidates"});
            candidates != nullptr && candidates->is_array() && !candidates->empty()) {
            if (const json* parts = find_path((*candidates)[0], {"content", "parts"});
                parts != nullptr && parts->is_array() && !parts->empty()) {
                reply = find_path((*parts)[0], {"text"});
            }
        }
    }
    if (reply == nullptr || !reply->is_string()) {
        throw DetectorError(DetectorError::Kind::bad_response,
                            "provider response carries no text reply");
    }
    return reply->get<std::string>();
}

Classification LlmDetector::classify(const ClassificationInput& input) {
    const auto key = env_(api_key_env_name());
    if (!key) {
        throw DetectorError(DetectorError::Kind::auth,
                            api_key_env_name() + " is not set in the environment");
    }

    httplib::Client client(base_url_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);

    const std::string full_prompt = prompt_ + input.text;
    std::string path;
    json request;
    httplib::Headers headers;
    if (provider_ == "openai") {
        path = "/v1/chat/completions";
        request = {{"model", model_},
                   {"messages", json::array({json{{"role", "user"}, {"content", full_prompt}}})}};
        headers = {{"Authorization", "Bearer " + *key}};
    } else if (provider_ == "anthropic") {
        path = "/v1/messages";
        request = {{"model", model_},
                   {"max_tokens", 8},
                   {"messages", json::array({json{{"role", "user"}, {"content", full_prompt}}})}};
        headers = {{"x-api-key", *key}, {"anthropic-version", "2023-06-01"}};
    } else {
        path = "/v1beta/models/" + model_ + ":generateContent";
        request = {{"contents",
                    json::array({json{{"parts", json::array({json{{"text", full_prompt}}})}}})}};
        headers = {{"x-goog-api-key", *key}};
    }

    auto attempt = [&]() -> Classification {
        const httplib::Result result =
            client.Post(path, headers, request.dump(), "application/json");
        if (!result) {
            const auto err = result.error();
            if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                err == httplib::Error::Write) {
                throw DetectorError(DetectorError::Kind::timeout,
                                    "no reply from " + provider_ + " within " +
                                        std::to_string(timeout_.count()) + "s");
            }
            throw DetectorError(DetectorError::Kind::network,
                                "cannot reach " + base_url_ + ": " + httplib::to_string(err));
        }
        if (result->status == 401 || result->status == 403) {
            throw DetectorError(DetectorError::Kind::auth,
                                provider_ + " rejected the API key (HTTP " +
                                    std::to_string(result->status) + ")");
        }
        if (result->status != 200) {
            throw DetectorError(DetectorError::Kind::bad_response,
                                "HTTP " + std::to_string(result->status) + " from " + provider_);
        }
        const std::string reply{trim(extract_reply(result->body))};
        const auto label = label_from_wire(reply);
        if (!label) {
            throw DetectorError(DetectorError::Kind::bad_response,
                                "model replied \"" + reply +
                                    "\" instead of \"TD\" or \"non-TD\"");
        }
        return Classification{*label, std::nullopt};
    };

    try {
        return attempt();
    } catch (const DetectorError& e) {
        if (e.kind() != DetectorError::Kind::timeout) {
            throw;
        }
    }
    return attempt();
}

}  // namespace tagdebt
