#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>

#include "tagdebt/detection.hpp"

namespace tagdebt {

/// Classifies by prompting a hosted LLM (OpenAI, Anthropic or Google Gemini).
/// The prompt instructs the model to answer with exactly "TD" or "non-TD";
/// the reply is parsed strictly and anything else is a bad_response, free
/// text is never laundered into a verdict.
///
/// plugin_params: "provider" (openai|anthropic|gemini), "model", optional
/// "endpoint" (base-URL override, used by the tests), optional "prompt-file"
/// and "timeout-seconds". The API key comes from the provider's environment
/// variable (OPENAI_API_KEY, ANTHROPIC_API_KEY, GEMINI_API_KEY) and is
/// checked before any network call.
class LlmDetector : public Detector {
public:
    using EnvReader = std::function<std::optional<std::string>(const std::string& name)>;

    explicit LlmDetector(const DetectionSettings& settings);
    LlmDetector(const DetectionSettings& settings, EnvReader env);

    Classification classify(const ClassificationInput& input) override;

    const std::string& provider() const { return provider_; }
    const std::string& model() const { return model_; }
    const std::string& prompt() const { return prompt_; }

    /// The shipped prompt (mirrors assets/llm_prompt.txt).
    static std::string_view default_prompt();

private:
    std::string api_key_env_name() const;
    std::string extract_reply(const std::string& body) const;

    std::string provider_;
    std::string model_;
    std::string prompt_;
    std::string base_url_;
    std::chrono::seconds timeout_{30};
    EnvReader env_;
};

}  // namespace tagdebt
