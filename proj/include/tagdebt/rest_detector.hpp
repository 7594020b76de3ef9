#pragma once

#include <chrono>
#include <string>

#include "tagdebt/detection.hpp"

namespace tagdebt {

/// Client for a classifier microservice. Wire contract:
///   request   POST <endpoint>  {"text": <string>}         (application/json)
///   response  200              {"label": "TD" | "non-TD", "confidence"?: number}
/// Timeouts are retried once, then surfaced as DetectorError.
class RestDetector : public Detector {
public:
    /// Requires plugin_params["endpoint"]; optional "timeout-seconds"
    /// (default 30). Throws ConfigError on missing/invalid params.
    explicit RestDetector(const DetectionSettings& settings);

    Classification classify(const ClassificationInput& input) override;

    const std::string& endpoint() const { return endpoint_; }

private:
    Classification classify_once(const ClassificationInput& input);

    std::string endpoint_;
    std::chrono::seconds timeout_{30};
};

/// Parses {"label": ..., "confidence"?: ...} into a Classification; throws
/// DetectorError(bad_response) on anything outside the contract. Shared with
/// the response handling tests.
Classification parse_classifier_response(std::string_view body);

}  // namespace tagdebt
