#include "tagdebt/rest_detector.hpp"

#include <httplib.h>

#include <json.hpp>

namespace tagdebt {

namespace {

using nlohmann::json;

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError(ConfigError::Kind::invalid_value, "detection.plugin-params.endpoint",
                          "endpoint must be an absolute http(s) URL");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return SplitUrl{url, "/"};
    }
    return SplitUrl{url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

Classification parse_classifier_response(std::string_view body) {
    json parsed;
    try {
        parsed = json::parse(body);
    } catch (const json::parse_error& e) {
        throw DetectorError(DetectorError::Kind::bad_response,
                            std::string("response is not JSON: ") + e.what());
    }
    if (!parsed.is_object() || !parsed.contains("label") || !parsed["label"].is_string()) {
        throw DetectorError(DetectorError::Kind::bad_response, "response lacks a string \"label\"");
    }
    const auto label = label_from_wire(parsed["label"].get<std::string>());
    if (!label) {
        throw DetectorError(DetectorError::Kind::bad_response,
                            "label \"" + parsed["label"].get<std::string>() +
                                "\" is neither \"TD\" nor \"non-TD\"");
    }
    Classification result{*label, std::nullopt};
    if (parsed.contains("confidence")) {
        if (!parsed["confidence"].is_number()) {
            throw DetectorError(DetectorError::Kind::bad_response, "confidence is not a number");
        }
        const double confidence = parsed["confidence"].get<double>();
        if (confidence < 0.0 || confidence > 1.0) {
            throw DetectorError(DetectorError::Kind::bad_response,
                                "confidence outside [0,1]");
        }
        result.confidence = confidence;
    }
    return result;
}

RestDetector::RestDetector(const DetectionSettings& settings) {
    const auto it = settings.plugin_params.find("endpoint");
    if (it == settings.plugin_params.end() || it->second.empty()) {
        throw ConfigError(ConfigError::Kind::invalid_value, "detection.plugin-params.endpoint",
                          "the \"rest\" plugin requires an endpoint URL");
    }
    endpoint_ = it->second;
    split_url(endpoint_);  // validate shape early

    const auto timeout_it = settings.plugin_params.find("timeout-seconds");
    if (timeout_it != settings.plugin_params.end()) {
        try {
            timeout_ = std::chrono::seconds(std::stoi(timeout_it->second));
        } catch (const std::exception&) {
            throw ConfigError(ConfigError::Kind::invalid_value,
                              "detection.plugin-params.timeout-seconds",
                              "expected a number of seconds");
        }
    }
}

Classification RestDetector::classify_once(const ClassificationInput& input) {
    const SplitUrl url = split_url(endpoint_);
    httplib::Client client(url.origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);

    const json request{{"text", input.text}};
    const httplib::Result result = client.Post(url.path, request.dump(), "application/json");
    if (!result) {
        const auto err = result.error();
        if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
            err == httplib::Error::Write) {
            throw DetectorError(DetectorError::Kind::timeout,
                                "no response from " + endpoint_ + " within " +
                                    std::to_string(timeout_.count()) + "s");
        }
        throw DetectorError(DetectorError::Kind::network,
                            "cannot reach " + endpoint_ + ": " + httplib::to_string(err));
    }
    if (result->status != 200) {
        throw DetectorError(DetectorError::Kind::bad_response,
                            "HTTP " + std::to_string(result->status) + " from " + endpoint_);
    }
    return parse_classifier_response(result->body);
}

Classification RestDetector::classify(const ClassificationInput& input) {
    try {
        return classify_once(input);
    } catch (const DetectorError& e) {
        if (e.kind() != DetectorError::Kind::timeout) {
            throw;
        }
    }
    // One retry after a timeout, then the failure surfaces to the caller.
    return classify_once(input);
}

}  // namespace tagdebt
