#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tagdebt/config.hpp"
#include "tagdebt/forge.hpp"

namespace tagdebt {

/// The two-way verdict. Wire strings are exactly "TD" and "non-TD"; nothing
/// in the pipeline ever emits a third label string.
enum class SatdLabel { td, non_td };

std::string_view to_wire(SatdLabel label);
std::optional<SatdLabel> label_from_wire(std::string_view s);

struct ClassificationInput {
    std::string text;  // exact output of select_text, no further normalization
    RepoRef repo;
    int issue_number = 0;
};

struct Classification {
    SatdLabel label = SatdLabel::non_td;
    std::optional<double> confidence;  // in [0,1] when present
};

class DetectorError : public std::runtime_error {
public:
    enum class Kind { network, timeout, bad_response, auth };

    DetectorError(Kind kind, std::string detail);
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

std::string_view to_string(DetectorError::Kind kind);

/// A detection plugin. Instances must tolerate concurrent classify calls.
class Detector {
public:
    virtual ~Detector() = default;
    virtual Classification classify(const ClassificationInput& input) = 0;
};

class RegistryError : public std::runtime_error {
public:
    enum class Kind { duplicate, frozen, not_frozen, unknown_type };

    RegistryError(Kind kind, std::string detail);
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

std::string_view to_string(RegistryError::Kind kind);

/// Factory keyed by the config's detection "type" string. Plugins register a
/// constructor; after freeze() the registry is immutable and safe to share
/// across handlers.
class PluginRegistry {
public:
    using Constructor = std::function<std::unique_ptr<Detector>(const DetectionSettings&)>;

    void register_plugin(const std::string& type_id, Constructor constructor);
    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }

    /// Instantiates the plugin named by settings.type. Requires a frozen
    /// registry; unknown types raise RegistryError(unknown_type).
    std::unique_ptr<Detector> create_detector(const DetectionSettings& settings) const;

    std::vector<std::string> registered_types() const;

private:
    std::map<std::string, Constructor> entries_;
    bool frozen_ = false;
};

/// Process-wide registry holding the built-in plugins ("heuristic", "rest",
/// "llm"), already frozen.
const PluginRegistry& builtin_registry();

/// title -> issue.title; description -> issue.body; both -> title + "\n\n" + body.
std::string select_text(const Issue& issue, AnalyzedPart part);

/// Lexicon file format: one lowercase phrase per line, "#" starts a comment.
std::vector<std::string> parse_lexicon(std::string_view text);
std::vector<std::string> load_lexicon_file(const std::string& path);
/// Contents of the built-in lexicon (mirrors assets/satd_lexicon.txt).
std::string_view builtin_lexicon_text();

/// Case-insensitive phrase match on word boundaries: a match may not be
/// flanked by letters, digits or underscores.
bool lexicon_match(std::string_view text, const std::vector<std::string>& phrases);

/// Deterministic offline baseline: TD iff any lexicon phrase matches. Stands
/// behind the same interface as the remote model plugins. Confidence is a
/// flat 0.5, the baseline has no calibrated probability to report.
class HeuristicDetector : public Detector {
public:
    HeuristicDetector();  // built-in lexicon
    explicit HeuristicDetector(std::vector<std::string> phrases);

    /// Honors plugin_params["lexicon-file"] when present.
    static std::unique_ptr<HeuristicDetector> from_settings(const DetectionSettings& settings);

    Classification classify(const ClassificationInput& input) override;
    const std::vector<std::string>& lexicon() const { return phrases_; }

private:
    std::vector<std::string> phrases_;
};

struct DetectorMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct CorpusItem {
    std::string text;
    SatdLabel gold = SatdLabel::non_td;
};

/// Precision/recall/F1 for the TD class; empty denominators score 0.
DetectorMetrics evaluate_detector(Detector& detector, const std::vector<CorpusItem>& corpus);

/// Corpus file format: "TD<TAB>text" or "non-TD<TAB>text" per line, "#"
/// starts a comment line.
std::vector<CorpusItem> load_corpus_file(const std::string& path);

}  // namespace tagdebt
