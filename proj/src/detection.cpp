#include "tagdebt/detection.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "tagdebt/llm_detector.hpp"
#include "tagdebt/rest_detector.hpp"

namespace tagdebt {

namespace {

// Mirrors assets/satd_lexicon.txt; the file is the editable copy, this is the
// compiled-in fallback. A test pins the two to be identical.
constexpr std::string_view kBuiltinLexicon =
    "# Phrases that mark self-admitted technical debt in issue text.\n"
    "# One lowercase phrase per line; '#' starts a comment. Matching is\n"
    "# case-insensitive and respects word boundaries.\n"
    "band-aid\n"
    "code smell\n"
    "fixme\n"
    "good enough for now\n"
    "hack\n"
    "hacky\n"
    "hardcoded\n"
    "kludge\n"
    "obsolete\n"
    "quick fix\n"
    "refactor\n"
    "stopgap\n"
    "tech debt\n"
    "technical debt\n"
    "temp fix\n"
    "temporary\n"
    "todo\n"
    "workaround\n";

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
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

}  // namespace

std::string_view to_wire(SatdLabel label) {
    return label == SatdLabel::td ? "TD" : "non-TD";
}

std::optional<SatdLabel> label_from_wire(std::string_view s) {
    if (s == "TD") return SatdLabel::td;
    if (s == "non-TD") return SatdLabel::non_td;
    return std::nullopt;
}

DetectorError::DetectorError(Kind kind, std::string detail)
    : std::runtime_error("detector error (" + std::string(to_string(kind)) + "): " + detail),
      kind_(kind) {}

std::string_view to_string(DetectorError::Kind kind) {
    switch (kind) {
    case DetectorError::Kind::network: return "network";
    case DetectorError::Kind::timeout: return "timeout";
    case DetectorError::Kind::bad_response: return "bad_response";
    case DetectorError::Kind::auth: return "auth";
    }
    return "unknown";
}

RegistryError::RegistryError(Kind kind, std::string detail)
    : std::runtime_error("plugin registry error: " + detail), kind_(kind) {}

std::string_view to_string(RegistryError::Kind kind) {
    switch (kind) {
    case RegistryError::Kind::duplicate: return "duplicate";
    case RegistryError::Kind::frozen: return "frozen";
    case RegistryError::Kind::not_frozen: return "not-frozen";
    case RegistryError::Kind::unknown_type: return "unknown-type";
    }
    return "unknown";
}

void PluginRegistry::register_plugin(const std::string& type_id, Constructor constructor) {
    if (frozen_) {
        throw RegistryError(RegistryError::Kind::frozen,
                            "cannot register \"" + type_id + "\" after freeze");
    }
    if (type_id.empty()) {
        throw RegistryError(RegistryError::Kind::duplicate, "type identifier must be non-empty");
    }
    const auto [_, inserted] = entries_.emplace(type_id, std::move(constructor));
    if (!inserted) {
        throw RegistryError(RegistryError::Kind::duplicate,
                            "plugin type \"" + type_id + "\" already registered");
    }
}

std::unique_ptr<Detector> PluginRegistry::create_detector(const DetectionSettings& settings) const {
    if (!frozen_) {
        throw RegistryError(RegistryError::Kind::not_frozen,
                            "registry must be frozen before detectors are created");
    }
    const auto it = entries_.find(settings.type);
    if (it == entries_.end()) {
        throw RegistryError(RegistryError::Kind::unknown_type,
                            "unknown detection plugin type \"" + settings.type + "\"");
    }
    return it->second(settings);
}

std::vector<std::string> PluginRegistry::registered_types() const {
    std::vector<std::string> types;
    types.reserve(entries_.size());
    for (const auto& [type, _] : entries_) {
        types.push_back(type);
    }
    return types;
}

const PluginRegistry& builtin_registry() {
    static const PluginRegistry registry = [] {
        PluginRegistry entries;
        entries.register_plugin("heuristic", [](const DetectionSettings& settings) {
            return std::unique_ptr<Detector>(HeuristicDetector::from_settings(settings));
        });
        entries.register_plugin("rest", [](const DetectionSettings& settings) {
            return std::unique_ptr<Detector>(std::make_unique<RestDetector>(settings));
        });
        entries.register_plugin("llm", [](const DetectionSettings& settings) {
            return std::unique_ptr<Detector>(std::make_unique<LlmDetector>(settings));
        });
        entries.freeze();
        return entries;
    }();
    return registry;
}

std::string select_text(const Issue& issue, AnalyzedPart part) {
    switch (part) {
    case AnalyzedPart::title: return issue.title;
    case AnalyzedPart::description: return issue.body;
    case AnalyzedPart::both: return issue.title + "\n\n" + issue.body;
    }
    return issue.title + "\n\n" + issue.body;
}

std::vector<std::string> parse_lexicon(std::string_view text) {
    std::vector<std::string> phrases;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = text.find('\n', pos);
        const std::string_view line =
            text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        const std::string_view trimmed = trim(line);
        if (!trimmed.empty() && trimmed.front() != '#') {
            phrases.push_back(to_lower(trimmed));
        }
        if (end == std::string_view::npos) {
            break;
        }
        pos = end + 1;
    }
    return phrases;
}

std::vector<std::string> load_lexicon_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open lexicon file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_lexicon(buffer.str());
}

std::string_view builtin_lexicon_text() {
    return kBuiltinLexicon;
}

bool lexicon_match(std::string_view text, const std::vector<std::string>& phrases) {
    const std::string haystack = to_lower(text);
    for (const std::string& phrase : phrases) {
        if (phrase.empty()) {
            continue;
        }
        std::size_t from = 0;
        while (true) {
            const std::size_t at = haystack.find(phrase, from);
            if (at == std::string::npos) {
                break;
            }
            const bool left_ok = at == 0 || !is_word_char(haystack[at - 1]);
            const std::size_t after = at + phrase.size();
            const bool right_ok = after == haystack.size() || !is_word_char(haystack[after]);
            if (left_ok && right_ok) {
                return true;
            }
            from = at + 1;
        }
    }
    return false;
}

HeuristicDetector::HeuristicDetector() : phrases_(parse_lexicon(kBuiltinLexicon)) {}

HeuristicDetector::HeuristicDetector(std::vector<std::string> phrases)
    : phrases_(std::move(phrases)) {}

std::unique_ptr<HeuristicDetector> HeuristicDetector::from_settings(
    const DetectionSettings& settings) {
    const auto it = settings.plugin_params.find("lexicon-file");
    if (it != settings.plugin_params.end()) {
        return std::make_unique<HeuristicDetector>(load_lexicon_file(it->second));
    }
    return std::make_unique<HeuristicDetector>();
}

Classification HeuristicDetector::classify(const ClassificationInput& input) {
    const bool hit = lexicon_match(input.text, phrases_);
    return Classification{hit ? SatdLabel::td : SatdLabel::non_td, 0.5};
}

DetectorMetrics evaluate_detector(Detector& detector, const std::vector<CorpusItem>& corpus) {
    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        ClassificationInput input;
        input.text = corpus[i].text;
        input.issue_number = static_cast<int>(i) + 1;
        const SatdLabel predicted = detector.classify(input).label;
        const SatdLabel gold = corpus[i].gold;
        if (predicted == SatdLabel::td && gold == SatdLabel::td) {
            ++tp;
        } else if (predicted == SatdLabel::td && gold == SatdLabel::non_td) {
            ++fp;
        } else if (predicted == SatdLabel::non_td && gold == SatdLabel::td) {
            ++fn;
        }
    }
    DetectorMetrics metrics;
    metrics.precision = (tp + fp) == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
    metrics.recall = (tp + fn) == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
    metrics.f1 = (metrics.precision + metrics.recall) == 0.0
                     ? 0.0
                     : 2.0 * metrics.precision * metrics.recall /
                           (metrics.precision + metrics.recall);
    return metrics;
}

std::vector<CorpusItem> load_corpus_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open corpus file: " + path);
    }
    std::vector<CorpusItem> corpus;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        const std::string_view view = trim(line);
        if (view.empty() || view.front() == '#') {
            continue;
        }
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(line_number) +
                                     ": expected \"label<TAB>text\"");
        }
        const auto gold = label_from_wire(trim(std::string_view(line).substr(0, tab)));
        if (!gold) {
            throw std::runtime_error(path + ":" + std::to_string(line_number) +
                                     ": label must be \"TD\" or \"non-TD\"");
        }
        corpus.push_back(CorpusItem{line.substr(tab + 1), *gold});
    }
    return corpus;
}

}  // namespace tagdebt
