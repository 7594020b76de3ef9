#include "tagdebt/commands.hpp"

#include <algorithm>
#include <cctype>

namespace tagdebt {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

/// First line of `body` that contains any non-whitespace, trimmed.
std::string_view first_content_line(std::string_view body) {
    std::size_t pos = 0;
    while (pos <= body.size()) {
        const std::size_t end = body.find('\n', pos);
        const std::string_view line =
            body.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        const std::string_view trimmed = trim(line);
        if (!trimmed.empty()) {
            return trimmed;
        }
        if (end == std::string_view::npos) {
            break;
        }
        pos = end + 1;
    }
    return {};
}

std::string_view take_word(std::string_view& rest) {
    rest = trim(rest);
    std::size_t end = 0;
    while (end < rest.size() && !std::isspace(static_cast<unsigned char>(rest[end]))) {
        ++end;
    }
    const std::string_view word = rest.substr(0, end);
    rest.remove_prefix(end);
    return word;
}

}  // namespace

CommandParse parse_command(std::string_view comment_body) {
    std::string_view line = first_content_line(comment_body);
    std::string_view rest = line;
    const std::string_view head = take_word(rest);
    if (!iequals(head, kCommandPrefix)) {
        return std::monostate{};
    }

    const std::string_view subcommand = take_word(rest);
    if (iequals(subcommand, "label")) {
        const std::string_view label = trim(rest);
        if (label.empty()) {
            return Command{CommandKind::label_auto, ""};
        }
        return Command{CommandKind::label_explicit, std::string(label)};
    }
    if (iequals(subcommand, "help")) {
        return Command{CommandKind::help, ""};
    }
    return UnknownCommand{std::string(subcommand)};
}

std::string help_text() {
    return "TagDebt commands (post as the first line of an issue comment):\n"
           "\n"
           "  /tdbot label          classify this issue and apply the verdict label\n"
           "                        (\"TD\" or \"non-TD\"); the applied label is the\n"
           "                        result, no extra confirmation comment is posted\n"
           "  /tdbot label <name>   apply <name> to this issue directly, skipping\n"
           "                        classification\n"
           "  /tdbot help           show this message\n"
           "\n"
           "Configuration lives in Bot/config.json on the default branch;\n"
           "an annotated example ships in the bot's docs/ directory.\n";
}

}  // namespace tagdebt
