#pragma once

#include <string>
#include <string_view>
#include <variant>

namespace tagdebt {

inline constexpr std::string_view kCommandPrefix = "/tdbot";

enum class CommandKind { label_auto, label_explicit, help };

struct Command {
    CommandKind kind = CommandKind::label_auto;
    std::string explicit_label;  // set iff kind == label_explicit

    bool operator==(const Command&) const = default;
};

/// A comment addressed to the bot with a subcommand it does not know.
struct UnknownCommand {
    std::string word;

    bool operator==(const UnknownCommand&) const = default;
};

/// monostate: ordinary conversation, not addressed to the bot.
using CommandParse = std::variant<std::monostate, Command, UnknownCommand>;

/// Grammar: the comment's first non-whitespace line, trimmed, must start with
/// "/tdbot". "label" alone -> label_auto; "label <name>" -> label_explicit
/// with the remainder of the line, trimmed, as the verbatim label; "help" ->
/// help. The command words match case-insensitively; explicit labels keep
/// their case and internal spacing.
CommandParse parse_command(std::string_view comment_body);

/// Stable multi-line usage text listing every command.
std::string help_text();

}  // namespace tagdebt
