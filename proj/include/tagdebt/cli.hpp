#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tagdebt {

/// Entry point behind the `tagdebt` binary. Returns the process exit code:
/// 0 on success, 1 on operational errors (bad config, failed run), 2 on
/// usage errors (unknown subcommand or flags).
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace tagdebt
