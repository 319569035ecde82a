#pragma once

#include <exception>
#include <iosfwd>

#include "rucca_cli/config.hpp"

namespace rucca::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kInvalidData = 2, kNumeric = 3 };

/// Maps an exception escaping a command to the process exit code.
int exit_code_for(const std::exception& e);

/// Each command reads and writes the files named in `cfg`, reports on `out`
/// and throws rucca::Error subclasses on failure.
void cmd_expand(const Config& cfg, std::ostream& out);
void cmd_train(const Config& cfg, std::ostream& out);
void cmd_parse(const Config& cfg, std::ostream& out);
void cmd_eval(const Config& cfg, std::ostream& out);
void cmd_tune(const Config& cfg, std::ostream& out);

}  // namespace rucca::cli
