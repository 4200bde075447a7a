#pragma once

#include <string>

namespace atelier::detail {

/// Runs `command '<argument>'` through /bin/sh and returns its stdout.
/// Throws atelier::Error on spawn failure or non-zero exit.
std::string run_command(const std::string& command, const std::string& argument);

}  // namespace atelier::detail
