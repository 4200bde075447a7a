#pragma once

#include <functional>
#include <string_view>

namespace atelier {

using LogSink = std::function<void(std::string_view)>;

/// Writes "[atelier] <message>" to stderr.
void log_to_stderr(std::string_view message);

}  // namespace atelier
