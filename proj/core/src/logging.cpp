#include "atelier/logging.hpp"

#include <iostream>

namespace atelier {

void log_to_stderr(std::string_view message) {
  std::clog << "[atelier] " << message << '\n';
}

}  // namespace atelier
