#include "shell.hpp"

#include <array>
#include <cstdio>

#include "atelier/error.hpp"

namespace atelier::detail {

std::string run_command(const std::string& command, const std::string& argument) {
  std::string quoted = "'";
  for (char c : argument) {
    if (c == '\'') {
      quoted += "'\\''";
    } else {
      quoted.push_back(c);
    }
  }
  quoted.push_back('\'');
  FILE* pipe = ::popen((command + " " + quoted).c_str(), "r");
  if (!pipe) throw Error("cannot start: " + command);
  std::string output;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) output += buf.data();
  if (const int status = ::pclose(pipe); status != 0) {
    throw Error("'" + command + "' exited with status " + std::to_string(status));
  }
  return output;
}

}  // namespace atelier::detail
