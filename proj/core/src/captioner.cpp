#include "atelier/captioner.hpp"

#include "atelier/error.hpp"
#include "shell.hpp"

namespace atelier::dataset {

std::string CommandCaptioner::caption(const std::filesystem::path& image) {
  std::string output = detail::run_command(command_, image.string());
  if (auto nl = output.find('\n'); nl != std::string::npos) output.resize(nl);
  if (output.empty()) throw Error("captioner produced no output");
  return output;
}

}  // namespace atelier::dataset
