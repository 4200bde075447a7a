#pragma once

#include <filesystem>
#include <string>

namespace atelier::dataset {

/// Maps one image to one free-text caption. Implementations throw on failure.
class Captioner {
 public:
  virtual ~Captioner() = default;
  virtual std::string caption(const std::filesystem::path& image) = 0;
  virtual std::string id() const = 0;
};

/// Deterministic stub returning the same caption for every image.
class ConstantCaptioner final : public Captioner {
 public:
  explicit ConstantCaptioner(std::string text = "a painting") : text_(std::move(text)) {}
  std::string caption(const std::filesystem::path&) override { return text_; }
  std::string id() const override { return "stub"; }

 private:
  std::string text_;
};

/// Runs `<command> <image path>` through the shell and uses the first line of
/// stdout as the caption. A non-zero exit status or empty output is a failure.
class CommandCaptioner final : public Captioner {
 public:
  explicit CommandCaptioner(std::string command) : command_(std::move(command)) {}
  std::string caption(const std::filesystem::path& image) override;
  std::string id() const override { return "external"; }

 private:
  std::string command_;
};

}  // namespace atelier::dataset
