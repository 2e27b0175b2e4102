#pragma once

#include <stdexcept>
#include <string>

namespace llrelax {

/// Invalid or inconsistent scenario input.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A root solve or normalization did not reach its tolerance.
class NonConvergence : public std::runtime_error {
  public:
    NonConvergence(const std::string& what, double residual)
        : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

  private:
    double residual_;
};

/// No correlation front or recurrence could be identified.
class DetectionFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace llrelax
