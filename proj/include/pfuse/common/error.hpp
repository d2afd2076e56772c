#pragma once

#include <stdexcept>
#include <string>

namespace pfuse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration: dimension mismatches, missing formula parameters,
/// malformed config documents.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf in losses or gradients, degenerate distributions.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// API misuse, e.g. running backward twice over one graph.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A metric that has no defined value on the given input
/// (no user with both classes, fully tied rankings).
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

/// An upstream file the current stage depends on does not exist.
class MissingArtifact : public Error {
 public:
  explicit MissingArtifact(std::string path)
      : Error("missing artifact: " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace pfuse
