#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cgua {

enum class ErrorKind {
  ZeroVector,
  InvalidEmbedding,
  InconsistentCatalog,
  EmptyScene,
  NegativeLambda,
  InvalidTemperature,
  InvalidArgument,
  NoPairedClusters,
  EmptyUnpairedBank,
  UnknownCluster,
  DegenerateBox,
  NoRelevant,
  InfeasiblePacking,
  Io,
  Parse,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; the kind is the machine-readable part.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  /// For failures tied to a file; `path` is reported separately by the CLI.
  Error(ErrorKind kind, const std::string& message, std::string path)
      : Error(kind, message) {
    path_ = std::move(path);
  }

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& path() const noexcept { return path_; }

 private:
  ErrorKind kind_;
  std::string path_;
};

}  // namespace cgua
