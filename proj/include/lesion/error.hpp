#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lesion {

enum class ErrorKind {
  DecodeError,
  UnsupportedFormat,
  ChannelError,
  SizeError,
  ShapeMismatch,
  ShapeError,
  DegenerateImage,
  LabelOutOfRange,
  EmptyDataset,
  CorruptStream,
  SpecMismatch,
  TooFewSamples,
  LengthMismatch,
  ConfigError,
  IoError,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (and the
/// CLI's structured error output) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace lesion
