#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pyrofit {

/// Base class of every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shoulders or hips needed for normalization are unobservable.
class DegenerateSkeleton : public Error {
 public:
  using Error::Error;
};

/// A joint required by an operation is masked out.
class InvalidJoint : public Error {
 public:
  using Error::Error;
};

/// A stream record could not be parsed. `offset()` is the byte offset
/// within the record (or file, for multi-line readers) where parsing failed.
class MalformedRecord : public Error {
 public:
  MalformedRecord(std::size_t offset, const std::string& reason)
      : Error("malformed record at byte " + std::to_string(offset) + ": " + reason),
        offset_(offset),
        reason_(reason) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t offset_;
  std::string reason_;
};

/// Fewer valid angle pairs than ScoringConfig::min_valid_angles.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// The demo track has no frame inside the alignment window.
class EmptyWindow : public Error {
 public:
  using Error::Error;
};

class EmptyTrack : public Error {
 public:
  using Error::Error;
};

/// Firework operation invoked in the wrong lifecycle phase.
class PhaseError : public Error {
 public:
  using Error::Error;
};

class OutOfOrderFrame : public Error {
 public:
  using Error::Error;
};

class SessionClosed : public Error {
 public:
  using Error::Error;
};

class StorageError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value or unknown configuration key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace pyrofit
