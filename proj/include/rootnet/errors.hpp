// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef ROOTNET_ERRORS_HPP_
#define ROOTNET_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace rootnet {

/// Base class for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes that cannot be combined by the requested operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Input values outside an operation's domain (non-binary targets, scores
/// outside [0,1], empty strata, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (architecture, training recipe, run config).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed names or files.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A file written by an incompatible format version.
class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Stored checksum does not match the content.
class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// File ends before its declared content.
class TruncatedError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// API misuse, e.g. stepping an optimizer on a parameter without a gradient.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// I/O failure on an external resource (unreadable image, unwritable path).
class IoError : public Error {
 public:
  using Error::Error;
};

/// A non-finite loss was produced during training.
class DivergenceError : public Error {
 public:
  DivergenceError(int epoch, int batch, const std::string& what)
      : Error(what), epoch_(epoch), batch_(batch) {}

  int epoch() const { return epoch_; }
  int batch() const { return batch_; }

 private:
  int epoch_;
  int batch_;
};

}  // namespace rootnet

#endif  // ROOTNET_ERRORS_HPP_
