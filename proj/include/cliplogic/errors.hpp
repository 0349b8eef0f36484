#ifndef CLIPLOGIC_ERRORS_HPP
#define CLIPLOGIC_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cliplogic {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed description text.  Carries the byte offset of the offending
// token so callers can point at it.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t position)
      : Error(message + " (at position " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

// Cosine (and friends) are undefined at the origin.
class ZeroVectorError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

// ray_of() called on points that do not share a ray.
class NotColinearError : public Error {
 public:
  using Error::Error;
};

// A lookup into an embedding table failed.  Carries the absent key.
class MissingEmbeddingError : public Error {
 public:
  MissingEmbeddingError(const std::string& kind, const std::string& key)
      : Error("missing " + kind + " embedding: \"" + key + "\""), key_(key) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Structurally invalid model / truth spec / degenerate input.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

// Enumeration (or similar) would exceed its configured cap.
class ResourceLimitError : public Error {
 public:
  using Error::Error;
};

// Bad argument values (sizes, ranges, names).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// An operation's stated precondition does not hold for this input.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// "Cannot happen" states; reaching one indicates a bug in this library.
class InternalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cliplogic

#endif  // CLIPLOGIC_ERRORS_HPP
