#pragma once

#include <stdexcept>
#include <string>

namespace aero {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or parameters outside their documented domain.
class config_error : public error {
public:
  using error::error;
};

/// A backend (or remote judge) could not be reached or kept failing after
/// the retry policy was exhausted. Maps to CLI exit code 2.
class transport_error : public error {
public:
  using error::error;
};

/// Persisted state failed an integrity check (digest mismatch, malformed
/// round file). Maps to CLI exit code 3.
class data_error : public error {
public:
  using error::error;
};

/// A scheduler precondition failed, e.g. a prior-round dataset is missing.
class scheduling_error : public error {
public:
  using error::error;
};

/// Non-finite or otherwise unusable numeric input.
class numeric_error : public error {
public:
  using error::error;
};

/// Judge transport failure surfaced during clustering; carries the pair
/// that could not be judged.
class clustering_error : public transport_error {
public:
  clustering_error(const std::string& what, std::string lhs, std::string rhs)
      : transport_error(what), lhs_(std::move(lhs)), rhs_(std::move(rhs)) {}

  const std::string& lhs() const noexcept { return lhs_; }
  const std::string& rhs() const noexcept { return rhs_; }

private:
  std::string lhs_;
  std::string rhs_;
};

/// Raised by top-2 selection when a task has fewer than two non-null
/// answer clusters; the caller records the skip and moves on.
class not_enough_clusters : public error {
public:
  using error::error;
};

}  // namespace aero
