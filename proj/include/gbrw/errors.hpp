#pragma once

#include <stdexcept>
#include <string>

namespace gbrw {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Weights are negative, do not sum to 1, or are otherwise not a pmf.
class NonProbability : public Error {
 public:
  using Error::Error;
};

/// An offspring pmf puts positive mass on k = 0.
class ZeroOffspring : public Error {
 public:
  using Error::Error;
};

/// A value landed off the shared grid, or mass leaked past a grid edge.
class GridOverflow : public Error {
 public:
  using Error::Error;
};

/// A marginal's right tail is not resolved before the grid edge.
class GridTooNarrow : public Error {
 public:
  using Error::Error;
};

/// Explicit joint descriptors support k <= 4 only.
class KTooLarge : public Error {
 public:
  using Error::Error;
};

/// The (n, k) pair is not covered by the law's schedule.
class NotScheduled : public Error {
 public:
  using Error::Error;
};

/// A joint family does not admit the requested closed-form evaluation.
class UnboundedK : public Error {
 public:
  using Error::Error;
};

/// Argument outside its mathematical domain (e.g. u outside [0,1]).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A tree sample visited more nodes than the configured cap.
class PopulationCapExceeded : public Error {
 public:
  using Error::Error;
};

/// The parameter search exhausted its floors without satisfying a constraint.
class Infeasible : public Error {
 public:
  using Error::Error;
};

/// A diagnostic was requested whose defining premise does not hold.
class PremiseUnmet : public Error {
 public:
  using Error::Error;
};

/// A report operation needs a curve mode that was not computed.
class MissingMode : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration file or CLI usage.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace gbrw
