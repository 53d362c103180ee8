#pragma once

#include <stdexcept>
#include <string>

namespace aperc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model, belief, source or selection violates its invariants.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Bayes' rule normalizer is zero: the observation is impossible under the
/// current belief and action.
class ZeroLikelihoodObservation : public Error {
 public:
  using Error::Error;
};

/// Enumerating the joint observation alphabet of a selection would exceed
/// the configured number of terms.
class JointAlphabetTooLarge : public Error {
 public:
  using Error::Error;
};

/// Exhaustive subset enumeration was requested for too many sources.
class TooManySources : public Error {
 public:
  using Error::Error;
};

class InvalidScenario : public Error {
 public:
  using Error::Error;
};

/// Malformed model, value-function or scenario file.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace aperc
