#pragma once

#include <stdexcept>
#include <string>

namespace edgeplan {

// Base class for everything this library throws on purpose. The CLI maps the
// subclasses to distinct process exit codes, so keep the taxonomy small.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input: unparsable files, schema violations,
// out-of-range parameters, unknown strategy names.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A transmission rate of exactly zero, which would make service times blow up.
class ZeroRateError : public Error {
 public:
  using Error::Error;
};

// A queue whose utilization is >= 1; the message names the offending queue.
class InstabilityError : public Error {
 public:
  using Error::Error;
};

// No assignment/allocation satisfies the constraints; the message names the
// device or server that cannot be served.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// A work-size guard tripped (e.g. exhaustive search space too large).
class GuardError : public Error {
 public:
  using Error::Error;
};

// Too few observations to estimate the requested tail statistic.
class InsufficientSamplesError : public Error {
 public:
  using Error::Error;
};

}  // namespace edgeplan
