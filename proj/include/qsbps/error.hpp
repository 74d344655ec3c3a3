#pragma once

#include <stdexcept>
#include <string>

namespace qsbps {

/// Malformed or inconsistent input data (corpus, model, split, request body).
class input_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters supplied by a caller.
class usage_error : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// An operation was applied to a state that does not allow it
/// (e.g. answering a finished session).
class state_error : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// An internal invariant did not hold.
class invariant_error : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

}  // namespace qsbps
