#pragma once

#include <stdexcept>
#include <string>

namespace viewgraph {

/// Bad argument or shape mismatch passed to a library call.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Object used in a state it cannot serve (e.g. a trace from another model).
class InvalidState : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// File does not follow the container layout (magic, version, header fields).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reading or writing failed, including premature end of file.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Well-formed file whose contents break a data invariant.
class ValidationError : public std::runtime_error {
public:
    ValidationError(const std::string& what, long sample = -1)
        : std::runtime_error(what), sample_(sample) {}

    /// Index of the offending sample, or -1 when not sample-specific.
    long sample() const noexcept { return sample_; }

private:
    long sample_;
};

/// Training produced a non-finite loss.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace viewgraph
