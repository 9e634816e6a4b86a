#pragma once

#include <stdexcept>
#include <string>

namespace lcc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied argument is out of its documented range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Data violates a domain invariant (non-finite values, empty dataset, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A file does not conform to its on-disk layout.
class FormatError : public Error {
public:
    using Error::Error;
};

/// The filesystem refused a read or a write.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace lcc
