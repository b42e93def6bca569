#pragma once

#include <stdexcept>
#include <string>

namespace pothole {

/// Malformed input text (JSON, CSV, wire bytes).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Well-formed input that violates a domain invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lookup of an id that does not exist.
class NotFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Unreachable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace pothole
