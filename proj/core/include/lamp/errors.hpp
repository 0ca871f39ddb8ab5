// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lamp {

// Caller broke a documented precondition (shape mismatch, bad probability vector, ...).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Input for which the requested function is undefined, e.g. the RMS norm of a zero vector.
class SingularInput : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Exhaustive search requested on a problem that is too large.
class SizeLimitExceeded : public std::length_error {
public:
    using std::length_error::length_error;
};

// Bad user input to the model, e.g. a token id outside the vocabulary.
class InputError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Experiment configuration is inconsistent. Raised before any compute starts.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or unreadable file. offset() is the byte position where parsing stopped.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lamp
