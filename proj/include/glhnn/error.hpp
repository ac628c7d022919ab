#pragma once

#include <stdexcept>
#include <string>

namespace glhnn {

// Every failure the library reports derives from Error. The CLI maps the
// concrete type to an exit code (see cli.hpp).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Tensor shapes disagree with an operation's contract.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Malformed or empty user input (strings, files, corpora).
class InputError : public Error {
public:
    using Error::Error;
};

// Data that parses but violates a contract (out-of-vocabulary character,
// single-class training set, batch size zero).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Inconsistent hyperparameters or model/checkpoint mismatch.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Non-finite values or a diverged optimisation.
class NumericError : public Error {
public:
    using Error::Error;
};

// Filesystem failures and unreadable/corrupt files.
class IoError : public Error {
public:
    using Error::Error;
};

// API misuse, e.g. backward() on a cache from another forward pass.
class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace glhnn
