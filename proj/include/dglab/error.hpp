#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace dglab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user configuration. `key()` names the offending setting or path.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error(what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Malformed or inconsistent data (files, datasets, tensors).
class DataError : public Error {
public:
    using Error::Error;
};

/// Non-finite values or shape mismatches met during computation.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace dglab
