// errors.hpp: exception types shared by the xydm library and CLI

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace xydm {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameter or configuration value. key() names the offending entry.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error(key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

// A computed quantity left its admissible range by more than roundoff.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Requested time is not on the stored grid.
class LookupError : public Error {
public:
    using Error::Error;
};

// Dense oracle asked for a Hilbert space beyond its memory guard.
class SizeLimitError : public Error {
public:
    using Error::Error;
};

} // namespace xydm
