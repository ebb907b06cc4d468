#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace n2nsdf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DegenerateInput : public Error {
public:
    using Error::Error;
};

class ConvergenceFailure : public Error {
public:
    using Error::Error;
};

class TooFewPoints : public Error {
public:
    using Error::Error;
};

class TrainingDiverged : public Error {
public:
    TrainingDiverged(const std::string& what, std::size_t epoch)
        : Error(what), epoch_(epoch) {}

    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

class EmptySet : public Error {
public:
    using Error::Error;
};

class MissingNormals : public Error {
public:
    using Error::Error;
};

class NoInteriorEdges : public Error {
public:
    using Error::Error;
};

class ZeroArea : public Error {
public:
    using Error::Error;
};

/// Invalid or unknown configuration entry; key() names the offending key.
class ConfigError : public Error {
public:
    ConfigError(const std::string& key, const std::string& what)
        : Error("config key '" + key + "': " + what), key_(key) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace n2nsdf
