#pragma once

#include <stdexcept>
#include <string>

namespace cfbench {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& msg)
        : Error(path + ":" + std::to_string(line) + ": " + msg), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Violated data invariant: duplicate pairs, unknown ids, out-of-range values.
class DataError : public Error {
public:
    using Error::Error;
};

// Invalid configuration or precondition (bad k, empty side info, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Power iteration hit max_iter before the residual dropped below eps.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& msg, double residual)
        : Error(msg), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

// Non-finite parameter or objective during gradient descent.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& msg, int epoch)
        : Error(msg), epoch_(epoch) {}
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

// I/O failure on an output path.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace cfbench
