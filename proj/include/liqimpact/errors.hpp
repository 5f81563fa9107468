#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace liqimpact {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parameters or arguments outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Raised by the numeric ODE oracle when the solution leaves the allowed bound.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double last_valid_x)
        : Error(what), last_valid_x_(last_valid_x) {}

    double last_valid_x() const noexcept { return last_valid_x_; }

private:
    double last_valid_x_;
};

class SimulationError : public Error {
public:
    SimulationError(const std::string& what, std::size_t step)
        : Error(what), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Malformed or out-of-order input. line is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class EstimationError : public Error {
public:
    using Error::Error;
};

}  // namespace liqimpact
