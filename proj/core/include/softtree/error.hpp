#pragma once

#include <stdexcept>
#include <string>

namespace softtree {

// Base class for every error raised by the library. `kind()` is a short
// machine-readable tag used by the CLI's one-line error contract.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

// Bad argument or configuration value.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error("validation", what) {}
};

// A precondition on object state was broken (stepping a finished episode,
// battery energy outside its bounds, ...).
class ContractViolation : public Error {
public:
    explicit ContractViolation(const std::string& what) : Error("contract", what) {}
};

// Malformed input file.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error("parse", what) {}
};

// Training produced a non-finite loss.
class TrainingDiverged : public Error {
public:
    explicit TrainingDiverged(const std::string& what) : Error("diverged", what) {}
};

}  // namespace softtree
