#ifndef SMCSGHMC_ERRORS_HPP
#define SMCSGHMC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace smcsghmc {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// All importance weights collapsed to zero (every log-weight is -inf).
class DegenerateWeights : public Error {
public:
    using Error::Error;
};

/// A documented precondition was violated by the caller.
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// Dimension or shape mismatch between containers.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A computation produced a non-finite value where one is not allowed.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A mini-batch with zero elements was supplied.
class EmptyBatch : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed or truncated input file.
class FormatError : public Error {
public:
    using Error::Error;
};

/// A metric was called with an empty input set.
class EmptyInput : public Error {
public:
    using Error::Error;
};

/// Too few samples to compute the requested statistic.
class InsufficientData : public Error {
public:
    using Error::Error;
};

/// Optimizer loss became non-finite.
class TrainingDiverged : public Error {
public:
    using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// The particle population became unusable mid-run (for example every
/// weight update returned -inf), so the sampler had to abort.
class DegeneracyError : public Error {
public:
    using Error::Error;
};

}  // namespace smcsghmc

#endif
