#pragma once

#include <stdexcept>
#include <string>

namespace refl {

// Failure categories used across the library. The CLI maps validation-type
// kinds to exit code 2 and runtime-type kinds to exit code 3.
enum class ErrorKind {
    config,
    dimension,
    domain,
    invalid_timestep,
    ordering,
    capability,
    geometry,
    correspondence,
    coverage,
    numerical,
    training,
    io,
    compatibility,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

#define REFL_DEFINE_ERROR(Name, Kind)                                        \
    class Name : public Error {                                              \
    public:                                                                  \
        explicit Name(const std::string& msg) : Error(ErrorKind::Kind, msg) {} \
    }

REFL_DEFINE_ERROR(ConfigError, config);
REFL_DEFINE_ERROR(DimensionError, dimension);
REFL_DEFINE_ERROR(DomainError, domain);
REFL_DEFINE_ERROR(InvalidTimestepError, invalid_timestep);
REFL_DEFINE_ERROR(OrderingError, ordering);
REFL_DEFINE_ERROR(CapabilityError, capability);
REFL_DEFINE_ERROR(GeometryError, geometry);
REFL_DEFINE_ERROR(CorrespondenceError, correspondence);
REFL_DEFINE_ERROR(CoverageError, coverage);
REFL_DEFINE_ERROR(NumericalError, numerical);
REFL_DEFINE_ERROR(TrainingError, training);
REFL_DEFINE_ERROR(IoError, io);
REFL_DEFINE_ERROR(CompatibilityError, compatibility);

#undef REFL_DEFINE_ERROR

// True for error kinds caused by bad inputs/configuration rather than
// failures encountered while running.
inline bool is_validation_error(ErrorKind k) {
    switch (k) {
        case ErrorKind::config:
        case ErrorKind::dimension:
        case ErrorKind::domain:
        case ErrorKind::invalid_timestep:
        case ErrorKind::ordering:
        case ErrorKind::capability:
        case ErrorKind::compatibility:
            return true;
        default:
            return false;
    }
}

}  // namespace refl
