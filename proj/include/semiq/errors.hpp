// errors.hpp: exception types shared by the semiq library

#pragma once

#include <stdexcept>
#include <string>

namespace semiq {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite or otherwise out-of-domain input.
class DomainError : public Error {
public:
    using Error::Error;
};

/// make_initial could not satisfy one of its constraints.
class InfeasibleConstraint : public Error {
public:
    InfeasibleConstraint(std::string constraint, const std::string& what)
        : Error(what), constraint_(std::move(constraint)) {}
    const std::string& constraint() const noexcept { return constraint_; }

private:
    std::string constraint_;
};

/// Requested a diagonalizing quantity exactly at |delta| == eps.
class CriticalityError : public Error {
public:
    using Error::Error;
};

/// Invalid settings, config documents or sweep specifications.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// The integrator hit a non-finite state or failed to localize an event.
class NumericalFailure : public Error {
public:
    NumericalFailure(double last_good_time, const std::string& what)
        : Error(what), last_good_time_(last_good_time) {}
    double last_good_time() const noexcept { return last_good_time_; }

private:
    double last_good_time_;
};

/// The trajectory diverged before an analysis could collect enough data.
class DivergentTrajectory : public Error {
public:
    DivergentTrajectory(double t_div, const std::string& what) : Error(what), t_div_(t_div) {}
    double divergence_time() const noexcept { return t_div_; }

private:
    double t_div_;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace semiq
