// errors.hpp — Exception types shared across the library
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace parosc {

// Bad or inconsistent configuration (parameters, config files, missing fields).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Evaluation requested exactly at a branch point of the self-energy.
struct BranchPointError : std::domain_error {
    using std::domain_error::domain_error;
};

// Evaluation at (or too close to) a pole; carries the offending location.
struct PoleError : std::runtime_error {
    std::complex<double> location;
    PoleError(const std::string& msg, std::complex<double> where)
        : std::runtime_error(msg), location(where) {}
};

// Iterative procedure failed to converge (root counts, continuation steps).
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested tolerance not met; carries the best estimate obtained.
struct AccuracyError : std::runtime_error {
    std::complex<double> best_estimate;
    double error_estimate;
    AccuracyError(const std::string& msg, std::complex<double> best, double err)
        : std::runtime_error(msg), best_estimate(best), error_estimate(err) {}
};

// Operation valid only in the stable (or only in the unstable) regime.
struct RegimeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested time lies beyond the finite-lattice reflection horizon.
struct HorizonError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace parosc
