#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace ris {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InfeasibleTau : SolverError {
    explicit InfeasibleTau(double tau)
        : SolverError("step radius must be positive, got " + std::to_string(tau)) {}
};

struct NoConvergence : SolverError {
    NoConvergence(const std::string& what, double residual, int iterations,
                  Eigen::VectorXd best_iterate = {})
        : SolverError(what),
          best_residual(residual),
          iterations(iterations),
          best(std::move(best_iterate))
    {
    }
    double best_residual;
    int iterations;
    Eigen::VectorXd best;
};

struct Unbounded : SolverError {
    using SolverError::SolverError;
};

struct StallLimitExceeded : SolverError {
    StallLimitExceeded(const std::string& what, long run_length)
        : SolverError(what), run_length(run_length) {}
    long run_length;
};

struct DegenerateTrajectory : SolverError {
    using SolverError::SolverError;
};

struct OutOfRange : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct BadConfig : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

#define RIS_REQUIRE(expr, msg)                                                           \
    do {                                                                                 \
        if (!(expr)) {                                                                   \
            throw std::runtime_error(std::string(__FILE__) + ":" +                       \
                                     std::to_string(__LINE__) + ": " + (msg));           \
        }                                                                                \
    } while (0)

} // namespace ris
