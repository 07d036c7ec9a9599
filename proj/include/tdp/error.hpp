#pragma once

#include <stdexcept>
#include <string>

namespace tdp {

// Error taxonomy shared by every module. Each maps onto the closest
// standard exception so callers can catch either way.

struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct BoundsError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Misuse of the host/target discipline: use-after-free, constant writes
// while a launch is in flight.
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

// Nonphysical state detected by a kernel (e.g. nonpositive LB density).
struct NumericalDomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// A kernel body threw inside a worker; the launch as a whole failed.
struct LaunchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tdp
