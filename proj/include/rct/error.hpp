#pragma once

#include <stdexcept>
#include <string>

namespace rct {

/// Raised when an operation's precondition or numerical contract fails.
/// The message is one of the short fixed phrases used across the toolkit
/// (e.g. "density positivity violated"), optionally followed by detail.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

namespace msg {
inline constexpr const char* kForcingFailed = "forcing evaluation failed";
inline constexpr const char* kDensityPositivity = "density positivity violated";
inline constexpr const char* kOutOfRange = "out of range";
inline constexpr const char* kOrderingPrecondition = "ordering precondition failed";
inline constexpr const char* kEnvelopeViolated = "envelope violated";
inline constexpr const char* kOutsideDomain = "outside domain";
inline constexpr const char* kHorizonNotCertified = "horizon not certified";
inline constexpr const char* kKernelSingularity = "kernel singularity";
inline constexpr const char* kQuadratureNotConverged = "quadrature not converged";
inline constexpr const char* kInvalidArgument = "invalid argument";
}  // namespace msg

// Densities at or below this are treated as zero.
inline constexpr double kRhoFloor = 1e-300;

}  // namespace rct
