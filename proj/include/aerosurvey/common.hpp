#ifndef AEROSURVEY_COMMON_HPP
#define AEROSURVEY_COMMON_HPP

#include <Eigen/Core>

#include <limits>
#include <stdexcept>
#include <string>

namespace aerosurvey
{

using Vec3 = Eigen::Vector3d;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_unbounded(double v) { return !(v < kInf); }

/// Thrown when a document or parameter set fails validation.
class InvalidParameterError : public std::invalid_argument
{
public:
    explicit InvalidParameterError(const std::string &what)
        : std::invalid_argument(what) {}
};

/// Thrown when no feasible plan exists under the given limits.
class InfeasibleError : public std::runtime_error
{
public:
    explicit InfeasibleError(const std::string &what)
        : std::runtime_error(what) {}
};

} // namespace aerosurvey

#endif
