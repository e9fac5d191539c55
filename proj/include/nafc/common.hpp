#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>

namespace nafc {

using Vec2 = Eigen::Vector2d;

/// Failure categories shared by every module. The CLI maps them onto exit
/// codes, so keep the list short.
enum class ErrorKind {
    InvalidInput,
    DegenerateEdge,
    OutOfRange,
    Divergence,
    Config,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline bool is_finite(const Vec2& v) { return std::isfinite(v.x()) && std::isfinite(v.y()); }

}  // namespace nafc
