#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace navrl {

#ifdef NAVRL_STORAGE_FLOAT32
using real = float;
#else
using real = double;
#endif

inline constexpr double kPi = 3.14159265358979323846;

// Bad user input (config files, CLI flags, stage files). The CLI maps this to
// exit code 1; everything else lands on 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] inline void fail(const std::string& msg) {
  throw std::runtime_error(msg);
}

[[noreturn]] inline void fail_config(const std::string& msg) {
  throw ConfigError(msg);
}

inline void check(bool ok, const std::string& msg) {
  if (!ok) fail(msg);
}

// Wraps to (-pi, pi]; the boundary itself maps to +pi.
inline double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

inline double clamp(double x, double lo, double hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}

// sign(x) * log(1 + |x|), its inverse, both odd and monotonic.
inline double symlog(double x) {
  return x >= 0.0 ? std::log1p(x) : -std::log1p(-x);
}

inline double symexp(double x) {
  return x >= 0.0 ? std::expm1(x) : -std::expm1(-x);
}

}  // namespace navrl
