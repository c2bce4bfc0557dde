#ifndef FLOQEP_CORE_COMMON_HPP
#define FLOQEP_CORE_COMMON_HPP

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace floqep {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx iu{0.0, 1.0};

enum class Errc {
  invalid_argument,
  config,
  numerical,
  certification,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

// Compensated (Kahan) accumulation; the dual-lattice sums are long and
// conditionally convergent, so plain accumulation drifts.
template <typename T>
class KahanSum {
 public:
  void add(const T& x) {
    const T y = x - comp_;
    const T t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  const T& value() const { return sum_; }

 private:
  T sum_{};
  T comp_{};
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline const char* version() { return FLOQEP_VERSION_STR; }

}  // namespace floqep

#endif
