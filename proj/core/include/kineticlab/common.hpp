#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace kb {

using cplx = std::complex<double>;

// Thrown for contract violations (bad arguments, mismatched grids, ...).
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace kb
