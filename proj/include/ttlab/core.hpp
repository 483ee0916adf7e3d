/** @file core.hpp
 *  Exact number types, error hierarchy and small numeric helpers shared by all modules.
 */
#pragma once

#include <gmpxx.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ttlab {

using Rat = mpq_class;
using BigInt = mpz_class;
using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Inputs mix cubes or tiles drawn from different shifted grids.
struct ShiftMismatch : Error {
  using Error::Error;
};
/// A numerical grid is too coarse to resolve the requested object.
struct ResolutionError : Error {
  using Error::Error;
};
/// Malformed arguments (invalid tuples, thetas, tiles, ...).
struct InvalidArgument : Error {
  using Error::Error;
};
/// An object that must belong to a collection does not.
struct NotInCollection : Error {
  using Error::Error;
};
/// Exhaustive routine refused because the instance is too large.
struct TooLarge : Error {
  using Error::Error;
};

/// Exact 2^e as a rational.
inline Rat pow2(long e) {
  Rat r(1);
  if (e >= 0)
    mpz_mul_2exp(r.get_num_mpz_t(), r.get_num_mpz_t(), static_cast<mp_bitcnt_t>(e));
  else
    mpz_mul_2exp(r.get_den_mpz_t(), r.get_den_mpz_t(), static_cast<mp_bitcnt_t>(-e));
  return r;
}

inline BigInt floor_rat(const Rat& r) {
  BigInt q;
  mpz_fdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return q;
}

inline BigInt ceil_rat(const Rat& r) {
  BigInt q;
  mpz_cdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return q;
}

/// Fractional part in [0,1).
inline Rat frac_rat(const Rat& r) { return r - Rat(floor_rat(r)); }

inline double to_double(const Rat& r) { return r.get_d(); }

/// Exact conversion of a finite double.
inline Rat from_double(double x) {
  Rat r;
  mpq_set_d(r.get_mpq_t(), x);
  return r;
}

inline Rat rabs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

inline std::string to_string(const Rat& r) { return r.get_str(); }

/// e^{2 pi i t}.
inline cplx cis2pi(double t) {
  const double a = 2.0 * kPi * t;
  return {std::cos(a), std::sin(a)};
}

/// sin(pi z)/(pi z) with the removable singularity handled.
inline double sinc_pi(double z) {
  const double a = kPi * z;
  if (std::abs(a) < 1e-4) return 1.0 - a * a / 6.0 + a * a * a * a / 120.0;
  return std::sin(a) / a;
}

}  // namespace ttlab
