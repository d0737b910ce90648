#pragma once

#include <cmath>

// Shared between the scalar and AVX2 backends. The central-branch polynomial
// evaluation order here is the contract both backends follow (fma Horner,
// r = 0.180625 - q*q as mul-then-sub, final q * (num/den)); tail branches are
// always evaluated by the scalar routine in both backends.
namespace qrep::kernels::detail {

// Wichura's PPND16 rational approximations (double precision).
inline constexpr double kA[8] = {
    3.3871328727963666080e0,  1.3314166789178437745e2,
    1.9715909503065514427e3,  1.3731693765509461125e4,
    4.5921953931549871457e4,  6.7265770927008700853e4,
    3.3430575583588128105e4,  2.5090809287301226727e3,
};
inline constexpr double kB[8] = {
    1.0,                      4.2313330701600911252e1,
    6.8718700749205790830e2,  5.3941960214247511077e3,
    2.1213794301586595867e4,  3.9307895800092710610e4,
    2.8729085735721942674e4,  5.2264952788528545610e3,
};
inline constexpr double kC[8] = {
    1.42343711074968357734e0,  4.63033784615654529590e0,
    5.76949722146069140550e0,  3.64784832476320460504e0,
    1.27045825245236838258e0,  2.41780725177450611770e-1,
    2.27238449892691845833e-2, 7.74545014278341407640e-4,
};
inline constexpr double kD[8] = {
    1.0,                       2.05319162663775882187e0,
    1.67638483018380384940e0,  6.89767334985100004550e-1,
    1.48103976427480074590e-1, 1.51986665636164571966e-2,
    5.47593808499534494600e-4, 1.05075007164441684324e-9,
};
inline constexpr double kE[8] = {
    6.65790464350110377720e0,  5.46378491116411436990e0,
    1.78482653991729133580e0,  2.96560571828504891230e-1,
    2.65321895265761230930e-2, 1.24266094738807843860e-3,
    2.71155556874348757815e-5, 2.01033439929228813265e-7,
};
inline constexpr double kF[8] = {
    1.0,                       5.99832206555887937690e-1,
    1.36929880922735805310e-1, 1.48753612908506148525e-2,
    7.86869131145613259100e-4, 1.84631831751005468180e-5,
    1.42151175831644588870e-7, 2.04426310338993978564e-15,
};

inline double horner8(const double (&c)[8], double r) {
  double acc = c[7];
  acc = std::fma(acc, r, c[6]);
  acc = std::fma(acc, r, c[5]);
  acc = std::fma(acc, r, c[4]);
  acc = std::fma(acc, r, c[3]);
  acc = std::fma(acc, r, c[2]);
  acc = std::fma(acc, r, c[1]);
  acc = std::fma(acc, r, c[0]);
  return acc;
}

inline double icdf_central(double q) {
  double r = 0.180625 - q * q;
  return q * (horner8(kA, r) / horner8(kB, r));
}

// |q| > 0.425; returns the quantile with sign applied.
inline double icdf_tail(double p, double q) {
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double z;
  if (r <= 5.0) {
    r -= 1.6;
    z = horner8(kC, r) / horner8(kD, r);
  } else {
    r -= 5.0;
    z = horner8(kE, r) / horner8(kF, r);
  }
  return q < 0.0 ? -z : z;
}

inline double icdf_scalar(double p) {
  if (!(p > 0.0 && p < 1.0)) return std::nan("");
  double q = p - 0.5;
  if (std::fabs(q) <= 0.425) return icdf_central(q);
  return icdf_tail(p, q);
}

}  // namespace qrep::kernels::detail
