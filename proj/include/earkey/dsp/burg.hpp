#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "earkey/common.hpp"

namespace earkey::dsp {

struct BurgResult {
  // Prediction coefficients: x_hat[n] = sum_k ar[k] * x[n-1-k].
  std::vector<double> ar;
  // Lattice reflection coefficients; |reflection[m]| <= 1 by construction.
  std::vector<double> reflection;
  double final_error = 0.0;  // residual prediction-error power, >= 0
};

// Burg's recursion. Chosen over Yule-Walker for its stability on the short
// boosted windows this pipeline feeds it.
inline BurgResult burg(std::span<const double> x, int order) {
  const long n = static_cast<long>(x.size());
  if (order < 1) throw ConfigError("burg: order must be >= 1");
  if (n <= 2 * order)
    throw ConfigError("burg: window must be longer than twice the order");

  double energy = 0.0;
  for (double v : x) energy += v * v;
  if (energy <= 0.0) throw DataError("burg: zero-variance window (silent capture)");

  BurgResult res;
  res.ar.assign(order, 0.0);
  res.reflection.assign(order, 0.0);

  // Polynomial form a[0..m-1] with x[n] + sum a[k] x[n-1-k] = e[n].
  std::vector<double> a(order, 0.0), a_prev(order, 0.0);
  std::vector<double> f(x.begin(), x.end());  // forward errors
  std::vector<double> b(x.begin(), x.end());  // backward errors
  double err = energy / n;

  for (int m = 1; m <= order; ++m) {
    double num = 0.0, den = 0.0;
    for (long i = m; i < n; ++i) {
      num += f[i] * b[i - 1];
      den += f[i] * f[i] + b[i - 1] * b[i - 1];
    }
    const double k = den > 0.0 ? -2.0 * num / den : 0.0;
    res.reflection[m - 1] = k;

    a_prev = a;
    a[m - 1] = k;
    for (int i = 0; i < m - 1; ++i) a[i] = a_prev[i] + k * a_prev[m - 2 - i];

    for (long i = n - 1; i >= m; --i) {
      const double fi = f[i];
      f[i] = fi + k * b[i - 1];
      b[i] = b[i - 1] + k * fi;
    }
    err *= (1.0 - k * k);
  }

  for (int i = 0; i < order; ++i) res.ar[i] = -a[i];
  res.final_error = err < 0.0 ? 0.0 : err;
  return res;
}

inline std::vector<double> ar_features(std::span<const double> window,
                                       int order = 200) {
  return burg(window, order).ar;
}

}  // namespace earkey::dsp
