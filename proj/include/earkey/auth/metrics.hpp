#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "earkey/common.hpp"

namespace earkey::auth {

struct Threshold {
  double thr = 0.0;
  double tpr = 0.0;  // at thr
  double fpr = 0.0;  // at thr
  double j = 0.0;    // Youden's J = TPR - FPR at thr
};

namespace detail {

inline double rate_above(const std::vector<double>& scores, double t) {
  long n = 0;
  for (double s : scores)
    if (s > t) ++n;
  return static_cast<double>(n) / scores.size();
}

}  // namespace detail

// Youden calibration: candidate thresholds are midpoints between adjacent
// distinct values of the pooled score set; ties on J resolve toward the
// larger threshold (fewer false accepts). Accepts are strictly score > thr.
inline Threshold calibrate_threshold(const std::vector<double>& genuine,
                                     const std::vector<double>& impostor) {
  if (genuine.empty() || impostor.empty())
    throw ConfigError("calibrate_threshold: both score lists must be nonempty");

  std::set<double> pooled(genuine.begin(), genuine.end());
  pooled.insert(impostor.begin(), impostor.end());
  std::vector<double> values(pooled.begin(), pooled.end());

  // Midpoints between adjacent distinct pooled values, plus sentinels beyond
  // both extremes so accept-all / reject-all operating points stay reachable.
  std::vector<double> candidates{values.front() - 1.0};
  for (size_t i = 1; i < values.size(); ++i)
    candidates.push_back(0.5 * (values[i - 1] + values[i]));
  candidates.push_back(values.back() + 1.0);

  Threshold best;
  bool any = false;
  for (double t : candidates) {
    const double tpr = detail::rate_above(genuine, t);
    const double fpr = detail::rate_above(impostor, t);
    const double j = tpr - fpr;
    if (!any || j > best.j || (j == best.j && t > best.thr)) {
      best = {t, tpr, fpr, j};
      any = true;
    }
  }
  return best;
}

struct RocPoint {
  double thr = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct AuthMetrics {
  Threshold threshold;       // Youden-calibrated operating point
  double eer = 0.0;
  std::vector<RocPoint> roc; // ordered by increasing threshold
};

// ROC over all candidate thresholds plus the equal error rate, with linear
// interpolation between the two ROC points where FPR crosses FNR.
inline AuthMetrics auth_metrics(const std::vector<double>& genuine,
                                const std::vector<double>& impostor) {
  if (genuine.empty() || impostor.empty())
    throw ConfigError("auth_metrics: both score lists must be nonempty");

  AuthMetrics out;
  out.threshold = calibrate_threshold(genuine, impostor);

  std::set<double> pooled(genuine.begin(), genuine.end());
  pooled.insert(impostor.begin(), impostor.end());

  const double lo = *pooled.begin() - 1.0;
  out.roc.push_back({lo, 1.0, 1.0});  // accept everything
  for (double v : pooled) {
    out.roc.push_back(
        {v, detail::rate_above(impostor, v), detail::rate_above(genuine, v)});
  }

  double eer = 0.5;
  for (size_t i = 1; i < out.roc.size(); ++i) {
    const double f0 = out.roc[i - 1].fpr - (1.0 - out.roc[i - 1].tpr);
    const double f1 = out.roc[i].fpr - (1.0 - out.roc[i].tpr);
    if (f0 >= 0.0 && f1 <= 0.0) {
      if (f0 == f1) {
        eer = out.roc[i - 1].fpr;
      } else {
        const double lambda = f0 / (f0 - f1);
        eer = out.roc[i - 1].fpr +
              lambda * (out.roc[i].fpr - out.roc[i - 1].fpr);
      }
      break;
    }
  }
  out.eer = eer;
  return out;
}

}  // namespace earkey::auth
