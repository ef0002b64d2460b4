#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/normal.hpp>

#include "jdsn/error.hpp"
#include "jdsn/fisher/information.hpp"
#include "jdsn/mcstudy/study.hpp"

namespace jdsn::mcstudy {

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

struct NormalityReport {
  std::size_t rows_total = 0;
  std::size_t rows_used = 0;  // converged rows
  Vector mean;
  Matrix covariance;
  Matrix target;  // inverse information
  double relative_cov_error = 0.0;
  std::vector<KsResult> ks;
  double ks_level = 0.01;
  std::vector<std::string> flags;

  int ks_passes() const {
    return static_cast<int>(std::count_if(ks.begin(), ks.end(), [&](const KsResult& k) {
      return k.p_value > ks_level;
    }));
  }
};

inline double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Asymptotic Kolmogorov tail P(K > t).
inline double kolmogorov_tail(double t) {
  if (t <= 0.0) return 1.0;
  if (t < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// One-sample KS against N(0, 1), p-value with the finite-sample
/// correction t = (sqrt(n) + 0.12 + 0.11 / sqrt(n)) D.
inline KsResult ks_test_normal(std::vector<double> x) {
  KsResult r;
  if (x.empty()) return {1.0, 0.0};
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = standard_normal_cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  r.statistic = d;
  const double rn = std::sqrt(n);
  r.p_value = kolmogorov_tail((rn + 0.12 + 0.11 / rn) * d);
  return r;
}

/// Symmetric square root of a positive definite matrix.
inline Matrix symmetric_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

/// Standardized errors of the usable (converged, finite) rows, one per row.
inline Matrix usable_errors(const McTable& t) {
  std::vector<const Vector*> keep;
  for (const auto& r : t.rows) {
    if (!r.failed() && r.converged && r.std_error.allFinite()) keep.push_back(&r.std_error);
  }
  const auto d = static_cast<Eigen::Index>(t.theta0.dim());
  Matrix e(static_cast<Eigen::Index>(keep.size()), d);
  for (std::size_t i = 0; i < keep.size(); ++i) e.row(static_cast<Eigen::Index>(i)) = keep[i]->transpose();
  return e;
}

/// Compares standardized errors (rows of `errors`) against N(0, info^{-1}).
inline NormalityReport normality_from_errors(const Matrix& errors, const Matrix& info,
                                             std::size_t rows_total, std::size_t min_rows = 100) {
  fisher::require_positive_definite(info);
  if (errors.cols() != info.rows()) {
    fail(ErrorKind::Configuration, "standardized errors do not match the information dimension");
  }
  if (static_cast<std::size_t>(errors.rows()) < min_rows) {
    fail(ErrorKind::Study, "normality diagnostics need at least " + std::to_string(min_rows) +
                               " converged rows, got " + std::to_string(errors.rows()));
  }
  NormalityReport rep;
  rep.rows_total = rows_total;
  rep.rows_used = static_cast<std::size_t>(errors.rows());
  rep.mean = errors.colwise().mean().transpose();
  const Matrix centered = errors.rowwise() - rep.mean.transpose();
  rep.covariance = centered.transpose() * centered / static_cast<double>(errors.rows() - 1);
  rep.target = info.inverse();
  rep.target = 0.5 * (rep.target + rep.target.transpose()).eval();
  rep.relative_cov_error = (rep.covariance - rep.target).norm() / rep.target.norm();

  const Matrix root = symmetric_sqrt(info);
  const Matrix white = errors * root;  // rows of (I^{1/2} e)^T
  for (Eigen::Index j = 0; j < white.cols(); ++j) {
    std::vector<double> col(white.col(j).data(), white.col(j).data() + white.rows());
    rep.ks.push_back(ks_test_normal(col));
    const double sd = std::sqrt((white.col(j).array() - white.col(j).mean()).square().mean());
    if (sd == 0.0) rep.flags.push_back("coordinate " + std::to_string(j) + " is constant");
    if (rep.ks.back().p_value <= rep.ks_level) {
      rep.flags.push_back("coordinate " + std::to_string(j) + " fails KS at level " +
                          format_double(rep.ks_level) + " (Bonferroni level for " +
                          std::to_string(white.cols()) + " coordinates: " +
                          format_double(rep.ks_level / static_cast<double>(white.cols())) + ")");
    }
  }
  return rep;
}

inline NormalityReport normality_diagnostics(const McTable& table,
                                             const fisher::FisherInformation& info) {
  return normality_from_errors(usable_errors(table), info.assembled(), table.rows.size());
}

/// QQ data: sorted whitened coordinate against standard normal quantiles.
inline void write_qq_csv(std::ostream& os, const McTable& table, const Matrix& info) {
  const Matrix white = usable_errors(table) * symmetric_sqrt(info);
  const auto m = white.rows();
  os << "coordinate,index,theoretical,empirical\n";
  const boost::math::normal_distribution<double> z;
  for (Eigen::Index j = 0; j < white.cols(); ++j) {
    std::vector<double> col(white.col(j).data(), white.col(j).data() + m);
    std::sort(col.begin(), col.end());
    for (Eigen::Index i = 0; i < m; ++i) {
      const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
      os << j << ',' << i << ',' << format_double(boost::math::quantile(z, p)) << ','
         << format_double(col[static_cast<std::size_t>(i)]) << '\n';
    }
  }
}

}  // namespace jdsn::mcstudy
