#include "gesture/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <vector>

#include "gesture/errors.hpp"

namespace gesture {

namespace {

constexpr std::size_t N = kFeatureDim;
constexpr int kMaxSweeps = 100;

double off_diagonal_norm2(const Mat10& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j)
      if (i != j) s += a[i][j] * a[i][j];
  return s;
}

}  // namespace

SymmetricEigen jacobi_eigen(const Mat10& symmetric) {
  Mat10 a = symmetric;
  Mat10 v{};  // columns accumulate eigenvectors
  for (std::size_t i = 0; i < N; ++i) v[i][i] = 1.0;

  double scale = 0.0;
  for (const auto& row : a)
    for (double x : row) scale += x * x;
  const double tolerance = std::max(scale, 1e-300) * 1e-30;

  for (int sweep = 0; sweep < kMaxSweeps && off_diagonal_norm2(a) > tolerance; ++sweep) {
    for (std::size_t p = 0; p + 1 < N; ++p) {
      for (std::size_t q = p + 1; q < N; ++q) {
        const double apq = a[p][q];
        if (apq == 0.0) continue;
        // Rotation angle that zeroes a[p][q].
        const double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < N; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < N; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < N; ++k) {
          const double vkp = v[k][p];
          const double vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::array<std::size_t, N> order{};
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a[i][i] > a[j][j]; });

  SymmetricEigen out;
  for (std::size_t r = 0; r < N; ++r) {
    const std::size_t col = order[r];
    out.values[r] = a[col][col];
    for (std::size_t k = 0; k < N; ++k) out.vectors[r][k] = v[k][col];
  }
  return out;
}

Mat10 covariance(std::span<const FeatureVector> rows, const Vec10& mean) {
  Mat10 cov{};
  for (const auto& x : rows) {
    for (std::size_t i = 0; i < N; ++i) {
      const double di = x[i] - mean[i];
      for (std::size_t j = i; j < N; ++j) cov[i][j] += di * (x[j] - mean[j]);
    }
  }
  const double denom = static_cast<double>(rows.size()) - 1.0;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = i; j < N; ++j) {
      cov[i][j] /= denom;
      cov[j][i] = cov[i][j];
    }
  }
  return cov;
}

std::pair<double, double> PcaProjection::project(const FeatureVector& x) const {
  double a = 0.0;
  double b = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double d = x[i] - mean[i];
    a += components[0][i] * d;
    b += components[1][i] * d;
  }
  return {a, b};
}

PcaProjection fit_pca(std::span<const FeatureVector> rows) {
  if (rows.size() < 3) throw AnalysisError("PCA needs at least 3 samples");
  for (const auto& x : rows)
    for (double v : x.values)
      if (!std::isfinite(v)) throw AnalysisError("PCA input contains non-finite values");

  PcaProjection pca;
  for (const auto& x : rows)
    for (std::size_t i = 0; i < N; ++i) pca.mean[i] += x[i];
  for (double& m : pca.mean) m /= static_cast<double>(rows.size());

  const Mat10 cov = covariance(rows, pca.mean);
  double trace = 0.0;
  for (std::size_t i = 0; i < N; ++i) trace += cov[i][i];
  if (trace <= 0.0) throw AnalysisError("PCA input has zero variance");

  const SymmetricEigen eig = jacobi_eigen(cov);
  for (std::size_t c = 0; c < 2; ++c) {
    Vec10 axis = eig.vectors[c];
    const auto largest = std::max_element(axis.begin(), axis.end(), [](double x, double y) {
      return std::abs(x) < std::abs(y);
    });
    if (*largest < 0.0)
      for (double& v : axis) v = -v;
    pca.components[c] = axis;
    // Rank-deficient data can produce tiny negative round-off.
    pca.eigenvalues[c] = std::max(eig.values[c], 0.0);
  }
  return pca;
}

PcaProjection fit_pca(const LabeledDataset& dataset) {
  std::vector<FeatureVector> rows;
  rows.reserve(dataset.size());
  for (const auto& s : dataset.samples()) rows.push_back(s.features);
  return fit_pca(rows);
}

void write_projection_csv(const std::filesystem::path& path, const PcaProjection& pca,
                          const LabeledDataset& dataset) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "pc1,pc2,label\n";
  char buf[64];
  for (const auto& s : dataset.samples()) {
    const auto [a, b] = pca.project(s.features);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,", a, b);
    out << buf << to_string(s.label) << '\n';
  }
}

}  // namespace gesture
