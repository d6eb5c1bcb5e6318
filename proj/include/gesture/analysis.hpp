#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <utility>

#include "gesture/dataset.hpp"
#include "gesture/feature_pipeline.hpp"

namespace gesture {

using Vec10 = std::array<double, kFeatureDim>;
using Mat10 = std::array<Vec10, kFeatureDim>;

/// Eigenpairs of a symmetric matrix, eigenvalues descending. Row i of
/// `vectors` is the unit eigenvector of `values[i]`.
struct SymmetricEigen {
  Vec10 values{};
  Mat10 vectors{};
};

/// Cyclic Jacobi rotations until the off-diagonal mass vanishes.
SymmetricEigen jacobi_eigen(const Mat10& symmetric);

/// Sample covariance (divisor n - 1) of the rows.
Mat10 covariance(std::span<const FeatureVector> rows, const Vec10& mean);

struct PcaProjection {
  Vec10 mean{};
  /// Principal axes, descending eigenvalue. The largest-magnitude entry of
  /// each axis is positive.
  std::array<Vec10, 2> components{};
  std::array<double, 2> eigenvalues{};

  std::pair<double, double> project(const FeatureVector& x) const;
};

/// Throws AnalysisError with fewer than 3 samples or zero total variance.
PcaProjection fit_pca(std::span<const FeatureVector> rows);
PcaProjection fit_pca(const LabeledDataset& dataset);

/// CSV `pc1,pc2,label`, one row per sample.
void write_projection_csv(const std::filesystem::path& path, const PcaProjection& pca,
                          const LabeledDataset& dataset);

}  // namespace gesture
