#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gesture/feature_pipeline.hpp"
#include "gesture/gesture_label.hpp"

namespace gesture {

struct Sample {
  FeatureVector features;
  GestureLabel label;

  friend bool operator==(const Sample&, const Sample&) = default;
};

using ClassCounts = std::array<std::size_t, kNumGestures>;

class LabeledDataset {
 public:
  LabeledDataset() = default;
  explicit LabeledDataset(std::vector<Sample> samples, std::string provenance = {});

  const std::vector<Sample>& samples() const noexcept { return samples_; }
  const std::string& provenance() const noexcept { return provenance_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }

  ClassCounts class_counts() const;
  std::size_t count(GestureLabel label) const;

  /// Samples at the given positions, in the given order.
  LabeledDataset subset(std::span<const std::size_t> indices, std::string provenance) const;

 private:
  std::vector<Sample> samples_;
  std::string provenance_;
};

/// Canonical noise-free feature vector for one gesture.
struct GestureTemplate {
  GestureLabel label;
  FeatureVector extension;
};

/// The shipped vocabulary (mirrors data/templates.json).
std::vector<GestureTemplate> default_templates();

/// Per-class sample counts of the reference recording session (528 total).
ClassCounts default_class_counts();

std::vector<GestureTemplate> load_templates(const std::filesystem::path& path);
void save_templates(const std::filesystem::path& path, std::span<const GestureTemplate> templates);

/// Loads a feature CSV (`label,f0..f9`) or a labeled frame JSONL file. The
/// format is sniffed from the first non-blank character.
LabeledDataset load_dataset(const std::filesystem::path& path);

/// Writes the feature CSV with 17 significant digits per value.
void save_dataset_csv(const std::filesystem::path& path, const LabeledDataset& dataset);

/// Parses feature CSV text; `source` names the input in the provenance tag.
LabeledDataset parse_dataset_csv(std::string_view text, const std::string& source);

struct SyntheticConfig {
  std::uint64_t seed = 42;
  ClassCounts counts = default_class_counts();
  double noise_sigma = 0.05;
  std::vector<GestureTemplate> templates = default_templates();
};

struct SyntheticData {
  LabeledDataset dataset;
  /// One raw frame per sample, in the same order, consistent with the
  /// noisy per-hand distances of that sample.
  std::vector<HandFrame> frames;
};

/// Samples are grouped by class in code order. Deterministic for a seed.
SyntheticData generate_synthetic(const SyntheticConfig& config);

struct Split {
  LabeledDataset train;
  LabeledDataset test;
};

/// Per class, round(count * test_fraction) samples (half away from zero)
/// go to the test set.
Split stratified_split(const LabeledDataset& dataset, double test_fraction, std::uint64_t seed);

/// k shuffled folds whose sizes differ by at most one. Element i holds the
/// i-th fold as test set and the rest as training set.
std::vector<Split> kfold_partitions(const LabeledDataset& dataset, std::size_t k,
                                    std::uint64_t seed);

/// Stratified draw of exactly `n` samples (largest-remainder allocation,
/// every present class keeps at least one sample when n allows it).
LabeledDataset stratified_subset(const LabeledDataset& dataset, std::size_t n, std::uint64_t seed);

}  // namespace gesture
