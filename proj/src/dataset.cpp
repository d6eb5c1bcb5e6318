#include "gesture/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gesture/errors.hpp"

namespace gesture {

namespace {

FeatureVector hands(const HandDistances& left, const HandDistances& right) {
  FeatureVector fv;
  std::copy(left.begin(), left.end(), fv.values.begin());
  std::copy(right.begin(), right.end(), fv.values.begin() + kFingersPerHand);
  return fv;
}

constexpr HandDistances kOpen = {0, 1, 1, 1, 1};
constexpr HandDistances kPointing = {0, 1, 0, 0, 0};
constexpr HandDistances kThumbAndIndex = {1, 1, 0, 0, 0};
constexpr HandDistances kThumbUp = {1, 0, 0, 0, 0};

std::vector<std::size_t> indices_of_class(const LabeledDataset& dataset, GestureLabel label) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].label == label) out.push_back(i);
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Hand placement for synthetic frames. Angles are in radians, measured from
// the +x axis, for a right hand; the left hand mirrors them.
constexpr std::array<double, kFingersPerHand> kFingerAngles = {
    std::numbers::pi * 0.95, std::numbers::pi * 0.62, std::numbers::pi * 0.5,
    std::numbers::pi * 0.38, std::numbers::pi * 0.25,
};

HandObservation place_hand(std::span<const double, kFingersPerHand> values, bool right,
                           std::mt19937_64& rng) {
  std::uniform_real_distribution<double> palm_x(right ? 40.0 : -240.0, right ? 240.0 : -40.0);
  std::uniform_real_distribution<double> palm_y(120.0, 320.0);
  std::uniform_real_distribution<double> scale_dist(40.0, 120.0);
  std::uniform_real_distribution<double> tilt_dist(-0.35, 0.35);

  HandObservation hand;
  hand.palm_center = {palm_x(rng), palm_y(rng)};
  const double scale = scale_dist(rng);
  const double tilt = tilt_dist(rng);
  for (std::size_t f = 0; f < kFingersPerHand; ++f) {
    const double base = right ? kFingerAngles[f] : std::numbers::pi - kFingerAngles[f];
    const double angle = base + tilt;
    const double r = values[f] * scale;
    hand.fingertips[f] = {hand.palm_center.x + r * std::cos(angle),
                          hand.palm_center.y + r * std::sin(angle)};
  }
  return hand;
}

}  // namespace

LabeledDataset::LabeledDataset(std::vector<Sample> samples, std::string provenance)
    : samples_(std::move(samples)), provenance_(std::move(provenance)) {
  for (const auto& s : samples_) validate_features(s.features);
}

ClassCounts LabeledDataset::class_counts() const {
  ClassCounts counts{};
  for (const auto& s : samples_) ++counts[index_of(s.label)];
  return counts;
}

std::size_t LabeledDataset::count(GestureLabel label) const {
  return class_counts()[index_of(label)];
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices,
                                      std::string provenance) const {
  std::vector<Sample> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(samples_.at(i));
  return LabeledDataset(std::move(out), std::move(provenance));
}

std::vector<GestureTemplate> default_templates() {
  return {
      {GestureLabel::Init, hands(kOpen, kOpen)},
      {GestureLabel::Alcohol, hands(kOpen, kPointing)},
      {GestureLabel::NonAlcohol, hands(kOpen, {0, 1, 1, 1, 0})},
      {GestureLabel::Food, hands(kOpen, {0, 1, 1, 0, 0})},
      {GestureLabel::Undo, hands(kPointing, kThumbAndIndex)},
      {GestureLabel::Checkout, hands(kThumbAndIndex, kThumbAndIndex)},
      {GestureLabel::Cash, hands(kThumbUp, kThumbUp)},
      {GestureLabel::Credit, hands(kOpen, {1, 1, 0, 0, 1})},
  };
}

ClassCounts default_class_counts() { return {66, 63, 63, 65, 64, 64, 63, 80}; }

std::vector<GestureTemplate> load_templates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  std::vector<GestureTemplate> out;
  try {
    const auto j = nlohmann::json::parse(in);
    if (!j.is_array()) throw ParseError("template file must be a JSON array", 0);
    for (const auto& item : j) {
      const auto name = item.at("label").get<std::string>();
      const auto label = parse_gesture(name);
      if (!label) throw ParseError("unknown gesture label '" + name + "'", 0);
      const auto values = item.at("extension").get<std::vector<double>>();
      out.push_back({*label, make_features(values)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  } catch (const InvalidFrame& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
  return out;
}

void save_templates(const std::filesystem::path& path,
                    std::span<const GestureTemplate> templates) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& t : templates) {
    j.push_back({{"label", std::string(to_string(t.label))}, {"extension", t.extension.values}});
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

LabeledDataset parse_dataset_csv(std::string_view text, const std::string& source) {
  std::vector<Sample> samples;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (line_no == 1 && !fields.empty() && fields[0] == "label") continue;
    if (fields.size() != kFeatureDim + 1) {
      throw ParseError("expected " + std::to_string(kFeatureDim + 1) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    const auto label = parse_gesture(fields[0]);
    if (!label) throw ParseError("unknown gesture label '" + fields[0] + "'", line_no);

    FeatureVector fv;
    for (std::size_t i = 0; i < kFeatureDim; ++i) {
      const std::string& f = fields[i + 1];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw ParseError("malformed number '" + f + "' in column f" + std::to_string(i), line_no);
      }
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw ParseError("value " + f + " in column f" + std::to_string(i) + " outside [0, 1]",
                         line_no);
      }
      fv[i] = v;
    }
    samples.push_back({fv, *label});
  }
  return LabeledDataset(std::move(samples), source);
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    std::vector<Sample> samples;
    std::size_t line_no = 0;
    for (const auto& lf : read_frames_jsonl(path)) {
      ++line_no;
      if (!lf.label) throw ParseError("frame without 'label' in dataset file", line_no);
      samples.push_back({extract_features(lf.frame), *lf.label});
    }
    return LabeledDataset(std::move(samples), path.string());
  }
  return parse_dataset_csv(text, path.string());
}

void save_dataset_csv(const std::filesystem::path& path, const LabeledDataset& dataset) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "label";
  for (std::size_t i = 0; i < kFeatureDim; ++i) out << ",f" << i;
  out << '\n';
  char buf[32];
  for (const auto& s : dataset.samples()) {
    out << to_string(s.label);
    for (double v : s.features.values) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

SyntheticData generate_synthetic(const SyntheticConfig& config) {
  if (!(config.noise_sigma >= 0.0 && config.noise_sigma < 0.5)) {
    throw DatasetError("noise sigma must lie in [0, 0.5)");
  }
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<Sample> samples;
  std::vector<HandFrame> frames;
  for (GestureLabel label : kAllGestures) {
    const std::size_t n = config.counts[index_of(label)];
    if (n == 0) continue;
    const auto tmpl = std::find_if(config.templates.begin(), config.templates.end(),
                                   [&](const GestureTemplate& t) { return t.label == label; });
    if (tmpl == config.templates.end()) {
      throw DatasetError("no template for gesture " + std::string(to_string(label)));
    }
    for (std::size_t i = 0; i < n; ++i) {
      FeatureVector fv = tmpl->extension;
      if (config.noise_sigma > 0.0) {
        for (double& v : fv.values) v = std::clamp(v + config.noise_sigma * noise(rng), 0.0, 1.0);
      }
      HandFrame frame{place_hand(fv.left(), false, rng), place_hand(fv.right(), true, rng)};
      samples.push_back({fv, label});
      frames.push_back(frame);
    }
  }
  std::ostringstream tag;
  tag << "synthetic(seed=" << config.seed << ",sigma=" << config.noise_sigma << ")";
  return {LabeledDataset(std::move(samples), tag.str()), std::move(frames)};
}

Split stratified_split(const LabeledDataset& dataset, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw DatasetError("test fraction must lie in (0, 1)");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (GestureLabel label : kAllGestures) {
    auto idx = indices_of_class(dataset, label);
    if (idx.empty()) continue;
    if (idx.size() < 2) {
      throw DatasetError("class " + std::string(to_string(label)) +
                         " has fewer than 2 samples and cannot be split");
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_test = static_cast<std::size_t>(std::round(idx.size() * test_fraction));
    test_idx.insert(test_idx.end(), idx.begin(), idx.begin() + n_test);
    train_idx.insert(train_idx.end(), idx.begin() + n_test, idx.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {dataset.subset(train_idx, dataset.provenance() + ":train"),
          dataset.subset(test_idx, dataset.provenance() + ":test")};
}

std::vector<Split> kfold_partitions(const LabeledDataset& dataset, std::size_t k,
                                    std::uint64_t seed) {
  if (k < 2) throw DatasetError("k-fold needs k >= 2");
  if (dataset.size() < k) throw DatasetError("k-fold: k exceeds dataset size");

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t base = dataset.size() / k;
  const std::size_t extra = dataset.size() % k;
  std::vector<Split> folds;
  std::size_t begin = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    std::vector<std::size_t> test(order.begin() + begin, order.begin() + begin + len);
    std::vector<std::size_t> train(order.begin(), order.begin() + begin);
    train.insert(train.end(), order.begin() + begin + len, order.end());
    begin += len;
    const std::string tag = dataset.provenance() + ":fold" + std::to_string(f + 1);
    folds.push_back({dataset.subset(train, tag + ":train"), dataset.subset(test, tag + ":test")});
  }
  return folds;
}

LabeledDataset stratified_subset(const LabeledDataset& dataset, std::size_t n,
                                 std::uint64_t seed) {
  if (n > dataset.size()) throw DatasetError("subset size exceeds dataset size");
  const ClassCounts counts = dataset.class_counts();
  const double total = static_cast<double>(dataset.size());

  ClassCounts alloc{};
  std::array<double, kNumGestures> remainder{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < kNumGestures; ++c) {
    const double quota = static_cast<double>(n) * static_cast<double>(counts[c]) / total;
    alloc[c] = static_cast<std::size_t>(std::floor(quota));
    remainder[c] = quota - static_cast<double>(alloc[c]);
    assigned += alloc[c];
  }
  std::array<std::size_t, kNumGestures> order{};
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < n; i = (i + 1) % kNumGestures) {
    const std::size_t c = order[i];
    if (alloc[c] < counts[c]) {
      ++alloc[c];
      ++assigned;
    }
  }
  // Keep every present class represented when the budget allows.
  const auto present = static_cast<std::size_t>(
      std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }));
  if (n >= present) {
    for (std::size_t c = 0; c < kNumGestures; ++c) {
      if (counts[c] == 0 || alloc[c] > 0) continue;
      const auto donor = std::max_element(alloc.begin(), alloc.end()) - alloc.begin();
      --alloc[static_cast<std::size_t>(donor)];
      ++alloc[c];
    }
  }

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> chosen;
  for (GestureLabel label : kAllGestures) {
    auto idx = indices_of_class(dataset, label);
    std::shuffle(idx.begin(), idx.end(), rng);
    chosen.insert(chosen.end(), idx.begin(), idx.begin() + alloc[index_of(label)]);
  }
  std::sort(chosen.begin(), chosen.end());
  return dataset.subset(chosen, dataset.provenance() + ":subset" + std::to_string(n));
}

}  // namespace gesture
