#include "mmffc/fitness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mmffc {

namespace {

double entropy_of_counts(std::span<const Index> counts, Index total) {
  if (total == 0) return 0.0;
  double h = 0.0;
  const double inv = 1.0 / static_cast<double>(total);
  for (Index c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) * inv;
    h -= p * std::log2(p);
  }
  return h;
}

void check_labels(std::span<const int> labels, int n_classes) {
  if (n_classes < 1) throw std::invalid_argument("class count must be positive");
  for (int y : labels)
    if (y < 0 || y >= n_classes) throw std::invalid_argument("label out of range");
}

}  // namespace

BinnedFeature BinnedFeature::from_ids(std::vector<int> ids) {
  BinnedFeature bf;
  bf.bin_count = ids.empty() ? 1 : *std::max_element(ids.begin(), ids.end()) + 1;
  bf.bin_ids = std::move(ids);
  return bf;
}

double entropy(std::span<const int> labels, int n_classes) {
  if (labels.empty()) throw std::invalid_argument("entropy of an empty label vector");
  check_labels(labels, n_classes);
  std::vector<Index> counts(static_cast<std::size_t>(n_classes), 0);
  for (int y : labels) ++counts[static_cast<std::size_t>(y)];
  return entropy_of_counts(counts, static_cast<Index>(labels.size()));
}

double feature_entropy(const BinnedFeature& feature) {
  std::vector<Index> counts(static_cast<std::size_t>(feature.bin_count), 0);
  for (int b : feature.bin_ids) {
    if (b < 0 || b >= feature.bin_count) throw std::invalid_argument("bin id out of range");
    ++counts[static_cast<std::size_t>(b)];
  }
  return entropy_of_counts(counts, static_cast<Index>(feature.bin_ids.size()));
}

double conditional_entropy(const BinnedFeature& feature, std::span<const int> labels, int n_classes) {
  if (feature.bin_ids.size() != labels.size()) throw std::invalid_argument("feature and label lengths differ");
  if (labels.empty()) throw std::invalid_argument("conditional entropy of empty input");
  check_labels(labels, n_classes);

  // Joint table, bins in rows.
  const auto c = static_cast<std::size_t>(n_classes);
  std::vector<Index> joint(static_cast<std::size_t>(feature.bin_count) * c, 0);
  std::vector<Index> marginal(static_cast<std::size_t>(feature.bin_count), 0);
  for (std::size_t n = 0; n < labels.size(); ++n) {
    const int b = feature.bin_ids[n];
    if (b < 0 || b >= feature.bin_count) throw std::invalid_argument("bin id out of range");
    ++joint[static_cast<std::size_t>(b) * c + static_cast<std::size_t>(labels[n])];
    ++marginal[static_cast<std::size_t>(b)];
  }
  double h = 0.0;
  const double total = static_cast<double>(labels.size());
  for (std::size_t b = 0; b < marginal.size(); ++b) {
    if (marginal[b] == 0) continue;
    h += static_cast<double>(marginal[b]) / total *
         entropy_of_counts(std::span<const Index>(joint).subspan(b * c, c), marginal[b]);
  }
  return h;
}

double info_gain(const BinnedFeature& feature, std::span<const int> labels, int n_classes) {
  const double ig = entropy(labels, n_classes) - conditional_entropy(feature, labels, n_classes);
  return std::max(ig, 0.0);
}

double gain_ratio(const BinnedFeature& feature, std::span<const int> labels, int n_classes) {
  const double hf = feature_entropy(feature);
  if (hf <= 0.0) return 0.0;
  return info_gain(feature, labels, n_classes) / hf;
}

double igr(const Eigen::Ref<const Eigen::VectorXd>& values, std::span<const int> labels, int n_classes, int bins) {
  if (values.size() == 0) throw std::invalid_argument("igr of an empty feature");
  if (static_cast<std::size_t>(values.size()) != labels.size())
    throw std::invalid_argument("feature and label lengths differ");
  return gain_ratio(BinnedFeature::from_ids(discretize_equal_frequency(values, bins)), labels, n_classes);
}

}  // namespace mmffc
