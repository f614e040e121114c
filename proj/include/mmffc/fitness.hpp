#pragma once

#include "mmffc/data.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace mmffc {

/// A discretized feature: one bin id per sample.
struct BinnedFeature {
  std::vector<int> bin_ids;
  int bin_count = 1;

  static BinnedFeature from_ids(std::vector<int> ids);
};

// Entropies are in bits. 0 log 0 is taken as 0.

double entropy(std::span<const int> labels, int n_classes);

double feature_entropy(const BinnedFeature& feature);

double conditional_entropy(const BinnedFeature& feature, std::span<const int> labels, int n_classes);

double info_gain(const BinnedFeature& feature, std::span<const int> labels, int n_classes);

/// IG / H(f) on an already binned feature; 0 for a single-bin feature.
double gain_ratio(const BinnedFeature& feature, std::span<const int> labels, int n_classes);

/// Information gain ratio of a real-valued feature after equal-frequency
/// binning into at most `bins` bins.
double igr(const Eigen::Ref<const Eigen::VectorXd>& values, std::span<const int> labels, int n_classes, int bins);

}  // namespace mmffc
