#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmffc {

using Index = Eigen::Index;
using Labels = std::vector<int>;
using IndexList = std::vector<Index>;

class DataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Samples in rows, features in columns, labels in [0, c).
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  Eigen::MatrixXd X;
  Labels y;

  Index n_samples() const { return X.rows(); }
  Index n_features() const { return X.cols(); }
  int n_classes() const { return static_cast<int>(class_names.size()); }

  /// Row subset; class names and label ids are kept as in the parent so
  /// that every subset shares one label space.
  Dataset subset(const IndexList& rows) const;

  /// Throws DataError if any invariant is broken.
  void validate() const;
};

struct Split {
  IndexList train;
  IndexList test;
};

enum class PartitionMode { kIid, kNonIid };

struct Partition {
  std::map<int, IndexList> clients;
  std::uint64_t seed = 0;
  PartitionMode mode = PartitionMode::kIid;

  int n_clients() const { return static_cast<int>(clients.size()); }
};

/// Loads a headed CSV. The label column defaults to the last column; labels
/// are numbered in order of first appearance.
Dataset load_csv(const std::string& path, const std::string& label_column = "");

/// Stratified hold-out split. Deterministic for a fixed seed.
Split stratified_split(const Dataset& ds, double test_fraction, std::uint64_t seed);

/// Shuffle then deal round-robin. Client sizes differ by at most one.
Partition partition_iid(const Dataset& ds, int n_clients, std::uint64_t seed);

/// Sort by label, cut into n_clients * shards_per_client contiguous shards
/// and hand each client shards_per_client of them at random.
Partition partition_noniid(const Dataset& ds, int n_clients, int shards_per_client, std::uint64_t seed);

/// Equal-frequency binning. Boundaries are the lower empirical quantiles
/// sorted[ceil(k * n / bins) - 1]; a value equal to a boundary goes to the
/// lower bin, and empty bins are dropped so ids are contiguous. With fewer
/// distinct values than bins each distinct value gets its own bin.
std::vector<int> discretize_equal_frequency(const Eigen::Ref<const Eigen::VectorXd>& values, int bins);

std::string to_string(PartitionMode mode);
PartitionMode parse_partition_mode(const std::string& s);

}  // namespace mmffc
