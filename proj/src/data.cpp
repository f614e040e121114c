#include "mmffc/data.hpp"

#include "mmffc/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace mmffc {

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

std::vector<IndexList> indices_by_class(const Dataset& ds) {
  std::vector<IndexList> by_class(static_cast<std::size_t>(ds.n_classes()));
  for (Index i = 0; i < ds.n_samples(); ++i) by_class[static_cast<std::size_t>(ds.y[i])].push_back(i);
  return by_class;
}

}  // namespace

Dataset Dataset::subset(const IndexList& rows) const {
  Dataset out;
  out.feature_names = feature_names;
  out.class_names = class_names;
  out.X.resize(static_cast<Index>(rows.size()), X.cols());
  out.y.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= n_samples()) throw DataError("row index out of range: " + std::to_string(rows[r]));
    out.X.row(static_cast<Index>(r)) = X.row(rows[r]);
    out.y.push_back(y[static_cast<std::size_t>(rows[r])]);
  }
  return out;
}

void Dataset::validate() const {
  if (n_features() < 1) throw DataError("dataset needs at least one feature");
  if (n_samples() < 2) throw DataError("dataset needs at least two samples");
  if (n_classes() < 2) throw DataError("single-class label column");
  if (static_cast<Index>(feature_names.size()) != n_features()) throw DataError("feature name count mismatch");
  if (static_cast<Index>(y.size()) != n_samples()) throw DataError("label count mismatch");
  if (!X.allFinite()) throw DataError("non-finite feature value");
  std::vector<int> seen(static_cast<std::size_t>(n_classes()), 0);
  for (int label : y) {
    if (label < 0 || label >= n_classes()) throw DataError("label out of range");
    seen[static_cast<std::size_t>(label)] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw DataError("class without samples");
}

Dataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw DataError("empty file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_row(line);

  std::size_t label_pos = header.size() - 1;
  if (!label_column.empty()) {
    auto it = std::find(header.begin(), header.end(), label_column);
    if (it == header.end()) throw DataError("label column not found: " + label_column);
    label_pos = static_cast<std::size_t>(it - header.begin());
  }
  if (header.size() < 2) throw DataError("need at least one feature column and a label column");

  Dataset ds;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != label_pos) ds.feature_names.push_back(header[c]);

  std::vector<double> values;
  std::unordered_map<std::string, int> class_ids;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_row(line);
    if (cells.size() != header.size())
      throw DataError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " cells, got " + std::to_string(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_pos) {
        auto [it, inserted] = class_ids.try_emplace(cells[c], static_cast<int>(ds.class_names.size()));
        if (inserted) ds.class_names.push_back(cells[c]);
        ds.y.push_back(it->second);
        continue;
      }
      double v = 0.0;
      if (!parse_real(cells[c], v))
        throw DataError(path + ":" + std::to_string(line_no) + ": non-numeric value '" + cells[c] + "' in column " +
                        header[c]);
      values.push_back(v);
    }
  }
  if (ds.y.empty()) throw DataError("empty file: " + path);

  const auto n = static_cast<Index>(ds.y.size());
  const auto l = static_cast<Index>(ds.feature_names.size());
  ds.X = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values.data(), n, l);
  if (ds.n_classes() < 2) throw DataError("single-class label column in " + path);
  ds.validate();
  return ds;
}

Split stratified_split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw DataError("test_fraction must lie in (0, 1)");
  Rng rng = Rng::stream(seed, StreamTag::kSplit);
  Split split;
  for (auto& members : indices_by_class(ds)) {
    if (members.size() < 2) throw DataError("stratified split needs at least two samples per class");
    rng.shuffle(members);
    const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(members.size()) * test_fraction));
    split.test.insert(split.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.insert(split.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
  }
  if (split.train.empty()) throw DataError("test_fraction leaves the training set empty");
  if (split.test.empty()) throw DataError("test_fraction leaves the test set empty");
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

Partition partition_iid(const Dataset& ds, int n_clients, std::uint64_t seed) {
  if (n_clients < 2) throw DataError("federation requires M >= 2 clients");
  if (n_clients > ds.n_samples()) throw DataError("more clients than samples");
  IndexList order(static_cast<std::size_t>(ds.n_samples()));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng = Rng::stream(seed, StreamTag::kPartition, {0});
  rng.shuffle(order);

  Partition p;
  p.seed = seed;
  p.mode = PartitionMode::kIid;
  for (int m = 0; m < n_clients; ++m) p.clients[m];
  for (std::size_t k = 0; k < order.size(); ++k) p.clients[static_cast<int>(k % static_cast<std::size_t>(n_clients))].push_back(order[k]);
  for (auto& [id, rows] : p.clients) std::sort(rows.begin(), rows.end());
  return p;
}

Partition partition_noniid(const Dataset& ds, int n_clients, int shards_per_client, std::uint64_t seed) {
  if (n_clients < 2) throw DataError("federation requires M >= 2 clients");
  if (shards_per_client < 1) throw DataError("shards_per_client must be >= 1");
  const Index n_shards = static_cast<Index>(n_clients) * shards_per_client;
  if (n_shards > ds.n_samples())
    throw DataError("too many shards: " + std::to_string(n_shards) + " shards for " + std::to_string(ds.n_samples()) +
                    " samples");

  IndexList sorted(static_cast<std::size_t>(ds.n_samples()));
  std::iota(sorted.begin(), sorted.end(), Index{0});
  std::stable_sort(sorted.begin(), sorted.end(),
                   [&](Index a, Index b) { return ds.y[static_cast<std::size_t>(a)] < ds.y[static_cast<std::size_t>(b)]; });

  // Shard k covers [k*N/S, (k+1)*N/S): sizes differ by at most one.
  std::vector<Index> shard_order(static_cast<std::size_t>(n_shards));
  std::iota(shard_order.begin(), shard_order.end(), Index{0});
  Rng rng = Rng::stream(seed, StreamTag::kPartition, {1});
  rng.shuffle(shard_order);

  Partition p;
  p.seed = seed;
  p.mode = PartitionMode::kNonIid;
  const Index n = ds.n_samples();
  for (Index k = 0; k < n_shards; ++k) {
    const Index shard = shard_order[static_cast<std::size_t>(k)];
    const Index begin = shard * n / n_shards;
    const Index end = (shard + 1) * n / n_shards;
    auto& rows = p.clients[static_cast<int>(k / shards_per_client)];
    rows.insert(rows.end(), sorted.begin() + begin, sorted.begin() + end);
  }
  for (auto& [id, rows] : p.clients) std::sort(rows.begin(), rows.end());
  return p;
}

std::vector<int> discretize_equal_frequency(const Eigen::Ref<const Eigen::VectorXd>& values, int bins) {
  if (bins < 2) throw DataError("bin count must be >= 2");
  if (values.size() == 0) throw DataError("cannot discretize an empty vector");
  if (!values.allFinite()) throw DataError("cannot discretize non-finite values");

  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  // Cut points; a value v lands in the bin counting the cuts strictly below v.
  std::vector<double> cuts;
  if (static_cast<int>(distinct.size()) < bins) {
    cuts.assign(distinct.begin(), distinct.end() - 1);
  } else {
    const auto n = static_cast<long long>(sorted.size());
    for (long long k = 1; k < bins; ++k) {
      const long long pos = (k * n + bins - 1) / bins - 1;
      const double cut = sorted[static_cast<std::size_t>(pos)];
      if (cut < distinct.back() && (cuts.empty() || cut > cuts.back())) cuts.push_back(cut);
    }
  }

  std::vector<int> ids(static_cast<std::size_t>(values.size()));
  for (Index i = 0; i < values.size(); ++i)
    ids[static_cast<std::size_t>(i)] =
        static_cast<int>(std::lower_bound(cuts.begin(), cuts.end(), values[i]) - cuts.begin());
  return ids;
}

std::string to_string(PartitionMode mode) { return mode == PartitionMode::kIid ? "iid" : "noniid"; }

PartitionMode parse_partition_mode(const std::string& s) {
  if (s == "iid") return PartitionMode::kIid;
  if (s == "noniid" || s == "non-iid") return PartitionMode::kNonIid;
  throw DataError("unknown partition mode: " + s);
}

}  // namespace mmffc
