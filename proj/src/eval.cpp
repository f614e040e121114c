#include "mmffc/eval.hpp"

#include "mmffc/fitness.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace mmffc {

namespace {

constexpr double kMinGain = 1e-12;

int majority(const std::vector<Index>& rows, const Labels& y, int n_classes) {
  std::vector<Index> counts(static_cast<std::size_t>(n_classes), 0);
  for (Index r : rows) ++counts[static_cast<std::size_t>(y[static_cast<std::size_t>(r)])];
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

struct Candidate {
  double ratio = 0.0;
  Index feature = -1;
  double threshold = 0.0;
};

class Grower {
 public:
  Grower(const TransformedDataset& data, int min_leaf, std::vector<DecisionTree::Node>& nodes)
      : data_(data), min_leaf_(min_leaf), nodes_(nodes) {}

  int grow(const std::vector<Index>& rows) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    nodes_[static_cast<std::size_t>(id)].label = majority(rows, data_.y, data_.n_classes);

    if (is_pure(rows) || static_cast<Index>(rows.size()) < 2 * static_cast<Index>(min_leaf_)) return id;
    const Candidate best = best_split(rows);
    if (best.feature < 0) return id;

    std::vector<Index> left, right;
    for (Index r : rows) (data_.X(r, best.feature) <= best.threshold ? left : right).push_back(r);
    const int l = grow(left);
    const int rgt = grow(right);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.leaf = false;
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = rgt;
    return id;
  }

 private:
  bool is_pure(const std::vector<Index>& rows) const {
    const int first = data_.y[static_cast<std::size_t>(rows.front())];
    return std::all_of(rows.begin(), rows.end(), [&](Index r) { return data_.y[static_cast<std::size_t>(r)] == first; });
  }

  Candidate best_split(const std::vector<Index>& rows) const {
    Candidate best;
    const auto n = rows.size();
    Labels labels(n);
    for (std::size_t k = 0; k < n; ++k) labels[k] = data_.y[static_cast<std::size_t>(rows[k])];

    std::vector<double> values(n);
    std::vector<double> distinct;
    for (Index f = 0; f < data_.X.cols(); ++f) {
      for (std::size_t k = 0; k < n; ++k) values[k] = data_.X(rows[k], f);
      distinct = values;
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

      for (std::size_t k = 0; k + 1 < distinct.size(); ++k) {
        const double threshold = 0.5 * (distinct[k] + distinct[k + 1]);
        // The split membership is a two-bin feature, scored like any other.
        BinnedFeature side;
        side.bin_count = 2;
        side.bin_ids.resize(n);
        Index n_left = 0;
        for (std::size_t s = 0; s < n; ++s) {
          side.bin_ids[s] = values[s] <= threshold ? 0 : 1;
          n_left += side.bin_ids[s] == 0;
        }
        if (n_left < min_leaf_ || static_cast<Index>(n) - n_left < min_leaf_) continue;
        if (info_gain(side, labels, data_.n_classes) <= kMinGain) continue;
        const double ratio = gain_ratio(side, labels, data_.n_classes);
        if (ratio > best.ratio) best = {ratio, f, threshold};
      }
    }
    return best;
  }

  const TransformedDataset& data_;
  int min_leaf_;
  std::vector<DecisionTree::Node>& nodes_;
};

}  // namespace

TransformedDataset transform(const Dataset& ds, const std::vector<ExpressionTree>& features) {
  if (features.empty()) throw std::invalid_argument("transform needs at least one feature");
  TransformedDataset out;
  out.X.resize(ds.n_samples(), static_cast<Index>(features.size()));
  for (std::size_t k = 0; k < features.size(); ++k) {
    if (features[k].max_feature() >= ds.n_features())
      throw std::out_of_range("constructed feature references f" + std::to_string(features[k].max_feature()) +
                              " but the dataset has " + std::to_string(ds.n_features()) + " features");
    out.X.col(static_cast<Index>(k)) = evaluate_feature(features[k], ds.X);
  }
  out.y = ds.y;
  out.n_classes = ds.n_classes();
  return out;
}

int DecisionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  if (nodes_.empty()) throw std::logic_error("predict on an untrained tree");
  const Node* node = &nodes_.front();
  while (!node->leaf) node = &nodes_[static_cast<std::size_t>(row[node->feature] <= node->threshold ? node->left : node->right)];
  return node->label;
}

int DecisionTree::depth() const {
  std::vector<int> d(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (!nodes_[i].leaf) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return deepest;
}

DecisionTree train_c45(const TransformedDataset& train, int min_leaf) {
  if (train.X.rows() == 0) throw std::invalid_argument("cannot train on an empty set");
  if (train.X.cols() == 0) throw std::invalid_argument("cannot train without features");
  if (min_leaf < 1) throw std::invalid_argument("min_leaf must be >= 1");
  DecisionTree tree;
  std::vector<Index> rows(static_cast<std::size_t>(train.X.rows()));
  std::iota(rows.begin(), rows.end(), Index{0});
  Grower(train, min_leaf, tree.nodes_).grow(rows);
  return tree;
}

double accuracy(const DecisionTree& tree, const TransformedDataset& test) {
  if (test.X.rows() == 0) throw std::invalid_argument("accuracy on an empty test set");
  Index correct = 0;
  for (Index r = 0; r < test.X.rows(); ++r) correct += tree.predict(test.X.row(r)) == test.y[static_cast<std::size_t>(r)];
  return 100.0 * static_cast<double>(correct) / static_cast<double>(test.X.rows());
}

double feature_reduction(int total_features, int constructed_features) {
  if (total_features < 1) throw std::invalid_argument("total feature count must be >= 1");
  if (constructed_features < 0) throw std::invalid_argument("constructed feature count must be >= 0");
  return static_cast<double>(total_features - constructed_features) / static_cast<double>(total_features) * 100.0;
}

double baseline_no_fc(const Dataset& ds, const Split& split, int min_leaf) {
  const auto tree = train_c45(TransformedDataset::of(ds.subset(split.train)), min_leaf);
  return accuracy(tree, TransformedDataset::of(ds.subset(split.test)));
}

}  // namespace mmffc
