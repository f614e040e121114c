#pragma once

#include "mmffc/data.hpp"
#include "mmffc/genome.hpp"

#include <Eigen/Dense>

#include <vector>

namespace mmffc {

/// Samples projected onto constructed features, one column per feature.
struct TransformedDataset {
  Eigen::MatrixXd X;
  Labels y;
  int n_classes = 0;

  static TransformedDataset of(const Dataset& ds) { return {ds.X, ds.y, ds.n_classes()}; }
};

TransformedDataset transform(const Dataset& ds, const std::vector<ExpressionTree>& features);

/// Binary-split decision tree grown by maximum gain ratio, unpruned.
class DecisionTree {
 public:
  struct Node {
    bool leaf = true;
    int label = 0;
    Index feature = 0;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
  };

  int predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  int depth() const;

 private:
  friend DecisionTree train_c45(const TransformedDataset&, int);
  std::vector<Node> nodes_;
};

/// Candidate thresholds are midpoints between consecutive distinct values.
/// Growth stops on a pure node, fewer than 2 * min_leaf samples, or when
/// no split with both sides >= min_leaf has positive gain.
DecisionTree train_c45(const TransformedDataset& train, int min_leaf = 2);

/// Percentage of correctly classified rows.
double accuracy(const DecisionTree& tree, const TransformedDataset& test);

/// (TF - CF) / TF * 100; negative when more features are constructed than
/// there were originally.
double feature_reduction(int total_features, int constructed_features);

/// Test accuracy of a tree trained on the original features.
double baseline_no_fc(const Dataset& ds, const Split& split, int min_leaf = 2);

}  // namespace mmffc
