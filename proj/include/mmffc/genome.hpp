#pragma once

#include "mmffc/data.hpp"
#include "mmffc/rng.hpp"

#include <Eigen/Dense>

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmffc {

enum class Operator : int { kAdd = 0, kSub = 1, kMul = 2, kDiv = 3 };

std::string operator_name(Operator op);
Operator parse_operator(const std::string& name);

class GenomeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by build_tree when no feature is selected by the mask.
class EmptyMaskError : public GenomeError {
 public:
  EmptyMaskError() : GenomeError("empty feature mask") {}
};

/// Program string length: L + sum_{i=1..PD} NO^i + sum_{j=0..PD-1} NO^j.
Index dimension(Index n_features, int depth, int arity);

/// Shape of a fixed-length program string.
///
/// The position vector has three blocks: a feature mask (one gene per
/// original feature, in [0, 1]), one operator gene per internal slot of the
/// full arity-ary tree of the given depth (in [0, n_ops]) and one link gene
/// per non-root slot (in [0, 2L]). Slots are numbered breadth-first with the
/// root at 0, so the children of slot p are p*arity+1 .. p*arity+arity.
struct ProgramShape {
  Index n_features = 1;
  int depth = 3;
  int arity = 2;
  std::vector<Operator> operators{Operator::kAdd, Operator::kSub, Operator::kMul, Operator::kDiv};

  void validate() const;

  Index n_op_slots() const;
  Index n_link_slots() const;
  Index dimension() const { return mmffc::dimension(n_features, depth, arity); }

  Index mask_offset() const { return 0; }
  Index op_offset() const { return n_features; }
  Index link_offset() const { return n_features + n_op_slots(); }

  /// Per-gene closed box.
  Eigen::VectorXd lower_bounds() const;
  Eigen::VectorXd upper_bounds() const;

  int slot_depth(Index slot) const;
};

using Position = Eigen::VectorXd;

struct DecodedProgram {
  std::vector<std::uint8_t> mask;
  std::vector<int> op_genes;
  std::vector<int> link_genes;

  std::vector<Index> selected_features() const;
  bool has_selected_feature() const;

  friend bool operator==(const DecodedProgram&, const DecodedProgram&) = default;
};

/// One constructed feature. Leaves reference original feature columns.
struct ExpressionTree {
  struct Node {
    bool terminal = true;
    Operator op = Operator::kAdd;
    Index feature = 0;
    std::vector<Node> children;

    friend bool operator==(const Node&, const Node&) = default;
  };

  Node root;

  int depth() const;
  Index max_feature() const;

  friend bool operator==(const ExpressionTree&, const ExpressionTree&) = default;
};

Position random_position(const ProgramShape& shape, Rng& rng);

/// Clamp every gene into its block's closed range.
template <typename Derived>
void clamp_position(Eigen::MatrixBase<Derived>& x, const ProgramShape& shape) {
  x = x.cwiseMax(shape.lower_bounds()).cwiseMin(shape.upper_bounds());
}

DecodedProgram decode(const Eigen::Ref<const Eigen::VectorXd>& position, const ProgramShape& shape);

/// Throws EmptyMaskError when the mask selects nothing.
ExpressionTree build_tree(const DecodedProgram& program, const ProgramShape& shape);

/// Column-wise evaluation with protected division and saturation at
/// +-1e150, so the result is finite for finite input.
Eigen::VectorXd evaluate_feature(const ExpressionTree& tree, const Eigen::Ref<const Eigen::MatrixXd>& X);

/// Hamming distance over the concatenated decoded genes.
Index hamming(const DecodedProgram& a, const DecodedProgram& b);

/// Prefix rendering, e.g. "(div (add f3 f7) f1)".
std::string canonical_string(const ExpressionTree& tree);

/// Inverse of canonical_string.
ExpressionTree parse_canonical(const std::string& text);

inline constexpr double kSaturation = 1e150;
inline constexpr double kDivisionGuard = 1e-6;

}  // namespace mmffc
