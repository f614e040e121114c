#include "mmffc/genome.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mmffc {

namespace {

Index int_pow(Index base, int exp) {
  Index r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

int decode_integer_gene(double gene, int upper_exclusive) {
  const double f = std::floor(gene);
  if (f < 0.0) return 0;
  if (f >= upper_exclusive) return upper_exclusive - 1;
  return static_cast<int>(f);
}

ExpressionTree::Node build_slot(Index slot, const DecodedProgram& dp, const ProgramShape& shape,
                                const std::vector<Index>& selected) {
  ExpressionTree::Node node;
  const auto n_sel = static_cast<int>(selected.size());
  if (slot != 0) {
    const int link = dp.link_genes[static_cast<std::size_t>(slot - 1)];
    if (shape.slot_depth(slot) == shape.depth || link < shape.n_features) {
      node.terminal = true;
      node.feature = selected[static_cast<std::size_t>(link % n_sel)];
      return node;
    }
  }
  node.terminal = false;
  node.op = shape.operators[static_cast<std::size_t>(dp.op_genes[static_cast<std::size_t>(slot)])];
  node.children.reserve(static_cast<std::size_t>(shape.arity));
  for (int k = 1; k <= shape.arity; ++k) node.children.push_back(build_slot(slot * shape.arity + k, dp, shape, selected));
  return node;
}

template <typename A, typename B>
auto apply_op(Operator op, const A& a, const B& b) {
  using Array = Eigen::ArrayXd;
  Array out;
  switch (op) {
    case Operator::kAdd: out = a + b; break;
    case Operator::kSub: out = a - b; break;
    case Operator::kMul: out = a * b; break;
    case Operator::kDiv: out = (b.abs() < kDivisionGuard).select(a, a / b); break;
  }
  return out;
}

Eigen::ArrayXd eval_node(const ExpressionTree::Node& node, const Eigen::Ref<const Eigen::MatrixXd>& X) {
  if (node.terminal) return X.col(node.feature).array().cwiseMax(-kSaturation).cwiseMin(kSaturation);
  Eigen::ArrayXd acc = eval_node(node.children.front(), X);
  for (std::size_t k = 1; k < node.children.size(); ++k) {
    acc = apply_op(node.op, acc, eval_node(node.children[k], X));
    // NaN cannot arise here: operands are finite and saturated, and the
    // products of two saturated values are at most 1e300.
    acc = acc.cwiseMax(-kSaturation).cwiseMin(kSaturation);
  }
  return acc;
}

int node_depth(const ExpressionTree::Node& node) {
  int d = 0;
  for (const auto& c : node.children) d = std::max(d, 1 + node_depth(c));
  return d;
}

Index node_max_feature(const ExpressionTree::Node& node) {
  if (node.terminal) return node.feature;
  Index m = -1;
  for (const auto& c : node.children) m = std::max(m, node_max_feature(c));
  return m;
}

void render(const ExpressionTree::Node& node, std::ostringstream& out) {
  if (node.terminal) {
    out << 'f' << node.feature;
    return;
  }
  out << '(' << operator_name(node.op);
  for (const auto& c : node.children) {
    out << ' ';
    render(c, out);
  }
  out << ')';
}

class CanonicalParser {
 public:
  explicit CanonicalParser(const std::string& text) : text_(text) {}

  ExpressionTree::Node parse() {
    auto node = parse_node();
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters");
    return node;
  }

 private:
  ExpressionTree::Node parse_node() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    ExpressionTree::Node node;
    if (text_[pos_] == 'f') {
      ++pos_;
      const auto start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("expected feature index");
      node.terminal = true;
      node.feature = std::stol(text_.substr(start, pos_ - start));
      return node;
    }
    if (text_[pos_] != '(') fail("expected '(' or feature");
    ++pos_;
    const auto start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    node.terminal = false;
    node.op = parse_operator(text_.substr(start, pos_ - start));
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) fail("unterminated expression");
      if (text_[pos_] == ')') {
        ++pos_;
        break;
      }
      node.children.push_back(parse_node());
    }
    if (node.children.size() < 2) fail("operator needs at least two operands");
    return node;
  }

  void skip_space() {
    while (pos_ < text_.size() && text_[pos_] == ' ') ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw GenomeError("cannot parse expression '" + text_ + "': " + what + " at offset " + std::to_string(pos_));
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string operator_name(Operator op) {
  switch (op) {
    case Operator::kAdd: return "add";
    case Operator::kSub: return "sub";
    case Operator::kMul: return "mul";
    case Operator::kDiv: return "div";
  }
  return "?";
}

Operator parse_operator(const std::string& name) {
  if (name == "add") return Operator::kAdd;
  if (name == "sub") return Operator::kSub;
  if (name == "mul") return Operator::kMul;
  if (name == "div" || name == "pdiv") return Operator::kDiv;
  throw GenomeError("unknown operator: " + name);
}

Index dimension(Index n_features, int depth, int arity) {
  if (n_features < 1 || depth < 1 || arity < 2) throw GenomeError("dimension needs L >= 1, PD >= 1, NO >= 2");
  Index links = 0;
  for (int i = 1; i <= depth; ++i) links += int_pow(arity, i);
  Index ops = 0;
  for (int j = 0; j < depth; ++j) ops += int_pow(arity, j);
  return n_features + links + ops;
}

void ProgramShape::validate() const {
  if (n_features < 1) throw GenomeError("program shape needs at least one feature");
  if (depth < 1) throw GenomeError("program depth must be >= 1");
  if (arity < 2) throw GenomeError("operator arity must be >= 2");
  if (operators.empty()) throw GenomeError("operator set is empty");
}

Index ProgramShape::n_op_slots() const {
  Index n = 0;
  for (int j = 0; j < depth; ++j) n += int_pow(arity, j);
  return n;
}

Index ProgramShape::n_link_slots() const {
  Index n = 0;
  for (int i = 1; i <= depth; ++i) n += int_pow(arity, i);
  return n;
}

Eigen::VectorXd ProgramShape::lower_bounds() const { return Eigen::VectorXd::Zero(dimension()); }

Eigen::VectorXd ProgramShape::upper_bounds() const {
  Eigen::VectorXd ub(dimension());
  ub.segment(mask_offset(), n_features).setOnes();
  ub.segment(op_offset(), n_op_slots()).setConstant(static_cast<double>(operators.size()));
  ub.segment(link_offset(), n_link_slots()).setConstant(2.0 * static_cast<double>(n_features));
  return ub;
}

int ProgramShape::slot_depth(Index slot) const {
  int d = 0;
  Index level_end = 1;
  Index level_size = 1;
  while (slot >= level_end) {
    level_size *= arity;
    level_end += level_size;
    ++d;
  }
  return d;
}

std::vector<Index> DecodedProgram::selected_features() const {
  std::vector<Index> out;
  for (std::size_t k = 0; k < mask.size(); ++k)
    if (mask[k]) out.push_back(static_cast<Index>(k));
  return out;
}

bool DecodedProgram::has_selected_feature() const {
  return std::any_of(mask.begin(), mask.end(), [](std::uint8_t b) { return b != 0; });
}

int ExpressionTree::depth() const { return node_depth(root); }

Index ExpressionTree::max_feature() const { return node_max_feature(root); }

Position random_position(const ProgramShape& shape, Rng& rng) {
  const Eigen::VectorXd ub = shape.upper_bounds();
  Position x(ub.size());
  for (Index d = 0; d < x.size(); ++d) x[d] = rng.uniform(0.0, ub[d]);
  return x;
}

DecodedProgram decode(const Eigen::Ref<const Eigen::VectorXd>& position, const ProgramShape& shape) {
  if (position.size() != shape.dimension())
    throw GenomeError("position length " + std::to_string(position.size()) + " does not match shape dimension " +
                      std::to_string(shape.dimension()));
  DecodedProgram dp;
  dp.mask.resize(static_cast<std::size_t>(shape.n_features));
  for (Index k = 0; k < shape.n_features; ++k) dp.mask[static_cast<std::size_t>(k)] = position[shape.mask_offset() + k] >= 0.5;

  const auto n_ops = static_cast<int>(shape.operators.size());
  dp.op_genes.resize(static_cast<std::size_t>(shape.n_op_slots()));
  for (Index k = 0; k < shape.n_op_slots(); ++k)
    dp.op_genes[static_cast<std::size_t>(k)] = decode_integer_gene(position[shape.op_offset() + k], n_ops);

  const auto n_links = static_cast<int>(2 * shape.n_features);
  dp.link_genes.resize(static_cast<std::size_t>(shape.n_link_slots()));
  for (Index k = 0; k < shape.n_link_slots(); ++k)
    dp.link_genes[static_cast<std::size_t>(k)] = decode_integer_gene(position[shape.link_offset() + k], n_links);
  return dp;
}

ExpressionTree build_tree(const DecodedProgram& program, const ProgramShape& shape) {
  if (static_cast<Index>(program.mask.size()) != shape.n_features ||
      static_cast<Index>(program.op_genes.size()) != shape.n_op_slots() ||
      static_cast<Index>(program.link_genes.size()) != shape.n_link_slots())
    throw GenomeError("decoded program does not match shape");
  const auto selected = program.selected_features();
  if (selected.empty()) throw EmptyMaskError();
  return ExpressionTree{build_slot(0, program, shape, selected)};
}

Eigen::VectorXd evaluate_feature(const ExpressionTree& tree, const Eigen::Ref<const Eigen::MatrixXd>& X) {
  if (tree.max_feature() >= X.cols()) throw GenomeError("expression references a feature beyond the matrix");
  return eval_node(tree.root, X).matrix();
}

Index hamming(const DecodedProgram& a, const DecodedProgram& b) {
  if (a.mask.size() != b.mask.size() || a.op_genes.size() != b.op_genes.size() ||
      a.link_genes.size() != b.link_genes.size())
    throw GenomeError("hamming distance needs programs of the same shape");
  Index d = 0;
  for (std::size_t k = 0; k < a.mask.size(); ++k) d += a.mask[k] != b.mask[k];
  for (std::size_t k = 0; k < a.op_genes.size(); ++k) d += a.op_genes[k] != b.op_genes[k];
  for (std::size_t k = 0; k < a.link_genes.size(); ++k) d += a.link_genes[k] != b.link_genes[k];
  return d;
}

std::string canonical_string(const ExpressionTree& tree) {
  std::ostringstream out;
  render(tree.root, out);
  return out.str();
}

ExpressionTree parse_canonical(const std::string& text) { return ExpressionTree{CanonicalParser(text).parse()}; }

}  // namespace mmffc
