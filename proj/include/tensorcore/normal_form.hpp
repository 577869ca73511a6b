#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tensorcore/moa.hpp"

namespace tc {

enum class CgVariant {
  paper,     ///< x + alpha * A p
  standard,  ///< x + alpha * p, textbook conjugate gradients
};

/// Tensor expression over named leaf arrays.
///
/// Leaves are an unordered collection of named operands; node shapes are
/// checked at construction.
class TensorExpr {
 public:
  enum class Kind { leaf, multiply, sum_reduce, outer, matmul, dot, scalar_divide, add, cg_kernel };

  static TensorExpr leaf(std::string name, Shape shape);
  /// Pointwise product of equal shapes.
  static TensorExpr multiply(TensorExpr a, TensorExpr b);
  /// Pointwise sum of equal shapes.
  static TensorExpr add(TensorExpr a, TensorExpr b);
  /// Sum over every axis, producing a scalar.
  static TensorExpr sum_reduce(TensorExpr a);
  static TensorExpr outer(TensorExpr x, TensorExpr y);
  static TensorExpr matmul(TensorExpr a, TensorExpr b);
  static TensorExpr dot(TensorExpr x, TensorExpr y);
  /// Divides every element of `a` by the scalar `b`.
  static TensorExpr scalar_divide(TensorExpr a, TensorExpr b);
  /// One conjugate-gradient position update: matrix, x, r, p.
  static TensorExpr cg_kernel(TensorExpr a, TensorExpr x, TensorExpr r, TensorExpr p, CgVariant variant);

  Kind kind() const { return kind_; }
  const Shape& shape() const { return shape_; }
  const std::string& name() const { return name_; }
  const std::vector<TensorExpr>& children() const { return children_; }
  CgVariant variant() const { return variant_; }

 private:
  TensorExpr(Kind kind, Shape shape, std::vector<TensorExpr> children)
      : kind_(kind), shape_(std::move(shape)), children_(std::move(children)) {}

  Kind kind_ = Kind::leaf;
  Shape shape_;
  std::string name_;
  std::vector<TensorExpr> children_;
  CgVariant variant_ = CgVariant::standard;
};

std::string to_string(TensorExpr::Kind kind);

struct Loop {
  std::string name;
  std::size_t extent = 1;

  friend bool operator==(const Loop&, const Loop&) = default;
};

/// Integer affine combination of loop variables; loop == -1 marks the constant.
class AffineIndex {
 public:
  struct Term {
    int loop = -1;
    std::int64_t coeff = 0;

    friend bool operator==(const Term&, const Term&) = default;
  };

  AffineIndex() = default;
  static AffineIndex var(int loop) { return AffineIndex({{loop, 1}}); }
  static AffineIndex constant(std::int64_t c) { return AffineIndex({{-1, c}}); }

  const std::vector<Term>& terms() const { return terms_; }
  std::int64_t constant_part() const;
  std::int64_t coeff(int loop) const;
  bool depends_on(int loop) const { return coeff(loop) != 0; }

  AffineIndex scaled(std::int64_t factor) const;
  AffineIndex operator+(const AffineIndex& other) const;
  std::int64_t eval(std::span<const std::size_t> loop_values) const;

  /// Replaces each variable v by `replacement[v]` (entries may be empty to keep v).
  AffineIndex substitute(const std::vector<std::vector<Term>>& replacement) const;

  std::string to_string(const std::vector<Loop>& loops) const;

  friend bool operator==(const AffineIndex&, const AffineIndex&) = default;

 private:
  explicit AffineIndex(std::vector<Term> terms);
  std::vector<Term> terms_;
};

/// Access to a named flat array. `coords` keeps the logical index per axis of
/// `shape`; `flat` is its row-major ravel and is what evaluation uses.
struct ArrayRef {
  std::string array;
  Shape shape;
  std::vector<AffineIndex> coords;
  AffineIndex flat;

  static ArrayRef make(std::string array, Shape shape, std::vector<AffineIndex> coords);

  friend bool operator==(const ArrayRef&, const ArrayRef&) = default;
};

struct Node {
  enum class Kind { ref, mul, add, div, sum };

  Kind kind = Kind::ref;
  ArrayRef ref;            // kind == ref
  std::vector<int> loops;  // kind == sum: reduced jointly, outermost first
  std::vector<Node> children;

  static Node make_ref(ArrayRef r);
  static Node make_mul(std::vector<Node> factors);
  static Node make_add(Node a, Node b);
  static Node make_div(Node a, Node b);
  static Node make_sum(std::vector<int> loops, Node body);

  friend bool operator==(const Node&, const Node&) = default;
};

/// Flat affine loop nest: for every point of the free loops,
/// output[flat] = body, where body may contain nested sum reductions.
struct NormalForm {
  ArrayRef output;
  std::vector<Loop> loops;
  std::vector<int> free_loops;
  Node body;

  /// Deepest nesting of sum nodes.
  std::size_t reduction_depth() const;
  /// Canonical text such as `C[i*2+j] = sum(k<2) A[i*2+k]*B[k*2+j]`.
  std::string to_string() const;
  /// Loop header such as `i<2 j<2 k<2`, in loop-id order.
  std::string loops_string() const;

  friend bool operator==(const NormalForm&, const NormalForm&) = default;
};

/// Lowers an expression to a flat affine loop nest. Throws std::invalid_argument
/// naming the offending node for unsupported compositions.
NormalForm normalize(const TensorExpr& e);

/// Loop variables a node reads, excluding loops bound by sums inside it.
std::set<int> free_variables(const Node& node);

/// For every ref, the loops that enclose it (free loops plus enclosing sums).
struct RefSite {
  const ArrayRef* ref;
  std::vector<int> enclosing;
  bool is_output;
};
std::vector<RefSite> reference_sites(const NormalForm& nf);

/// Moves sum-invariant factors out of sums, e.g.
/// sum(j) P[i]*A[i*n+j]*P[j]  ->  P[i]*(sum(j) A[i*n+j]*P[j]).
NormalForm hoist_invariants(const NormalForm& nf);

/// Strip-mines every loop v with tiles[v] < extent into (v_o, v_i);
/// reductions over v become a joint reduction over (v_o, v_i).
NormalForm tile(const NormalForm& nf, const std::vector<std::size_t>& tiles);

/// Rewrites accesses to a matrix operand for the block_layout(rows, cols)
/// storage order. Needs a tiling whose index expressions split cleanly.
NormalForm relayout_blocked(const NormalForm& nf, const std::string& array, std::size_t rows,
                            std::size_t cols);

/// Reuse and reduction structure of a kernel, computed from its normal form.
struct ReuseCensus {
  std::map<std::string, std::size_t> uses_per_input;
  std::size_t uses = 0;  // common value when all inputs agree, otherwise the maximum
  bool uniform = true;
  std::size_t multiplications = 0;
  std::size_t reduction_depth = 0;  // binary-tree levels from products to result
};

ReuseCensus reuse_census(const TensorExpr& e);

enum class KernelKind { dot, matmul, outer, cg };
KernelKind parse_kernel_kind(const std::string& name);
std::string to_string(KernelKind kind);

/// Canonical expression for a kernel on size-n operands named X, Y (vectors),
/// A, B (matrices), and X, R, P, A for conjugate gradients.
TensorExpr kernel_expr(KernelKind kind, std::size_t n, CgVariant variant = CgVariant::standard);

}  // namespace tc
