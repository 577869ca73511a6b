#include <doctest.h>

#include "tensorcore/normal_form.hpp"

using namespace tc;

namespace {

TensorExpr vec(const char* name, std::size_t n) { return TensorExpr::leaf(name, Shape{n}); }
TensorExpr mat(const char* name, std::size_t n) { return TensorExpr::leaf(name, Shape{n, n}); }

}  // namespace

TEST_CASE("kernel normal forms") {
  CHECK(normalize(kernel_expr(KernelKind::dot, 2)).to_string() == "S[0] = sum(j<2) X[j]*Y[j]");
  CHECK(normalize(kernel_expr(KernelKind::matmul, 2)).to_string() == "C[i*2+j] = sum(k<2) A[i*2+k]*B[k*2+j]");
  CHECK(normalize(kernel_expr(KernelKind::outer, 2)).to_string() == "C[i*2+j] = X[i]*Y[j]");
  CHECK(normalize(kernel_expr(KernelKind::cg, 2)).to_string() ==
        "X[2+k] = X[k] + P[k]*(sum(j<2) R[j]^2)/(sum(i<2) sum(j<2) P[i]*A[i*2+j]*P[j])");
  CHECK(normalize(kernel_expr(KernelKind::cg, 2, CgVariant::paper)).to_string() ==
        "X[2+k] = X[k] + (sum(j<2) A[k*2+j]*P[j])*(sum(j<2) R[j]^2)/(sum(i<2) sum(j<2) P[i]*A[i*2+j]*P[j])");
  CHECK(normalize(kernel_expr(KernelKind::matmul, 3)).loops_string() == "i<3 j<3 k<3");
}

TEST_CASE("composed expressions") {
  const auto nf = normalize(TensorExpr::sum_reduce(TensorExpr::outer(vec("X", 3), vec("Y", 3))));
  CHECK(nf.reduction_depth() == 1);
  CHECK(nf.free_loops.empty());

  const auto mv = normalize(TensorExpr::matmul(mat("A", 3), vec("V", 3)));
  CHECK(mv.output.shape == Shape{3});
  CHECK(mv.reduction_depth() == 1);

  const auto chain = normalize(TensorExpr::matmul(TensorExpr::matmul(mat("A", 2), mat("B", 2)), mat("C", 2)));
  CHECK(chain.reduction_depth() == 2);

  const auto scaled = normalize(TensorExpr::scalar_divide(
      TensorExpr::add(vec("X", 4), vec("Y", 4)), TensorExpr::dot(vec("X", 4), vec("Y", 4))));
  CHECK(scaled.output.shape == Shape{4});
  CHECK(scaled.body.kind == Node::Kind::div);
}

TEST_CASE("shape and composition errors") {
  CHECK_THROWS_AS(TensorExpr::multiply(vec("X", 2), vec("Y", 3)), std::invalid_argument);
  CHECK_THROWS_AS(TensorExpr::matmul(mat("A", 2), mat("B", 3)), std::invalid_argument);
  CHECK_THROWS_AS(TensorExpr::dot(vec("X", 2), mat("A", 2)), std::invalid_argument);
  const auto cg = kernel_expr(KernelKind::cg, 2);
  CHECK_THROWS_AS(normalize(TensorExpr::add(cg, vec("Z", 2))), std::invalid_argument);
  CHECK_THROWS_AS(parse_kernel_kind("conv"), std::invalid_argument);
}

TEST_CASE("hoisting moves invariant factors out of sums") {
  const auto nf = hoist_invariants(normalize(kernel_expr(KernelKind::cg, 2)));
  CHECK(nf.to_string() ==
        "X[2+k] = X[k] + P[k]*(sum(j<2) R[j]^2)/(sum(i<2) P[i]*(sum(j<2) A[i*2+j]*P[j]))");
  const auto mm = normalize(kernel_expr(KernelKind::matmul, 3));
  CHECK(hoist_invariants(mm) == mm);
}

TEST_CASE("free variables and reference sites") {
  const auto nf = normalize(kernel_expr(KernelKind::matmul, 2));
  CHECK(free_variables(nf.body) == std::set<int>{0, 1});
  const auto sites = reference_sites(nf);
  std::size_t outputs = 0;
  for (const auto& s : sites) {
    if (s.is_output) {
      ++outputs;
      CHECK(s.enclosing.size() == 2);
    } else {
      CHECK(s.enclosing.size() == 3);
    }
  }
  CHECK(outputs == 1);
  CHECK(sites.size() == 3);
}

TEST_CASE("tiling strip-mines loops") {
  const auto mm = normalize(kernel_expr(KernelKind::matmul, 4));
  const auto t = tile(mm, {2, 4, 2});
  CHECK(t.loops_string() == "i_o<2 i_i<2 j<4 k_o<2 k_i<2");
  CHECK(t.to_string() == "C[i_o*8+i_i*4+j] = sum(k_o<2,k_i<2) A[i_o*8+i_i*4+k_o*2+k_i]*B[k_o*8+k_i*4+j]");
  CHECK(tile(mm, {4, 4, 4}) == mm);
  CHECK_THROWS_AS(tile(mm, {3, 4, 4}), std::invalid_argument);
  CHECK_THROWS_AS(tile(mm, {2, 2}), std::invalid_argument);
}

TEST_CASE("blocked relayout") {
  const auto t = tile(normalize(kernel_expr(KernelKind::matmul, 4)), {2, 4, 2});
  CHECK(relayout_blocked(t, "A", 2, 2).to_string() ==
        "C[i_o*8+i_i*4+j] = sum(k_o<2,k_i<2) A[i_o*8+k_o*4+i_i*2+k_i]*B[k_o*8+k_i*4+j]");
  CHECK_THROWS_AS(relayout_blocked(t, "Q", 2, 2), std::invalid_argument);
  CHECK_THROWS_AS(relayout_blocked(t, "B", 2, 2), std::invalid_argument);
}

TEST_CASE("reuse census") {
  const auto dot = reuse_census(kernel_expr(KernelKind::dot, 4));
  CHECK(dot.uses == 1);
  CHECK(dot.multiplications == 4);
  CHECK(dot.reduction_depth == 2);
  const auto mm = reuse_census(kernel_expr(KernelKind::matmul, 2));
  CHECK(mm.uses == 2);
  CHECK(mm.multiplications == 8);
  CHECK(mm.reduction_depth == 1);
  const auto outer = reuse_census(kernel_expr(KernelKind::outer, 4));
  CHECK(outer.uses == 4);
  CHECK(outer.multiplications == 16);
  CHECK(outer.reduction_depth == 0);
  CHECK(outer.uniform);
  for (std::size_t n = 1; n <= 8; ++n) {
    REQUIRE(reuse_census(kernel_expr(KernelKind::matmul, n)).uses == n);
    REQUIRE(reuse_census(kernel_expr(KernelKind::outer, n)).multiplications == n * n);
  }
}
