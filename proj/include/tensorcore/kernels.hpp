#pragma once

#include <cstddef>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tensorcore/backend.hpp"
#include "tensorcore/moa.hpp"
#include "tensorcore/normal_form.hpp"
#include "tensorcore/schedule.hpp"

namespace tc {

enum class Execution {
  serial,
  threaded,  ///< one task per worker chunk; same tree, same bits
};

enum class CgForm { direct, normal };

CgForm parse_cg_form(const std::string& name);
CgVariant parse_cg_variant(const std::string& name);
std::string to_string(CgForm form);
std::string to_string(CgVariant variant);

namespace detail {

template <class B>
typename B::partial_type fold_left(B& be, std::vector<typename B::partial_type>& items, std::size_t begin,
                                   std::size_t end) {
  typename B::partial_type acc = std::move(items[begin]);
  for (std::size_t i = begin + 1; i < end; ++i) acc = be.combine(std::move(acc), items[i]);
  return acc;
}

// Reduces one worker chunk: level by level, then whatever remains left to right.
template <class B>
typename B::partial_type reduce_chunk(B& be, std::vector<typename B::partial_type> level,
                                      const std::vector<std::size_t>& fan_in) {
  for (std::size_t f : fan_in) {
    if (f <= 1 || level.size() <= 1) continue;
    std::vector<typename B::partial_type> next;
    next.reserve((level.size() + f - 1) / f);
    for (std::size_t b = 0; b < level.size(); b += f) next.push_back(fold_left(be, level, b, std::min(b + f, level.size())));
    level = std::move(next);
  }
  return fold_left(be, level, 0, level.size());
}

}  // namespace detail

/// Reduces `terms` (given in natural order) under `schedule`. Worker chunks
/// are reduced independently and then folded in chunk order, so threaded
/// execution reproduces the serial result bit for bit.
template <Backend B>
typename B::partial_type reduce(B& be, std::vector<typename B::partial_type> terms, const Schedule& schedule,
                                Execution exec = Execution::serial) {
  schedule.validate(terms.size());
  if (terms.empty()) return be.zero_partial();

  using P = typename B::partial_type;
  std::vector<std::vector<P>> chunks;
  for (auto [begin, end] : schedule.worker_ranges()) {
    if (begin == end) continue;
    std::vector<P> chunk;
    chunk.reserve(end - begin);
    for (std::size_t t = begin; t < end; ++t) chunk.push_back(std::move(terms[schedule.permutation[t]]));
    chunks.push_back(std::move(chunk));
  }

  std::vector<P> results;
  results.reserve(chunks.size());
  if (exec == Execution::threaded && chunks.size() > 1) {
    std::vector<B> locals(chunks.size(), be);
    for (B& local : locals) local.reset_census();
    std::vector<std::future<P>> futures;
    for (std::size_t c = 0; c < chunks.size(); ++c) {
      futures.push_back(std::async(std::launch::async, [&, c] {
        return detail::reduce_chunk(locals[c], std::move(chunks[c]), schedule.fan_in);
      }));
    }
    for (auto& f : futures) results.push_back(f.get());
    for (const B& local : locals) be.absorb_census(local);
  } else {
    for (auto& chunk : chunks) results.push_back(detail::reduce_chunk(be, std::move(chunk), schedule.fan_in));
  }
  return detail::fold_left(be, results, 0, results.size());
}

template <Backend B>
using ArrayOf = DenseArray<typename B::value_type>;

template <Backend B>
typename B::value_type run_dot(const ArrayOf<B>& x, const ArrayOf<B>& y, B& be, const Schedule& schedule,
                               Execution exec = Execution::serial) {
  if (x.shape().rank() != 1 || x.shape() != y.shape()) {
    throw std::invalid_argument("dot: expected vectors of equal length, got " + x.shape().to_string() + " and " +
                                y.shape().to_string());
  }
  std::vector<typename B::partial_type> terms;
  terms.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) terms.push_back(be.product(x[i], y[i]));
  return be.finish(reduce(be, std::move(terms), schedule, exec));
}

/// Matrix-matrix or matrix-vector product; every output element is a run_dot
/// of a row of `a` with a column of `b` under `schedule`.
template <Backend B>
ArrayOf<B> run_matmul(const ArrayOf<B>& a, const ArrayOf<B>& b, B& be, const Schedule& schedule,
                      Execution exec = Execution::serial) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.rank() != 2 || (sb.rank() != 1 && sb.rank() != 2) || sa[1] != sb[0]) {
    throw std::invalid_argument("matmul: incompatible shapes " + sa.to_string() + " and " + sb.to_string());
  }
  const std::size_t m = sa[0];
  const std::size_t k = sa[1];
  const std::size_t p = sb.rank() == 2 ? sb[1] : 1;
  std::vector<typename B::value_type> out;
  out.reserve(m * p);
  std::vector<typename B::value_type> row(k, be.zero());
  std::vector<typename B::value_type> col(k, be.zero());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = 0; t < k; ++t) row[t] = a[i * k + t];
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t t = 0; t < k; ++t) col[t] = b[t * p + j];
      out.push_back(run_dot(ArrayOf<B>(Shape{k}, row), ArrayOf<B>(Shape{k}, col), be, schedule, exec));
    }
  }
  Shape s = sb.rank() == 2 ? Shape{m, p} : Shape{m};
  return ArrayOf<B>(std::move(s), std::move(out));
}

template <Backend B>
ArrayOf<B> run_outer(const ArrayOf<B>& x, const ArrayOf<B>& y, B& be) {
  if (x.shape().rank() != 1 || y.shape().rank() != 1) throw std::invalid_argument("outer: operands must be vectors");
  std::vector<typename B::value_type> out;
  out.reserve(x.size() * y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) out.push_back(be.mul(x[i], y[j]));
  }
  return ArrayOf<B>(Shape{x.size(), y.size()}, std::move(out));
}

// ---------------------------------------------------------------------------
// Normal-form evaluation

template <class V>
using Bindings = std::map<std::string, std::vector<V>>;

namespace detail {

template <Backend B>
class NormalFormEvaluator {
 public:
  using V = typename B::value_type;
  using P = typename B::partial_type;

  NormalFormEvaluator(const NormalForm& nf, Bindings<V>& arrays, B& be, const Schedule* schedule)
      : nf_(nf), arrays_(arrays), be_(be), schedule_(schedule), point_(nf.loops.size(), 0) {}

  void run() {
    for (const RefSite& site : reference_sites(nf_)) check_bounds(*site.ref);
    visit(nf_.free_loops, 0, [&] {
      const V v = value(nf_.body);
      arrays_.at(nf_.output.array)[flat(nf_.output)] = v;
    });
  }

 private:
  void check_bounds(const ArrayRef& r) {
    auto it = arrays_.find(r.array);
    if (it == arrays_.end()) throw std::invalid_argument("evaluate: no binding for array " + r.array);
    if (it->second.size() < r.shape.count()) {
      throw std::invalid_argument("evaluate: array " + r.array + " holds " + std::to_string(it->second.size()) +
                                  " values, expected " + std::to_string(r.shape.count()));
    }
  }

  std::size_t flat(const ArrayRef& r) const { return static_cast<std::size_t>(r.flat.eval(point_)); }
  const V& load(const ArrayRef& r) const { return arrays_.at(r.array)[flat(r)]; }

  // Visits every point of `ids` in lexicographic order (first id outermost).
  void visit(const std::vector<int>& ids, std::size_t d, const std::function<void()>& f) {
    if (d == ids.size()) {
      f();
      return;
    }
    const auto v = static_cast<std::size_t>(ids[d]);
    for (std::size_t x = 0; x < nf_.loops[v].extent; ++x) {
      point_[v] = x;
      visit(ids, d + 1, f);
    }
    point_[v] = 0;
  }

  V value(const Node& n) {
    switch (n.kind) {
      case Node::Kind::ref:
        return load(n.ref);
      case Node::Kind::mul: {
        V acc = value(n.children[0]);
        for (std::size_t i = 1; i < n.children.size(); ++i) acc = be_.mul(acc, value(n.children[i]));
        return acc;
      }
      case Node::Kind::add:
        return be_.add(value(n.children[0]), value(n.children[1]));
      case Node::Kind::div:
        return be_.div(value(n.children[0]), value(n.children[1]));
      case Node::Kind::sum:
        return be_.finish(sum(n));
    }
    throw std::logic_error("evaluate: bad node");
  }

  // Leaf term of a reduction: a two-factor product goes straight into the
  // partial (fused for the quire); longer products round their leading factors.
  P term(const Node& body) {
    if (body.kind != Node::Kind::mul) return be_.lift(value(body));
    V lead = value(body.children[0]);
    for (std::size_t i = 1; i + 1 < body.children.size(); ++i) lead = be_.mul(lead, value(body.children[i]));
    return be_.product(lead, value(body.children.back()));
  }

  P sum(const Node& n) {
    std::vector<P> terms;
    std::vector<std::size_t> extents;
    for (int l : n.loops) extents.push_back(nf_.loops[static_cast<std::size_t>(l)].extent);
    visit(n.loops, 0, [&] { terms.push_back(term(n.children[0])); });
    if (n.loops.size() > 1) return reduce(be_, std::move(terms), nested_schedule(extents));
    if (schedule_ && schedule_->size() == terms.size()) return reduce(be_, std::move(terms), *schedule_);
    return reduce(be_, std::move(terms), Schedule::sequential(terms.size()));
  }

  const NormalForm& nf_;
  Bindings<V>& arrays_;
  B& be_;
  const Schedule* schedule_;
  std::vector<std::size_t> point_;
};

}  // namespace detail

/// Evaluates a normal form in place: for every point of the free loops the
/// output element is overwritten. Loop-invariant factors are hoisted out of
/// sums first. Single-loop sums follow `schedule` when its length matches;
/// joint reductions produced by tiling follow nested_schedule.
template <Backend B>
void evaluate(const NormalForm& nf, Bindings<typename B::value_type>& arrays, B& be,
              const Schedule* schedule = nullptr) {
  const NormalForm hoisted = hoist_invariants(nf);
  if (!arrays.contains(nf.output.array)) {
    arrays[nf.output.array] = std::vector<typename B::value_type>(nf.output.shape.count(), be.zero());
  }
  detail::NormalFormEvaluator<B>(hoisted, arrays, be, schedule).run();
}

/// Square-matrix product through the tiled normal form. `tiles` gives the
/// tile size for loops (i, j, k); with `blocked`, A, B and C are stored in
/// block_layout order matching the tiles.
template <Backend B>
ArrayOf<B> run_matmul_tiled(const ArrayOf<B>& a, const ArrayOf<B>& b, const std::vector<std::size_t>& tiles, B& be,
                            bool blocked = false) {
  if (a.shape().rank() != 2 || a.shape() != b.shape() || a.shape()[0] != a.shape()[1]) {
    throw std::invalid_argument("tiled matmul: expected two square matrices of equal size");
  }
  const std::size_t n = a.shape()[0];
  NormalForm nf = tile(normalize(kernel_expr(KernelKind::matmul, n)), tiles);
  Bindings<typename B::value_type> arrays;
  if (blocked) {
    nf = relayout_blocked(nf, "A", tiles[0], tiles[2]);
    nf = relayout_blocked(nf, "B", tiles[2], tiles[1]);
    nf = relayout_blocked(nf, "C", tiles[0], tiles[1]);
    arrays["A"] = block_layout(a, tiles[0], tiles[2]).data();
    arrays["B"] = block_layout(b, tiles[2], tiles[1]).data();
  } else {
    arrays["A"] = a.data();
    arrays["B"] = b.data();
  }
  evaluate(nf, arrays, be);
  if (!blocked) return ArrayOf<B>(Shape{n, n}, std::move(arrays["C"]));
  const Shape bs{n / tiles[0], n / tiles[1], tiles[0], tiles[1]};
  return unblock_layout(ArrayOf<B>(bs, std::move(arrays["C"])));
}

// ---------------------------------------------------------------------------
// Conjugate gradients

template <class V>
struct CgState {
  DenseArray<V> a;
  DenseArray<V> x;
  DenseArray<V> r;
  DenseArray<V> p;
  std::size_t k = 0;
  /// Step length of the last completed step.
  std::optional<V> alpha;
};

/// p.Ap vanished with a nonzero residual.
class CgBreakdown : public std::runtime_error {
 public:
  explicit CgBreakdown(std::size_t iteration)
      : std::runtime_error("conjugate gradients broke down at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

namespace detail {

template <Backend B>
ArrayOf<B> cg_update_normal(const CgState<typename B::value_type>& s, CgVariant variant, B& be,
                            const Schedule& schedule) {
  const std::size_t n = s.x.size();
  const NormalForm nf = normalize(kernel_expr(KernelKind::cg, n, variant));
  Bindings<typename B::value_type> arrays;
  arrays["A"] = s.a.data();
  arrays["R"] = s.r.data();
  arrays["P"] = s.p.data();
  std::vector<typename B::value_type> x = s.x.data();
  x.resize(2 * n, be.zero());
  arrays["X"] = std::move(x);
  evaluate(nf, arrays, be, &schedule);
  const auto& lifted = arrays["X"];
  return ArrayOf<B>(Shape{n}, std::vector<typename B::value_type>(lifted.begin() + static_cast<std::ptrdiff_t>(n),
                                                                  lifted.end()));
}

}  // namespace detail

/// One CG iteration: alpha, the x update for the chosen variant and form,
/// then the textbook r, beta and p updates. Throws CgBreakdown when p.Ap = 0.
template <Backend B>
CgState<typename B::value_type> cg_step(const CgState<typename B::value_type>& s, CgVariant variant, CgForm form,
                                        B& be, const Schedule& schedule) {
  const std::size_t n = s.x.size();
  if (s.a.shape() != Shape({n, n}) || s.r.size() != n || s.p.size() != n) {
    throw std::invalid_argument("cg: inconsistent state shapes");
  }
  const auto rr = run_dot(s.r, s.r, be, schedule);
  const auto ap = run_matmul(s.a, s.p, be, schedule);
  const auto pap = run_dot(s.p, ap, be, schedule);
  if (be.is_zero(pap)) throw CgBreakdown(s.k);
  const auto alpha = be.div(rr, pap);

  CgState<typename B::value_type> next = s;
  if (form == CgForm::normal) {
    next.x = detail::cg_update_normal(s, variant, be, schedule);
  } else {
    const auto& dir = variant == CgVariant::paper ? ap : s.p;
    for (std::size_t i = 0; i < n; ++i) next.x[i] = be.add(s.x[i], be.mul(alpha, dir[i]));
  }
  for (std::size_t i = 0; i < n; ++i) next.r[i] = be.sub(s.r[i], be.mul(alpha, ap[i]));
  const auto rr_next = run_dot(next.r, next.r, be, schedule);
  const auto beta = be.div(rr_next, rr);
  for (std::size_t i = 0; i < n; ++i) next.p[i] = be.add(next.r[i], be.mul(beta, s.p[i]));
  next.k = s.k + 1;
  next.alpha = alpha;
  return next;
}

template <class V>
struct CgResult {
  DenseArray<V> x;
  std::size_t iterations = 0;
  /// r.r after the last step.
  V residual;
};

/// Runs up to `iters` steps from x0 = 0, stopping early once r.r is zero.
template <Backend B>
CgResult<typename B::value_type> cg_solve(const ArrayOf<B>& a, const ArrayOf<B>& b, std::size_t iters,
                                          CgVariant variant, B& be, const Schedule& schedule,
                                          CgForm form = CgForm::direct) {
  if (iters < 1) throw std::invalid_argument("cg: need at least one iteration");
  const std::size_t n = b.size();
  if (b.shape().rank() != 1 || a.shape() != Shape({n, n})) {
    throw std::invalid_argument("cg: matrix " + a.shape().to_string() + " does not match right-hand side " +
                                b.shape().to_string());
  }
  CgState<typename B::value_type> s{a, ArrayOf<B>(Shape{n}, be.zero()), b, b, 0, std::nullopt};
  auto rr = run_dot(s.r, s.r, be, schedule);
  while (s.k < iters && !be.is_zero(rr)) {
    s = cg_step(s, variant, form, be, schedule);
    rr = run_dot(s.r, s.r, be, schedule);
  }
  return {std::move(s.x), s.k, rr};
}

}  // namespace tc
