#include "tensorcore/normal_form.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace tc {

// ---------------------------------------------------------------------------
// TensorExpr

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

std::string to_string(TensorExpr::Kind kind) {
  switch (kind) {
    case TensorExpr::Kind::leaf: return "leaf";
    case TensorExpr::Kind::multiply: return "multiply";
    case TensorExpr::Kind::sum_reduce: return "sum-reduce";
    case TensorExpr::Kind::outer: return "outer";
    case TensorExpr::Kind::matmul: return "matmul";
    case TensorExpr::Kind::dot: return "dot";
    case TensorExpr::Kind::scalar_divide: return "scalar-divide";
    case TensorExpr::Kind::add: return "add";
    case TensorExpr::Kind::cg_kernel: return "cg-kernel";
  }
  return "unknown";
}

TensorExpr TensorExpr::leaf(std::string name, Shape shape) {
  require(!name.empty(), "leaf arrays need a name");
  TensorExpr e(Kind::leaf, std::move(shape), {});
  e.name_ = std::move(name);
  return e;
}

TensorExpr TensorExpr::multiply(TensorExpr a, TensorExpr b) {
  require(a.shape() == b.shape(), "multiply: operand shapes differ");
  Shape s = a.shape();
  return TensorExpr(Kind::multiply, std::move(s), {std::move(a), std::move(b)});
}

TensorExpr TensorExpr::add(TensorExpr a, TensorExpr b) {
  require(a.shape() == b.shape(), "add: operand shapes differ");
  Shape s = a.shape();
  return TensorExpr(Kind::add, std::move(s), {std::move(a), std::move(b)});
}

TensorExpr TensorExpr::sum_reduce(TensorExpr a) { return TensorExpr(Kind::sum_reduce, Shape{}, {std::move(a)}); }

TensorExpr TensorExpr::outer(TensorExpr x, TensorExpr y) {
  std::vector<std::size_t> dims = x.shape().dims();
  dims.insert(dims.end(), y.shape().dims().begin(), y.shape().dims().end());
  return TensorExpr(Kind::outer, Shape(std::move(dims)), {std::move(x), std::move(y)});
}

TensorExpr TensorExpr::matmul(TensorExpr a, TensorExpr b) {
  require(a.shape().rank() == 2, "matmul: left operand must be a matrix");
  require(b.shape().rank() == 1 || b.shape().rank() == 2, "matmul: right operand must be a matrix or vector");
  require(a.shape()[1] == b.shape()[0], "matmul: inner dimensions differ");
  Shape s = b.shape().rank() == 2 ? Shape{a.shape()[0], b.shape()[1]} : Shape{a.shape()[0]};
  return TensorExpr(Kind::matmul, std::move(s), {std::move(a), std::move(b)});
}

TensorExpr TensorExpr::dot(TensorExpr x, TensorExpr y) {
  require(x.shape().rank() == 1 && y.shape().rank() == 1, "dot: operands must be vectors");
  require(x.shape() == y.shape(), "dot: vector lengths differ");
  return TensorExpr(Kind::dot, Shape{}, {std::move(x), std::move(y)});
}

TensorExpr TensorExpr::scalar_divide(TensorExpr a, TensorExpr b) {
  require(b.shape().rank() == 0, "scalar-divide: divisor must be a scalar");
  Shape s = a.shape();
  return TensorExpr(Kind::scalar_divide, std::move(s), {std::move(a), std::move(b)});
}

TensorExpr TensorExpr::cg_kernel(TensorExpr a, TensorExpr x, TensorExpr r, TensorExpr p, CgVariant variant) {
  require(x.shape().rank() == 1, "cg-kernel: x must be a vector");
  const std::size_t n = x.shape()[0];
  require(a.shape() == Shape({n, n}), "cg-kernel: matrix must be n x n");
  require(r.shape() == x.shape() && p.shape() == x.shape(), "cg-kernel: r and p must match x");
  Shape s = x.shape();
  TensorExpr e(Kind::cg_kernel, std::move(s), {std::move(a), std::move(x), std::move(r), std::move(p)});
  e.variant_ = variant;
  return e;
}

// ---------------------------------------------------------------------------
// AffineIndex

AffineIndex::AffineIndex(std::vector<Term> terms) {
  for (const Term& t : terms) {
    auto it = std::find_if(terms_.begin(), terms_.end(), [&](const Term& u) { return u.loop == t.loop; });
    if (it == terms_.end()) {
      terms_.push_back(t);
    } else {
      it->coeff += t.coeff;
    }
  }
  std::erase_if(terms_, [](const Term& t) { return t.coeff == 0; });
}

std::int64_t AffineIndex::constant_part() const { return coeff(-1); }

std::int64_t AffineIndex::coeff(int loop) const {
  for (const Term& t : terms_) {
    if (t.loop == loop) return t.coeff;
  }
  return 0;
}

AffineIndex AffineIndex::scaled(std::int64_t factor) const {
  std::vector<Term> out = terms_;
  for (Term& t : out) t.coeff *= factor;
  return AffineIndex(std::move(out));
}

AffineIndex AffineIndex::operator+(const AffineIndex& other) const {
  std::vector<Term> out = terms_;
  out.insert(out.end(), other.terms_.begin(), other.terms_.end());
  return AffineIndex(std::move(out));
}

std::int64_t AffineIndex::eval(std::span<const std::size_t> loop_values) const {
  std::int64_t v = 0;
  for (const Term& t : terms_) {
    v += t.loop < 0 ? t.coeff : t.coeff * static_cast<std::int64_t>(loop_values[static_cast<std::size_t>(t.loop)]);
  }
  return v;
}

AffineIndex AffineIndex::substitute(const std::vector<std::vector<Term>>& replacement) const {
  std::vector<Term> out;
  for (const Term& t : terms_) {
    if (t.loop >= 0 && static_cast<std::size_t>(t.loop) < replacement.size() &&
        !replacement[static_cast<std::size_t>(t.loop)].empty()) {
      for (const Term& r : replacement[static_cast<std::size_t>(t.loop)]) out.push_back({r.loop, r.coeff * t.coeff});
    } else {
      out.push_back(t);
    }
  }
  return AffineIndex(std::move(out));
}

std::string AffineIndex::to_string(const std::vector<Loop>& loops) const {
  if (terms_.empty()) return "0";
  std::string s;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const Term& t = terms_[i];
    const std::int64_t mag = t.coeff < 0 ? -t.coeff : t.coeff;
    if (i > 0) s += t.coeff < 0 ? "-" : "+";
    else if (t.coeff < 0) s += "-";
    if (t.loop < 0) {
      s += std::to_string(mag);
    } else {
      s += loops.at(static_cast<std::size_t>(t.loop)).name;
      if (mag != 1) s += "*" + std::to_string(mag);
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Nodes

ArrayRef ArrayRef::make(std::string array, Shape shape, std::vector<AffineIndex> coords) {
  if (coords.size() != shape.rank()) throw std::logic_error("array reference rank mismatch for " + array);
  AffineIndex flat;
  for (std::size_t a = 0; a < coords.size(); ++a) flat = flat.scaled(static_cast<std::int64_t>(shape[a])) + coords[a];
  return ArrayRef{std::move(array), std::move(shape), std::move(coords), std::move(flat)};
}

Node Node::make_ref(ArrayRef r) {
  Node n;
  n.kind = Kind::ref;
  n.ref = std::move(r);
  return n;
}

Node Node::make_mul(std::vector<Node> factors) {
  Node n;
  n.kind = Kind::mul;
  for (Node& f : factors) {
    if (f.kind == Kind::mul) {
      for (Node& g : f.children) n.children.push_back(std::move(g));
    } else {
      n.children.push_back(std::move(f));
    }
  }
  if (n.children.size() == 1) return std::move(n.children.front());
  return n;
}

Node Node::make_add(Node a, Node b) {
  Node n;
  n.kind = Kind::add;
  n.children = {std::move(a), std::move(b)};
  return n;
}

Node Node::make_div(Node a, Node b) {
  Node n;
  n.kind = Kind::div;
  n.children = {std::move(a), std::move(b)};
  return n;
}

Node Node::make_sum(std::vector<int> loops, Node body) {
  Node n;
  n.kind = Kind::sum;
  n.loops = std::move(loops);
  n.children = {std::move(body)};
  return n;
}

namespace {

std::string node_string(const Node& n, const std::vector<Loop>& loops);

std::string ref_string(const ArrayRef& r, const std::vector<Loop>& loops) {
  return r.array + "[" + r.flat.to_string(loops) + "]";
}

std::string factor_string(const Node& n, const std::vector<Loop>& loops) {
  switch (n.kind) {
    case Node::Kind::ref:
    case Node::Kind::div:
      return node_string(n, loops);
    default:
      return "(" + node_string(n, loops) + ")";
  }
}

std::string node_string(const Node& n, const std::vector<Loop>& loops) {
  switch (n.kind) {
    case Node::Kind::ref:
      return ref_string(n.ref, loops);
    case Node::Kind::mul: {
      std::string s;
      for (std::size_t i = 0; i < n.children.size();) {
        std::size_t run = 1;
        while (i + run < n.children.size() && n.children[i].kind == Node::Kind::ref &&
               n.children[i + run] == n.children[i]) {
          ++run;
        }
        if (i > 0) s += "*";
        s += factor_string(n.children[i], loops);
        if (run > 1) s += "^" + std::to_string(run);
        i += run;
      }
      return s;
    }
    case Node::Kind::add:
      return node_string(n.children[0], loops) + " + " + node_string(n.children[1], loops);
    case Node::Kind::div:
      return "(" + node_string(n.children[0], loops) + ")/(" + node_string(n.children[1], loops) + ")";
    case Node::Kind::sum: {
      std::string s = "sum(";
      for (std::size_t i = 0; i < n.loops.size(); ++i) {
        const Loop& l = loops.at(static_cast<std::size_t>(n.loops[i]));
        s += (i ? "," : "") + l.name + "<" + std::to_string(l.extent);
      }
      return s + ") " + node_string(n.children[0], loops);
    }
  }
  return {};
}

std::size_t depth_of(const Node& n) {
  std::size_t d = 0;
  for (const Node& c : n.children) d = std::max(d, depth_of(c));
  return n.kind == Node::Kind::sum ? d + 1 : d;
}

}  // namespace

std::size_t NormalForm::reduction_depth() const { return depth_of(body); }

std::string NormalForm::to_string() const {
  return ref_string(output, loops) + " = " + node_string(body, loops);
}

std::string NormalForm::loops_string() const {
  std::string s;
  for (std::size_t i = 0; i < loops.size(); ++i) {
    s += (i ? " " : "") + loops[i].name + "<" + std::to_string(loops[i].extent);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Normalization

namespace {

class Lowering {
 public:
  std::vector<Loop> loops;

  int open_loop(const std::vector<std::string>& pool, std::size_t extent) {
    for (const std::string& name : pool) {
      if (std::find(scope_.begin(), scope_.end(), name) == scope_.end()) {
        loops.push_back({name, extent});
        scope_.push_back(name);
        return static_cast<int>(loops.size()) - 1;
      }
    }
    throw std::invalid_argument("normalize: expression nests too many loops");
  }
  void close_loops(std::size_t count) { scope_.resize(scope_.size() - count); }

  Node lower(const TensorExpr& e, const std::vector<AffineIndex>& coords) {
    using K = TensorExpr::Kind;
    const auto& kids = e.children();
    switch (e.kind()) {
      case K::leaf:
        return Node::make_ref(ArrayRef::make(e.name(), e.shape(), coords));
      case K::multiply:
        return Node::make_mul({lower(kids[0], coords), lower(kids[1], coords)});
      case K::add:
        return Node::make_add(lower(kids[0], coords), lower(kids[1], coords));
      case K::outer: {
        const std::size_t rx = kids[0].shape().rank();
        std::vector<AffineIndex> cx(coords.begin(), coords.begin() + static_cast<std::ptrdiff_t>(rx));
        std::vector<AffineIndex> cy(coords.begin() + static_cast<std::ptrdiff_t>(rx), coords.end());
        return Node::make_mul({lower(kids[0], cx), lower(kids[1], cy)});
      }
      case K::matmul: {
        const int k = open_loop(kReductionNames, kids[0].shape()[1]);
        std::vector<AffineIndex> ca{coords[0], AffineIndex::var(k)};
        std::vector<AffineIndex> cb{AffineIndex::var(k)};
        if (kids[1].shape().rank() == 2) cb.push_back(coords[1]);
        Node body = Node::make_mul({lower(kids[0], ca), lower(kids[1], cb)});
        close_loops(1);
        return Node::make_sum({k}, std::move(body));
      }
      case K::dot: {
        const int j = open_loop(kReductionNames, kids[0].shape()[0]);
        const std::vector<AffineIndex> c{AffineIndex::var(j)};
        Node body = Node::make_mul({lower(kids[0], c), lower(kids[1], c)});
        close_loops(1);
        return Node::make_sum({j}, std::move(body));
      }
      case K::sum_reduce: {
        const Shape& s = kids[0].shape();
        if (s.rank() == 0) return lower(kids[0], {});
        std::vector<int> ids;
        std::vector<AffineIndex> c;
        for (std::size_t a = 0; a < s.rank(); ++a) {
          ids.push_back(open_loop(kReductionNames, s[a]));
          c.push_back(AffineIndex::var(ids.back()));
        }
        Node body = lower(kids[0], c);
        close_loops(ids.size());
        return Node::make_sum(std::move(ids), std::move(body));
      }
      case K::scalar_divide:
        return Node::make_div(lower(kids[0], coords), lower(kids[1], {}));
      case K::cg_kernel:
        throw std::invalid_argument("normalize: unsupported composition: cg-kernel must be the outermost node");
    }
    throw std::invalid_argument("normalize: unsupported node " + to_string(e.kind()));
  }

  NormalForm lower_cg(const TensorExpr& e) {
    const auto& kids = e.children();
    for (const TensorExpr& c : kids) {
      if (c.kind() != TensorExpr::Kind::leaf) {
        throw std::invalid_argument("normalize: unsupported composition: cg-kernel operand is a " + to_string(c.kind()) +
                                    " node, expected a leaf");
      }
    }
    const std::string& a = kids[0].name();
    const std::string& x = kids[1].name();
    const std::string& r = kids[2].name();
    const std::string& p = kids[3].name();
    const std::size_t n = kids[1].shape()[0];
    const Shape vec{n};
    const Shape mat{n, n};
    // The iteration axis is lifted into X: iterate t lives at offsets t*n .. t*n+n-1.
    const Shape lifted{2, n};

    NormalForm nf;
    const int k = open_loop({"k"}, n);
    const AffineIndex vk = AffineIndex::var(k);

    auto ref = [](const std::string& name, const Shape& s, std::vector<AffineIndex> c) {
      return Node::make_ref(ArrayRef::make(name, s, std::move(c)));
    };

    std::optional<Node> ap;
    if (e.variant() == CgVariant::paper) {
      const int j = open_loop(kReductionNames, n);
      const AffineIndex vj = AffineIndex::var(j);
      ap = Node::make_sum({j}, Node::make_mul({ref(a, mat, {vk, vj}), ref(p, vec, {vj})}));
      close_loops(1);
    }

    const int j = open_loop(kReductionNames, n);
    Node num = Node::make_sum({j}, Node::make_mul({ref(r, vec, {AffineIndex::var(j)}), ref(r, vec, {AffineIndex::var(j)})}));
    close_loops(1);

    const int i = open_loop({"i"}, n);
    const int j2 = open_loop(kReductionNames, n);
    const AffineIndex vi = AffineIndex::var(i);
    const AffineIndex vj2 = AffineIndex::var(j2);
    Node inner = Node::make_sum(
        {j2}, Node::make_mul({ref(p, vec, {vi}), ref(a, mat, {vi, vj2}), ref(p, vec, {vj2})}));
    close_loops(2);
    Node den = Node::make_sum({i}, std::move(inner));

    Node alpha = Node::make_div(std::move(num), std::move(den));
    Node update = e.variant() == CgVariant::paper ? Node::make_mul({std::move(*ap), std::move(alpha)})
                                                  : Node::make_mul({ref(p, vec, {vk}), std::move(alpha)});
    nf.body = Node::make_add(ref(x, lifted, {AffineIndex::constant(0), vk}), std::move(update));
    nf.output = ArrayRef::make(x, lifted, {AffineIndex::constant(1), vk});
    nf.free_loops = {k};
    nf.loops = loops;
    return nf;
  }

 private:
  inline static const std::vector<std::string> kReductionNames = {"j", "k", "l", "m", "q", "s", "t", "u"};
  std::vector<std::string> scope_;
};

}  // namespace

NormalForm normalize(const TensorExpr& e) {
  Lowering lowering;
  if (e.kind() == TensorExpr::Kind::cg_kernel) return lowering.lower_cg(e);

  static const std::vector<std::string> kFreeNames = {"i", "j", "l", "m", "q", "s"};
  NormalForm nf;
  std::vector<AffineIndex> coords;
  for (std::size_t a = 0; a < e.shape().rank(); ++a) {
    const int v = lowering.open_loop(kFreeNames, e.shape()[a]);
    nf.free_loops.push_back(v);
    coords.push_back(AffineIndex::var(v));
  }
  nf.body = lowering.lower(e, coords);
  nf.output = ArrayRef::make(e.shape().rank() == 0 ? "S" : "C", e.shape(), coords);
  nf.loops = lowering.loops;
  return nf;
}

// ---------------------------------------------------------------------------
// Analyses and rewrites

std::set<int> free_variables(const Node& node) {
  std::set<int> out;
  switch (node.kind) {
    case Node::Kind::ref:
      for (const auto& t : node.ref.flat.terms()) {
        if (t.loop >= 0) out.insert(t.loop);
      }
      return out;
    case Node::Kind::sum:
      out = free_variables(node.children[0]);
      for (int l : node.loops) out.erase(l);
      return out;
    default:
      for (const Node& c : node.children) {
        auto s = free_variables(c);
        out.insert(s.begin(), s.end());
      }
      return out;
  }
}

std::vector<RefSite> reference_sites(const NormalForm& nf) {
  std::vector<RefSite> sites;
  sites.push_back({&nf.output, nf.free_loops, true});
  std::function<void(const Node&, std::vector<int>&)> walk = [&](const Node& n, std::vector<int>& enclosing) {
    if (n.kind == Node::Kind::ref) {
      sites.push_back({&n.ref, enclosing, false});
      return;
    }
    const std::size_t mark = enclosing.size();
    if (n.kind == Node::Kind::sum) enclosing.insert(enclosing.end(), n.loops.begin(), n.loops.end());
    for (const Node& c : n.children) walk(c, enclosing);
    enclosing.resize(mark);
  };
  std::vector<int> enclosing = nf.free_loops;
  walk(nf.body, enclosing);
  return sites;
}

namespace {

Node hoist(const Node& n) {
  Node out = n;
  for (Node& c : out.children) c = hoist(c);
  if (out.kind != Node::Kind::sum || out.children[0].kind != Node::Kind::mul) return out;

  std::vector<Node> dependent;
  std::vector<Node> invariant;
  for (const Node& f : out.children[0].children) {
    const auto vars = free_variables(f);
    const bool depends = std::any_of(out.loops.begin(), out.loops.end(), [&](int l) { return vars.contains(l); });
    (depends ? dependent : invariant).push_back(f);
  }
  if (invariant.empty() || dependent.empty()) return out;
  invariant.push_back(Node::make_sum(out.loops, Node::make_mul(std::move(dependent))));
  return Node::make_mul(std::move(invariant));
}

}  // namespace

NormalForm hoist_invariants(const NormalForm& nf) {
  NormalForm out = nf;
  out.body = hoist(nf.body);
  return out;
}

namespace {

void rewrite_refs(Node& n, const std::function<void(ArrayRef&)>& f) {
  if (n.kind == Node::Kind::ref) f(n.ref);
  for (Node& c : n.children) rewrite_refs(c, f);
}

}  // namespace

NormalForm tile(const NormalForm& nf, const std::vector<std::size_t>& tiles) {
  if (tiles.size() != nf.loops.size()) throw std::invalid_argument("tile: need one tile size per loop");
  NormalForm out;
  std::vector<std::vector<AffineIndex::Term>> replacement(nf.loops.size());
  std::vector<int> outer_id(nf.loops.size());
  std::vector<int> inner_id(nf.loops.size(), -1);
  for (std::size_t v = 0; v < nf.loops.size(); ++v) {
    const Loop& l = nf.loops[v];
    const std::size_t t = tiles[v];
    if (t == 0 || l.extent % t != 0) {
      throw std::invalid_argument("tile: " + std::to_string(t) + " does not divide extent of loop " + l.name);
    }
    if (t == l.extent) {
      out.loops.push_back(l);
      outer_id[v] = static_cast<int>(out.loops.size()) - 1;
      replacement[v] = {{outer_id[v], 1}};
      continue;
    }
    out.loops.push_back({l.name + "_o", l.extent / t});
    outer_id[v] = static_cast<int>(out.loops.size()) - 1;
    out.loops.push_back({l.name + "_i", t});
    inner_id[v] = static_cast<int>(out.loops.size()) - 1;
    replacement[v] = {{outer_id[v], static_cast<std::int64_t>(t)}, {inner_id[v], 1}};
  }

  auto split = [&](const std::vector<int>& ids) {
    std::vector<int> result;
    for (int v : ids) result.push_back(outer_id[static_cast<std::size_t>(v)]);
    for (int v : ids) {
      if (inner_id[static_cast<std::size_t>(v)] >= 0) result.push_back(inner_id[static_cast<std::size_t>(v)]);
    }
    return result;
  };
  auto remap = [&](ArrayRef& r) {
    for (AffineIndex& c : r.coords) c = c.substitute(replacement);
    r.flat = r.flat.substitute(replacement);
  };
  std::function<void(Node&)> remap_sums = [&](Node& n) {
    if (n.kind == Node::Kind::sum) n.loops = split(n.loops);
    for (Node& c : n.children) remap_sums(c);
  };

  out.output = nf.output;
  remap(out.output);
  out.free_loops = split(nf.free_loops);
  out.body = nf.body;
  rewrite_refs(out.body, remap);
  remap_sums(out.body);
  return out;
}

namespace {

// Splits idx into (idx / b, idx % b) when the remainder part provably stays in [0, b).
std::pair<AffineIndex, AffineIndex> divmod(const AffineIndex& idx, std::size_t b, const std::vector<Loop>& loops) {
  const auto block = static_cast<std::int64_t>(b);
  AffineIndex quot;
  AffineIndex rem;
  std::int64_t rem_max = 0;
  for (const auto& t : idx.terms()) {
    if (t.coeff < 0) throw std::invalid_argument("relayout: negative index coefficient");
    if (t.loop < 0) {
      quot = quot + AffineIndex::constant(t.coeff / block);
      rem = rem + AffineIndex::constant(t.coeff % block);
      rem_max += t.coeff % block;
    } else if (t.coeff % block == 0) {
      quot = quot + AffineIndex::var(t.loop).scaled(t.coeff / block);
    } else {
      rem = rem + AffineIndex::var(t.loop).scaled(t.coeff);
      rem_max += t.coeff * static_cast<std::int64_t>(loops.at(static_cast<std::size_t>(t.loop)).extent - 1);
    }
  }
  if (rem_max >= block) {
    throw std::invalid_argument("relayout: index " + idx.to_string(loops) + " does not split by block " +
                                std::to_string(b) + " under the current tiling");
  }
  return {quot, rem};
}

}  // namespace

NormalForm relayout_blocked(const NormalForm& nf, const std::string& array, std::size_t rows, std::size_t cols) {
  NormalForm out = nf;
  bool found = false;
  auto f = [&](ArrayRef& r) {
    if (r.array != array) return;
    if (r.shape.rank() != 2) throw std::invalid_argument("relayout: " + array + " is not a matrix");
    found = true;
    const Shape blocked = lift_shape(lift_shape(r.shape, 0, rows), 2, cols);
    const Shape target{blocked[0], blocked[2], blocked[1], blocked[3]};
    auto [q0, r0] = divmod(r.coords[0], rows, nf.loops);
    auto [q1, r1] = divmod(r.coords[1], cols, nf.loops);
    r = ArrayRef::make(array, target, {q0, q1, r0, r1});
  };
  f(out.output);
  rewrite_refs(out.body, f);
  if (!found) throw std::invalid_argument("relayout: no references to " + array);
  return out;
}

// ---------------------------------------------------------------------------
// Reuse census

namespace {

std::size_t ceil_log2(std::size_t v) {
  std::size_t levels = 0;
  while ((std::size_t{1} << levels) < v) ++levels;
  return levels;
}

std::size_t iterations(const std::vector<int>& enclosing, const std::vector<Loop>& loops) {
  std::size_t n = 1;
  for (int l : enclosing) n *= loops[static_cast<std::size_t>(l)].extent;
  return n;
}

// Calls f(point) for every point of the given loops.
void for_each_point(const std::vector<int>& ids, const std::vector<Loop>& loops,
                    const std::function<void(const std::vector<std::size_t>&)>& f) {
  std::vector<std::size_t> point(loops.size(), 0);
  std::function<void(std::size_t)> rec = [&](std::size_t d) {
    if (d == ids.size()) {
      f(point);
      return;
    }
    const auto v = static_cast<std::size_t>(ids[d]);
    for (std::size_t x = 0; x < loops[v].extent; ++x) {
      point[v] = x;
      rec(d + 1);
    }
    point[v] = 0;
  };
  rec(0);
}

}  // namespace

ReuseCensus reuse_census(const TensorExpr& e) {
  const NormalForm nf = normalize(e);
  ReuseCensus c;

  std::map<std::string, std::size_t> accesses;
  std::map<std::string, std::set<std::int64_t>> touched;
  for (const RefSite& site : reference_sites(nf)) {
    if (site.is_output) continue;
    accesses[site.ref->array] += iterations(site.enclosing, nf.loops);
    for_each_point(site.enclosing, nf.loops, [&](const std::vector<std::size_t>& pt) {
      touched[site.ref->array].insert(site.ref->flat.eval(pt));
    });
  }
  for (const auto& [name, count] : accesses) {
    const std::size_t uses = count / touched[name].size();
    c.uses_per_input[name] = uses;
    if (c.uses != 0 && c.uses != uses) c.uniform = false;
    c.uses = std::max(c.uses, uses);
  }

  std::function<void(const Node&, std::vector<int>&, std::size_t)> walk = [&](const Node& n, std::vector<int>& enclosing,
                                                                             std::size_t depth) {
    if (n.kind == Node::Kind::mul) c.multiplications += iterations(enclosing, nf.loops) * (n.children.size() - 1);
    const std::size_t mark = enclosing.size();
    if (n.kind == Node::Kind::sum) {
      enclosing.insert(enclosing.end(), n.loops.begin(), n.loops.end());
      std::size_t terms = 1;
      for (int l : n.loops) terms *= nf.loops[static_cast<std::size_t>(l)].extent;
      depth += ceil_log2(terms);
    }
    c.reduction_depth = std::max(c.reduction_depth, depth);
    for (const Node& ch : n.children) walk(ch, enclosing, depth);
    enclosing.resize(mark);
  };
  std::vector<int> enclosing = nf.free_loops;
  walk(nf.body, enclosing, 0);
  return c;
}

KernelKind parse_kernel_kind(const std::string& name) {
  if (name == "dot") return KernelKind::dot;
  if (name == "matmul") return KernelKind::matmul;
  if (name == "outer") return KernelKind::outer;
  if (name == "cg") return KernelKind::cg;
  throw std::invalid_argument("unknown kernel: " + name);
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::dot: return "dot";
    case KernelKind::matmul: return "matmul";
    case KernelKind::outer: return "outer";
    case KernelKind::cg: return "cg";
  }
  return "unknown";
}

TensorExpr kernel_expr(KernelKind kind, std::size_t n, CgVariant variant) {
  const Shape vec{n};
  const Shape mat{n, n};
  switch (kind) {
    case KernelKind::dot:
      return TensorExpr::dot(TensorExpr::leaf("X", vec), TensorExpr::leaf("Y", vec));
    case KernelKind::matmul:
      return TensorExpr::matmul(TensorExpr::leaf("A", mat), TensorExpr::leaf("B", mat));
    case KernelKind::outer:
      return TensorExpr::outer(TensorExpr::leaf("X", vec), TensorExpr::leaf("Y", vec));
    case KernelKind::cg:
      return TensorExpr::cg_kernel(TensorExpr::leaf("A", mat), TensorExpr::leaf("X", vec), TensorExpr::leaf("R", vec),
                                   TensorExpr::leaf("P", vec), variant);
  }
  throw std::invalid_argument("unknown kernel kind");
}

}  // namespace tc
