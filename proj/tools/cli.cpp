#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <optional>
#include <sstream>
#include <type_traits>

#include "tensorcore/census.hpp"
#include "tensorcore/io.hpp"
#include "tensorcore/kernels.hpp"
#include "tensorcore/planner.hpp"
#include "tensorcore/rational.hpp"

namespace tc::cli {

namespace {

/// Bad flag values (as opposed to bad file contents).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Report helpers

template <class V>
void put_value(std::ostream& out, const std::string& key, const V& v) {
  if constexpr (std::is_same_v<V, mpq_class>) {
    out << key << ".exact=" << v.get_str() << "\n";
  } else {
    out << key << ".hex=" << value_hex(v) << "\n";
  }
  out << key << ".decimal=" << value_decimal(v) << "\n";
}

template <class V>
void put_array(std::ostream& out, const std::string& key, const DenseArray<V>& a) {
  out << key << ".shape=" << a.shape().to_string() << "\n";
  out << key << (std::is_same_v<V, mpq_class> ? ".exact=" : ".hex=");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if constexpr (std::is_same_v<V, mpq_class>) {
      out << (i ? " " : "") << a[i].get_str();
    } else {
      out << (i ? " " : "") << value_hex(a[i]);
    }
  }
  out << "\n" << key << ".decimal=";
  for (std::size_t i = 0; i < a.size(); ++i) out << (i ? " " : "") << value_decimal(a[i]);
  out << "\n";
}

// ---------------------------------------------------------------------------
// posit

struct PositOptions {
  std::string bits;
  std::string value;
  int nbits = 32;
  int es = 2;
};

PositConfig make_config(int nbits, int es) {
  try {
    return PositConfig(nbits, es);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

void report_posit(std::ostream& out, const Posit& p) {
  const PositConfig& cfg = p.config();
  out << "nbits=" << cfg.nbits() << "\n";
  out << "es=" << cfg.es() << "\n";
  out << "bits=" << to_hex(p) << "\n";
  if (p.is_nar()) {
    out << "kind=nar\nvalue=NaR\n";
    return;
  }
  out << "kind=" << (p.is_zero() ? "zero" : "finite") << "\n";
  out << "value=" << to_decimal_string(p) << "\n";
  out << "exact=" << to_rational(p).get_str() << "\n";
  if (!p.is_zero()) out << "scale=" << decode(p).scale << "\n";
}

int cmd_posit_decode(const PositOptions& o, std::ostream& out) {
  const PositConfig cfg = make_config(o.nbits, o.es);
  Posit p;
  try {
    p = parse_hex(o.bits, cfg);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  out << "command=posit-decode\n";
  report_posit(out, p);
  return kOk;
}

int cmd_posit_encode(const PositOptions& o, std::ostream& out) {
  const PositConfig cfg = make_config(o.nbits, o.es);
  Posit p;
  if (o.value == "NaR" || o.value == "nar") {
    p = Posit::nar(cfg);
  } else {
    try {
      p = encode_round(parse_decimal(o.value), cfg);
    } catch (const std::invalid_argument& e) {
      throw DataError(e.what());
    }
  }
  out << "command=posit-encode\n";
  out << "input=" << o.value << "\n";
  report_posit(out, p);
  return kOk;
}

// ---------------------------------------------------------------------------
// kernel

struct KernelOptions {
  std::string kernel;
  std::string a;
  std::string b;
  std::string backend = "quire";
  std::string schedule = "sequential";
  std::string variant = "standard";
  std::string form = "direct";
  std::optional<std::size_t> iters;
  int nbits = 32;
  int es = 2;
  bool threaded = false;
  bool show_schedule = false;
};

Schedule make_schedule(const std::string& spec, std::size_t n) {
  try {
    return Schedule::parse(spec, n);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--schedule: ") + e.what());
  }
}

template <Backend B>
int run_kernel(B be, const KernelOptions& o, std::ostream& out, std::ostream& err) {
  using V = typename B::value_type;
  const KernelKind kind = parse_kernel_kind(o.kernel);
  const Execution exec = o.threaded ? Execution::threaded : Execution::serial;

  const auto a = realize(ArrayFile::load(o.a), be);
  const auto b = realize(ArrayFile::load(o.b), be);

  out << "kernel=" << o.kernel << "\n";
  out << "backend=" << be.name() << "\n";
  if constexpr (std::is_same_v<V, Posit>) out << "format=posit" << o.nbits << "es" << o.es << "\n";

  std::size_t terms = 0;
  switch (kind) {
    case KernelKind::dot:
    case KernelKind::outer:
      terms = a.size();
      break;
    case KernelKind::matmul:
    case KernelKind::cg:
      terms = a.shape().rank() == 2 ? a.shape()[1] : a.size();
      break;
  }
  const Schedule schedule = make_schedule(o.schedule, terms);
  if (o.show_schedule) out << "schedule=" << schedule.describe() << "\n";

  try {
    switch (kind) {
      case KernelKind::dot:
        put_value(out, "result", run_dot(a, b, be, schedule, exec));
        break;
      case KernelKind::matmul:
        put_array(out, "result", run_matmul(a, b, be, schedule, exec));
        break;
      case KernelKind::outer:
        put_array(out, "result", run_outer(a, b, be));
        break;
      case KernelKind::cg: {
        const CgVariant variant = parse_cg_variant(o.variant);
        const CgForm form = parse_cg_form(o.form);
        const std::size_t iters = o.iters.value_or(b.size());
        const auto result = cg_solve(a, b, iters, variant, be, schedule, form);
        out << "variant=" << to_string(variant) << "\n";
        out << "form=" << to_string(form) << "\n";
        out << "iterations=" << result.iterations << "\n";
        out << "converged=" << (be.is_zero(result.residual) ? "true" : "false") << "\n";
        put_value(out, "residual", result.residual);
        put_array(out, "x", result.x);
        break;
      }
    }
  } catch (const CgBreakdown& e) {
    err << "error: " << e.what() << "\n";
    return kBreakdown;
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  } catch (const std::domain_error& e) {
    throw DataError(e.what());
  }
  out << "roundings=" << be.roundings() << "\n";
  return kOk;
}

int cmd_kernel(const KernelOptions& o, std::ostream& out, std::ostream& err) {
  if (o.kernel == "cg") {
    parse_cg_variant(o.variant);
    parse_cg_form(o.form);
  }
  if (o.backend == "quire" || o.backend == "posit-quire") return run_kernel(QuireBackend(make_config(o.nbits, o.es)), o, out, err);
  if (o.backend == "naive" || o.backend == "posit-naive") {
    return run_kernel(PositNaiveBackend(make_config(o.nbits, o.es)), o, out, err);
  }
  if (o.backend == "binary32") return run_kernel(Binary32Backend(), o, out, err);
  if (o.backend == "binary64") return run_kernel(Binary64Backend(), o, out, err);
  if (o.backend == "rational") return run_kernel(RationalBackend(), o, out, err);
  throw UsageError("unknown backend: " + o.backend);
}

// ---------------------------------------------------------------------------
// census

int cmd_census_nan(const std::string& format, std::ostream& out) {
  const NanCensus c = nan_census(parse_ieee_format(format));
  out << "census=nan\n";
  out << "format=" << to_string(c.format) << "\n";
  out << "method=" << c.method << "\n";
  out << "total_patterns=" << c.total_patterns << "\n";
  out << "nan_patterns=" << c.nan_patterns << "\n";
  out << "posit_nar_patterns=1\n";
  return kOk;
}

int cmd_census_reuse(const std::string& kernel, std::size_t size, const std::string& variant, std::ostream& out) {
  const ReuseCensus c = reuse_census(kernel_expr(parse_kernel_kind(kernel), size, parse_cg_variant(variant)));
  out << "census=reuse\n";
  out << "kernel=" << kernel << "\n";
  out << "size=" << size << "\n";
  out << "uses=" << c.uses << "\n";
  out << "uniform=" << (c.uniform ? "true" : "false") << "\n";
  for (const auto& [name, uses] : c.uses_per_input) out << "uses." << name << "=" << uses << "\n";
  out << "mults=" << c.multiplications << "\n";
  out << "depth=" << c.reduction_depth << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// plan

int cmd_plan(const std::string& kernel, std::size_t n, const std::string& model_path, const std::string& variant,
             bool table, std::ostream& out) {
  const NormalForm nf = normalize(kernel_expr(parse_kernel_kind(kernel), n, parse_cg_variant(variant)));
  CostModel cm;
  try {
    cm = CostModel::load(model_path);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  const LayoutPlan p = plan(nf, cm);
  out << "kernel=" << kernel << "\n";
  out << "n=" << n << "\n";
  out << "normal_form=" << nf.to_string() << "\n";
  out << "loops=" << nf.loops_string() << "\n";
  out << "tiles=" << p.tiles_string() << "\n";
  out << "lifts=" << p.lifts_string() << "\n";
  out << "predicted_cost=" << p.predicted_cost << "\n";
  if (table) {
    auto rows = plan_table(nf, cm);
    std::stable_sort(rows.begin(), rows.end(), [](const PlanCandidate& x, const PlanCandidate& y) { return x.cost < y.cost; });
    out << "candidates=" << rows.size() << "\n";
    for (const PlanCandidate& c : rows) {
      LayoutPlan row;
      row.tiles = c.tiles;
      out << "candidate=" << row.tiles_string() << " cost=" << c.cost << "\n";
    }
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deterministic posit/quire tensor kernels, normal forms, censuses and layout planning", "tcore"};
  app.require_subcommand(1);

  // posit
  PositOptions po;
  auto* posit = app.add_subcommand("posit", "Posit codec");
  posit->require_subcommand(1);
  auto* decode_cmd = posit->add_subcommand("decode", "Decode a bit pattern");
  decode_cmd->add_option("--bits", po.bits, "0x-prefixed pattern with exactly ceil(n/4) digits")->required();
  decode_cmd->add_option("--n", po.nbits, "Width in bits")->capture_default_str();
  decode_cmd->add_option("--es", po.es, "Exponent bits")->capture_default_str();
  auto* encode_cmd = posit->add_subcommand("encode", "Round a decimal or fraction to the nearest posit");
  encode_cmd->add_option("--value", po.value, "Decimal literal, a/b fraction, or NaR")->required();
  encode_cmd->add_option("--n", po.nbits, "Width in bits")->capture_default_str();
  encode_cmd->add_option("--es", po.es, "Exponent bits")->capture_default_str();

  // kernel
  KernelOptions ko;
  auto* kernel = app.add_subcommand("kernel", "Run a kernel on array files");
  kernel->add_option("kernel", ko.kernel, "dot, matmul, outer or cg")
      ->required()
      ->check(CLI::IsMember({"dot", "matmul", "outer", "cg"}));
  kernel->add_option("--a,--matrix", ko.a, "Left operand (cg: the matrix)")->required();
  kernel->add_option("--b,--rhs", ko.b, "Right operand (cg: the right-hand side)")->required();
  kernel->add_option("--backend", ko.backend, "quire, naive, binary32, binary64 or rational")->capture_default_str();
  kernel->add_option("--schedule", ko.schedule, "seed:<u64>, sequential, reversed, or perm=..;fanin=..;workers=..")
      ->capture_default_str();
  kernel->add_option("--variant", ko.variant, "cg x update: paper or standard")->capture_default_str();
  kernel->add_option("--form", ko.form, "cg evaluation: direct or normal")->capture_default_str();
  kernel->add_option("--iters", ko.iters, "cg iteration limit (default: n)");
  kernel->add_option("--n", ko.nbits, "Posit width for posit backends")->capture_default_str();
  kernel->add_option("--es", ko.es, "Posit exponent bits for posit backends")->capture_default_str();
  kernel->add_flag("--threaded", ko.threaded, "Reduce worker chunks on separate threads");
  kernel->add_flag("--show-schedule", ko.show_schedule, "Include the expanded schedule in the report");

  // census
  auto* census = app.add_subcommand("census", "NaN-pattern and reuse censuses");
  census->require_subcommand(1);
  std::string nan_format;
  auto* nan_cmd = census->add_subcommand("nan", "Count NaN bit patterns of an IEEE format");
  nan_cmd->add_option("--format", nan_format, "binary16 or binary32")->required();
  std::string reuse_kernel;
  std::size_t reuse_size = 0;
  std::string reuse_variant = "standard";
  auto* reuse_cmd = census->add_subcommand("reuse", "Input reuse and reduction depth from a kernel's normal form");
  reuse_cmd->add_option("--kernel", reuse_kernel, "dot, matmul, outer or cg")->required();
  reuse_cmd->add_option("--size", reuse_size, "Operand extent n")->required()->check(CLI::Range(1, 4096));
  reuse_cmd->add_option("--variant", reuse_variant, "cg variant")->capture_default_str();

  // plan
  std::string plan_kernel;
  std::size_t plan_n = 0;
  std::string plan_model;
  std::string plan_variant = "standard";
  bool plan_table_flag = false;
  auto* plan_cmd = app.add_subcommand("plan", "Pick the cheapest tiling under a cost model");
  plan_cmd->add_option("--kernel", plan_kernel, "dot, matmul, outer or cg")->required();
  plan_cmd->add_option("--n", plan_n, "Operand extent")->required()->check(CLI::Range(std::size_t{1}, kMaxPlanExtent));
  plan_cmd->add_option("--cost-model", plan_model, "Cost model file")->required();
  plan_cmd->add_option("--variant", plan_variant, "cg variant")->capture_default_str();
  plan_cmd->add_flag("--table", plan_table_flag, "Print every candidate sorted by cost");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  // The report is only written once the command has succeeded.
  std::ostringstream report;
  auto finish = [&](int code) {
    if (code == kOk) out << report.str();
    return code;
  };
  try {
    if (*decode_cmd) return finish(cmd_posit_decode(po, report));
    if (*encode_cmd) return finish(cmd_posit_encode(po, report));
    if (*kernel) return finish(cmd_kernel(ko, report, err));
    if (*nan_cmd) return finish(cmd_census_nan(nan_format, report));
    if (*reuse_cmd) return finish(cmd_census_reuse(reuse_kernel, reuse_size, reuse_variant, report));
    if (*plan_cmd) return finish(cmd_plan(plan_kernel, plan_n, plan_model, plan_variant, plan_table_flag, report));
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::invalid_argument& e) {
    // Unknown kernel, variant, form or format names.
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace tc::cli
