#pragma once

#include <gmpxx.h>

#include <bit>
#include <concepts>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>

#include "tensorcore/posit.hpp"
#include "tensorcore/quire.hpp"
#include "tensorcore/rational.hpp"

namespace tc {

/// Arithmetic backend used by the kernels.
///
/// Reductions are expressed on `partial_type`: product() and lift() make
/// leaf terms, combine() merges two partials, finish() turns the final partial
/// into a value. Every operation that rounds bumps the rounding census.
template <class B>
concept Backend = requires(B b, const B cb, typename B::value_type v, typename B::partial_type p, const mpq_class& q) {
  { b.zero() } -> std::same_as<typename B::value_type>;
  { b.zero_partial() } -> std::same_as<typename B::partial_type>;
  { b.product(v, v) } -> std::same_as<typename B::partial_type>;
  { b.lift(v) } -> std::same_as<typename B::partial_type>;
  { b.combine(p, p) } -> std::same_as<typename B::partial_type>;
  { b.finish(p) } -> std::same_as<typename B::value_type>;
  { b.add(v, v) } -> std::same_as<typename B::value_type>;
  { b.sub(v, v) } -> std::same_as<typename B::value_type>;
  { b.mul(v, v) } -> std::same_as<typename B::value_type>;
  { b.div(v, v) } -> std::same_as<typename B::value_type>;
  { cb.is_zero(v) } -> std::same_as<bool>;
  { cb.from_rational(q) } -> std::same_as<typename B::value_type>;
  { cb.roundings() } -> std::same_as<std::size_t>;
  { cb.name() } -> std::convertible_to<std::string>;
};

/// Counts rounding steps; shared by all backends.
class RoundingCensus {
 public:
  std::size_t roundings() const { return roundings_; }
  void reset_census() { roundings_ = 0; }
  void absorb_census(const RoundingCensus& other) { roundings_ += other.roundings_; }

 protected:
  void rounded(std::size_t count = 1) { roundings_ += count; }

 private:
  std::size_t roundings_ = 0;
};

/// Posit values, exact quire reductions: one rounding per reduction.
class QuireBackend : public RoundingCensus {
 public:
  using value_type = Posit;
  using partial_type = Quire;

  explicit QuireBackend(PositConfig cfg = kPosit32) : cfg_(cfg) {}

  const PositConfig& config() const { return cfg_; }
  std::string name() const { return "posit-quire"; }

  Posit zero() const { return Posit::zero(cfg_); }
  Quire zero_partial() const { return Quire(cfg_); }
  Quire product(const Posit& a, const Posit& b) const {
    Quire q(cfg_);
    q.accumulate(a, b);
    return q;
  }
  Quire lift(const Posit& a) const {
    Quire q(cfg_);
    q.accumulate(a);
    return q;
  }
  Quire combine(Quire a, const Quire& b) const {
    a.merge(b);
    return a;
  }
  Posit finish(const Quire& q) {
    rounded();
    return q.to_posit();
  }

  Posit add(const Posit& a, const Posit& b) { return counted(a + b); }
  Posit sub(const Posit& a, const Posit& b) { return counted(a - b); }
  Posit mul(const Posit& a, const Posit& b) { return counted(a * b); }
  Posit div(const Posit& a, const Posit& b) { return counted(a / b); }

  bool is_zero(const Posit& v) const { return v.is_zero(); }
  Posit from_rational(const mpq_class& q) const { return encode_round(q, cfg_); }

 private:
  Posit counted(Posit v) {
    rounded();
    return v;
  }
  PositConfig cfg_;
};

/// Shared implementation of backends that round after every operation.
/// An empty optional is the identity of the reduction, so no rounding is
/// charged for folding the first term.
template <class Derived, class T>
class EagerBackend : public RoundingCensus {
 public:
  using value_type = T;
  using partial_type = std::optional<T>;

  partial_type zero_partial() const { return std::nullopt; }
  partial_type product(const T& a, const T& b) { return self().mul(a, b); }
  partial_type lift(const T& a) const { return a; }
  partial_type combine(const partial_type& a, const partial_type& b) {
    if (!a) return b;
    if (!b) return a;
    return self().add(*a, *b);
  }
  T finish(const partial_type& p) const { return p ? *p : self().zero(); }

 private:
  Derived& self() { return static_cast<Derived&>(*this); }
  const Derived& self() const { return static_cast<const Derived&>(*this); }
};

/// Posit values rounded after every multiply and add.
class PositNaiveBackend : public EagerBackend<PositNaiveBackend, Posit> {
 public:
  explicit PositNaiveBackend(PositConfig cfg = kPosit32) : cfg_(cfg) {}

  const PositConfig& config() const { return cfg_; }
  std::string name() const { return "posit-naive"; }

  Posit zero() const { return Posit::zero(cfg_); }
  Posit add(const Posit& a, const Posit& b) { return counted(a + b); }
  Posit sub(const Posit& a, const Posit& b) { return counted(a - b); }
  Posit mul(const Posit& a, const Posit& b) { return counted(a * b); }
  Posit div(const Posit& a, const Posit& b) { return counted(a / b); }

  bool is_zero(const Posit& v) const { return v.is_zero(); }
  Posit from_rational(const mpq_class& q) const { return encode_round(q, cfg_); }

 private:
  Posit counted(Posit v) {
    rounded();
    return v;
  }
  PositConfig cfg_;
};

/// IEEE binary32 / binary64 with round-to-nearest after every operation.
template <std::floating_point F>
class IeeeBackend : public EagerBackend<IeeeBackend<F>, F> {
 public:
  std::string name() const { return sizeof(F) == 4 ? "binary32" : "binary64"; }

  F zero() const { return F(0); }
  F add(F a, F b) { return counted(a + b); }
  F sub(F a, F b) { return counted(a - b); }
  F mul(F a, F b) { return counted(a * b); }
  F div(F a, F b) { return counted(a / b); }

  bool is_zero(F v) const { return v == F(0); }
  F from_rational(const mpq_class& q) const {
    if constexpr (sizeof(F) == 4) {
      return to_binary32(q);
    } else {
      return to_binary64(q);
    }
  }

 private:
  F counted(F v) {
    this->rounded();
    return v;
  }
};

using Binary32Backend = IeeeBackend<float>;
using Binary64Backend = IeeeBackend<double>;

/// Exact rational arithmetic; never rounds. The oracle backend.
class RationalBackend : public RoundingCensus {
 public:
  using value_type = mpq_class;
  using partial_type = mpq_class;

  std::string name() const { return "rational"; }

  mpq_class zero() const { return 0; }
  mpq_class zero_partial() const { return 0; }
  mpq_class product(const mpq_class& a, const mpq_class& b) const { return a * b; }
  mpq_class lift(const mpq_class& a) const { return a; }
  mpq_class combine(const mpq_class& a, const mpq_class& b) const { return a + b; }
  mpq_class finish(const mpq_class& p) const { return p; }

  mpq_class add(const mpq_class& a, const mpq_class& b) const { return a + b; }
  mpq_class sub(const mpq_class& a, const mpq_class& b) const { return a - b; }
  mpq_class mul(const mpq_class& a, const mpq_class& b) const { return a * b; }
  mpq_class div(const mpq_class& a, const mpq_class& b) const {
    if (b == 0) throw std::domain_error("rational division by zero");
    return a / b;
  }

  bool is_zero(const mpq_class& v) const { return v == 0; }
  mpq_class from_rational(const mpq_class& q) const { return q; }
};

// Canonical renderings of backend values.

inline std::string value_hex(const Posit& v) { return to_hex(v); }
inline std::string value_hex(float v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", std::bit_cast<std::uint32_t>(v));
  return buf;
}
inline std::string value_hex(double v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(v)));
  return buf;
}
/// Rationals have no bit pattern; their canonical text is the reduced fraction.
inline std::string value_hex(const mpq_class& v) { return v.get_str(); }

inline std::string value_decimal(const Posit& v) { return to_decimal_string(v); }
inline std::string value_decimal(float v) { return format_double(v); }
inline std::string value_decimal(double v) { return format_double(v); }
inline std::string value_decimal(const mpq_class& v) { return format_double(to_binary64(v)); }

inline mpq_class value_rational(const Posit& v) { return to_rational(v); }
inline mpq_class value_rational(float v) { return to_rational(v); }
inline mpq_class value_rational(double v) { return to_rational(v); }
inline mpq_class value_rational(const mpq_class& v) { return v; }

}  // namespace tc
