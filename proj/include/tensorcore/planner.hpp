#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tensorcore/normal_form.hpp"

namespace tc {

struct CacheLevel {
  std::uint64_t capacity = 0;  // bytes
  std::uint64_t line = 0;      // bytes
  std::uint64_t miss = 0;      // cost units per line fetch

  friend bool operator==(const CacheLevel&, const CacheLevel&) = default;
};

/// Memory hierarchy description, innermost level first.
struct CostModel {
  std::vector<CacheLevel> levels;
  std::uint64_t element = 8;  // bytes per array element

  /// Parses the line format `level capacity=<bytes> line=<bytes> miss=<units>`
  /// plus one `element=<bytes>` line. Blank lines and `#` comments are ignored.
  static CostModel parse(std::string_view text);
  static CostModel load(const std::string& path);

  /// Throws std::invalid_argument unless capacities strictly increase, every
  /// line size is positive and divides its capacity, and there is a level.
  void validate() const;

  std::string to_string() const;

  friend bool operator==(const CostModel&, const CostModel&) = default;
};

/// Largest loop extent plan() accepts.
inline constexpr std::size_t kMaxPlanExtent = 4096;

/// Footprint cost of running `nf` with the given tile size per loop.
///
/// Only loads are charged. For every level and every read reference, take
/// the origin tile of the loops enclosing that reference (each loop v ranging
/// over [0, tiles[v])) and count the distinct cache lines it touches; arrays
/// start on line boundaries and never share lines. If the union of those lines
/// over all references fits in the level, a reference costs
/// lines * tiles_run * miss, where tiles_run is the number of tiles of its
/// enclosing loops; otherwise every one of its accesses costs miss.
std::uint64_t predict_cost(const NormalForm& nf, const std::vector<std::size_t>& tiles, const CostModel& cm);

struct LayoutPlan {
  std::vector<std::size_t> tiles;
  /// Dimension lifts implied by the tiles: operand -> (axis, block) pairs.
  std::map<std::string, std::vector<std::pair<std::size_t, std::size_t>>> lifts;
  std::uint64_t predicted_cost = 0;

  std::string tiles_string() const;
  std::string lifts_string() const;
};

struct PlanCandidate {
  std::vector<std::size_t> tiles;
  std::uint64_t cost = 0;
};

/// Every divisor tiling of `nf` with its predicted cost, in lexicographic tile order.
std::vector<PlanCandidate> plan_table(const NormalForm& nf, const CostModel& cm);

/// Cheapest divisor tiling; ties go to the lexicographically smallest tiles.
LayoutPlan plan(const NormalForm& nf, const CostModel& cm);

/// Lifts implied by a tiling of `nf`.
std::map<std::string, std::vector<std::pair<std::size_t, std::size_t>>> implied_lifts(
    const NormalForm& nf, const std::vector<std::size_t>& tiles);

}  // namespace tc
