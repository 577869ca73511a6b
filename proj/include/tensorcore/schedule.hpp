#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tc {

/// Concrete organization of an n-term reduction.
///
/// Terms are taken in `permutation` order and split into `workers` contiguous
/// chunks (the first n % workers chunks get one extra term). Inside a chunk,
/// level 0 folds consecutive groups of fan_in[0] terms left to right, level 1
/// folds groups of fan_in[1] level-0 results, and so on; whatever remains is
/// folded left to right. Chunk results are then folded left to right.
struct Schedule {
  std::vector<std::size_t> permutation;
  std::vector<std::size_t> fan_in;
  std::size_t workers = 1;
  /// Seed the schedule was expanded from, when it came from one.
  std::optional<std::uint64_t> seed;

  std::size_t size() const { return permutation.size(); }

  /// Identity order, plain left fold, one worker.
  static Schedule sequential(std::size_t n);
  static Schedule reversed(std::size_t n);

  /// Deterministic pseudorandom schedule. The generator is std::mt19937_64
  /// seeded with `seed`; bounded draws use rejection sampling (no
  /// implementation-defined distributions). Draw order: Fisher-Yates shuffle
  /// from the last position down; level count in [0, 3]; each fan-in in
  /// [2, 16]; worker count in [1, 8].
  static Schedule from_seed(std::size_t n, std::uint64_t seed);

  /// Parses `seed:<u64>`, `sequential`, `reversed`, or a `;`-separated list of
  /// `perm=identity|reverse|i0,i1,...`, `fanin=f0,f1,...`, `workers=<w>`.
  static Schedule parse(std::string_view spec, std::size_t n);

  /// Throws std::invalid_argument unless this is a valid schedule for n terms.
  void validate(std::size_t n) const;

  /// Canonical spec string accepted by parse().
  std::string describe() const;

  /// Contiguous [begin, end) term ranges, one per worker.
  std::vector<std::pair<std::size_t, std::size_t>> worker_ranges() const;

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

/// Reduction tree of a joint reduction over nested loop extents (outermost
/// first): the innermost extent is folded first, then the next, and so on.
Schedule nested_schedule(const std::vector<std::size_t>& extents);

/// Number of concrete orderings the property tests sweep by default.
inline constexpr std::size_t kDefaultScheduleSweep = 100;

}  // namespace tc
