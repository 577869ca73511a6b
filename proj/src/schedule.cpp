#include "tensorcore/schedule.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tc {

namespace {

// Uniform integer in [0, range) by rejection; independent of the standard
// library's distribution implementations.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t range) {
  const std::uint64_t limit = (~std::uint64_t{0} / range) * range;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % range;
}

std::uint64_t parse_u64(std::string_view s, const char* what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument(std::string("schedule: malformed ") + what + ": " + std::string(s));
  }
  return v;
}

std::vector<std::size_t> parse_list(std::string_view s, const char* what) {
  std::vector<std::size_t> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = s.find(',', start);
    out.push_back(static_cast<std::size_t>(parse_u64(s.substr(start, comma - start), what)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

Schedule Schedule::sequential(std::size_t n) {
  Schedule s;
  s.permutation.resize(n);
  std::iota(s.permutation.begin(), s.permutation.end(), std::size_t{0});
  return s;
}

Schedule Schedule::reversed(std::size_t n) {
  Schedule s = sequential(n);
  std::reverse(s.permutation.begin(), s.permutation.end());
  return s;
}

Schedule Schedule::from_seed(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Schedule s = sequential(n);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded(rng, i));
    std::swap(s.permutation[i - 1], s.permutation[j]);
  }
  const auto levels = bounded(rng, 4);
  for (std::uint64_t l = 0; l < levels; ++l) s.fan_in.push_back(2 + static_cast<std::size_t>(bounded(rng, 15)));
  s.workers = 1 + static_cast<std::size_t>(bounded(rng, 8));
  s.seed = seed;
  return s;
}

Schedule Schedule::parse(std::string_view spec, std::size_t n) {
  if (spec == "sequential") return sequential(n);
  if (spec == "reversed") return reversed(n);
  if (spec.starts_with("seed:")) return from_seed(n, parse_u64(spec.substr(5), "seed"));

  Schedule s = sequential(n);
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t semi = spec.find(';', start);
    const std::string_view item = spec.substr(start, semi - start);
    if (!item.empty()) {
      const std::size_t eq = item.find('=');
      if (eq == std::string_view::npos) throw std::invalid_argument("schedule: expected key=value, got " + std::string(item));
      const std::string_view key = item.substr(0, eq);
      const std::string_view value = item.substr(eq + 1);
      if (key == "perm") {
        if (value == "identity") {
          s.permutation = sequential(n).permutation;
        } else if (value == "reverse") {
          s.permutation = reversed(n).permutation;
        } else {
          s.permutation = parse_list(value, "permutation");
        }
      } else if (key == "fanin") {
        s.fan_in = parse_list(value, "fan-in");
      } else if (key == "workers") {
        s.workers = static_cast<std::size_t>(parse_u64(value, "worker count"));
      } else {
        throw std::invalid_argument("schedule: unknown key " + std::string(key));
      }
    }
    if (semi == std::string_view::npos) break;
    start = semi + 1;
  }
  s.validate(n);
  return s;
}

void Schedule::validate(std::size_t n) const {
  if (permutation.size() != n) {
    throw std::invalid_argument("schedule covers " + std::to_string(permutation.size()) + " terms, expected " +
                                std::to_string(n));
  }
  std::vector<bool> seen(n, false);
  for (auto p : permutation) {
    if (p >= n || seen[p]) throw std::invalid_argument("schedule permutation is not a bijection");
    seen[p] = true;
  }
  for (auto f : fan_in) {
    if (f < 1) throw std::invalid_argument("schedule fan-in must be at least 1");
  }
  if (workers < 1) throw std::invalid_argument("schedule needs at least one worker");
}

std::string Schedule::describe() const {
  std::ostringstream os;
  if (seed) {
    os << "seed:" << *seed;
    return os.str();
  }
  os << "perm=";
  const bool identity = [&] {
    for (std::size_t i = 0; i < permutation.size(); ++i) {
      if (permutation[i] != i) return false;
    }
    return true;
  }();
  if (identity) {
    os << "identity";
  } else {
    for (std::size_t i = 0; i < permutation.size(); ++i) os << (i ? "," : "") << permutation[i];
  }
  os << ";fanin=";
  for (std::size_t i = 0; i < fan_in.size(); ++i) os << (i ? "," : "") << fan_in[i];
  os << ";workers=" << workers;
  return os.str();
}

std::vector<std::pair<std::size_t, std::size_t>> Schedule::worker_ranges() const {
  const std::size_t n = permutation.size();
  const std::size_t w = workers;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  std::size_t begin = 0;
  for (std::size_t c = 0; c < w; ++c) {
    const std::size_t len = n / w + (c < n % w ? 1 : 0);
    ranges.emplace_back(begin, begin + len);
    begin += len;
  }
  return ranges;
}

Schedule nested_schedule(const std::vector<std::size_t>& extents) {
  std::size_t n = 1;
  for (auto e : extents) n *= e;
  Schedule s = Schedule::sequential(n);
  for (std::size_t i = extents.size(); i-- > 1;) s.fan_in.push_back(extents[i]);
  return s;
}

}  // namespace tc
