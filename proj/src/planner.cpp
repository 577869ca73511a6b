#include "tensorcore/planner.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace tc {

namespace {

std::uint64_t parse_field(std::string_view token, std::string_view key, std::size_t line_no) {
  const std::string where = "cost model line " + std::to_string(line_no) + ": ";
  if (!token.starts_with(key) || token.size() <= key.size() || token[key.size()] != '=') {
    throw std::invalid_argument(where + "expected " + std::string(key) + "=<integer>, got " + std::string(token));
  }
  const std::string_view digits = token.substr(key.size() + 1);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
    throw std::invalid_argument(where + "malformed integer in " + std::string(token));
  }
  return v;
}

}  // namespace

CostModel CostModel::parse(std::string_view text) {
  CostModel cm;
  cm.levels.clear();
  bool have_element = false;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream words(line);
    std::vector<std::string> tokens;
    for (std::string w; words >> w;) tokens.push_back(w);
    if (tokens.empty()) continue;
    if (tokens[0] == "level") {
      if (tokens.size() != 4) {
        throw std::invalid_argument("cost model line " + std::to_string(line_no) +
                                    ": expected level capacity=<bytes> line=<bytes> miss=<units>");
      }
      cm.levels.push_back({parse_field(tokens[1], "capacity", line_no), parse_field(tokens[2], "line", line_no),
                           parse_field(tokens[3], "miss", line_no)});
    } else if (tokens[0].starts_with("element")) {
      if (tokens.size() != 1 || have_element) {
        throw std::invalid_argument("cost model line " + std::to_string(line_no) + ": bad element line");
      }
      cm.element = parse_field(tokens[0], "element", line_no);
      have_element = true;
    } else {
      throw std::invalid_argument("cost model line " + std::to_string(line_no) + ": unknown entry " + tokens[0]);
    }
  }
  if (!have_element) throw std::invalid_argument("cost model: missing element=<bytes>");
  cm.validate();
  return cm;
}

CostModel CostModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read cost model " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void CostModel::validate() const {
  if (levels.empty()) throw std::invalid_argument("cost model needs at least one level");
  if (element == 0) throw std::invalid_argument("cost model element size must be positive");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const CacheLevel& l = levels[i];
    if (l.line == 0) throw std::invalid_argument("cost model level " + std::to_string(i) + ": line size must be positive");
    if (l.capacity % l.line != 0) {
      throw std::invalid_argument("cost model level " + std::to_string(i) + ": line size must divide capacity");
    }
    if (i > 0 && l.capacity <= levels[i - 1].capacity) {
      throw std::invalid_argument("cost model capacities must strictly increase");
    }
  }
}

std::string CostModel::to_string() const {
  std::ostringstream os;
  for (const CacheLevel& l : levels) os << "level capacity=" << l.capacity << " line=" << l.line << " miss=" << l.miss << "\n";
  os << "element=" << element << "\n";
  return os.str();
}

namespace {

void check_tiles(const NormalForm& nf, const std::vector<std::size_t>& tiles) {
  if (tiles.size() != nf.loops.size()) {
    throw std::invalid_argument("need " + std::to_string(nf.loops.size()) + " tile sizes, got " +
                                std::to_string(tiles.size()));
  }
  for (std::size_t v = 0; v < tiles.size(); ++v) {
    if (tiles[v] == 0 || nf.loops[v].extent % tiles[v] != 0) {
      throw std::invalid_argument("tile " + std::to_string(tiles[v]) + " does not divide extent " +
                                  std::to_string(nf.loops[v].extent) + " of loop " + nf.loops[v].name);
    }
  }
}

std::vector<std::size_t> divisors(std::size_t n) {
  std::vector<std::size_t> d;
  for (std::size_t k = 1; k <= n; ++k) {
    if (n % k == 0) d.push_back(k);
  }
  return d;
}

}  // namespace

std::uint64_t predict_cost(const NormalForm& nf, const std::vector<std::size_t>& tiles, const CostModel& cm) {
  check_tiles(nf, tiles);
  cm.validate();

  struct Site {
    const ArrayRef* ref;
    std::vector<std::int64_t> offsets;  // flat element offsets of the origin tile
    std::uint64_t tiles_run = 1;
    std::uint64_t accesses = 1;
  };
  std::vector<Site> sites;
  for (const RefSite& rs : reference_sites(nf)) {
    if (rs.is_output) continue;
    Site s{rs.ref, {}, 1, 1};
    for (int l : rs.enclosing) {
      const auto v = static_cast<std::size_t>(l);
      s.tiles_run *= nf.loops[v].extent / tiles[v];
      s.accesses *= nf.loops[v].extent;
    }
    std::vector<std::size_t> point(nf.loops.size(), 0);
    std::function<void(std::size_t)> rec = [&](std::size_t d) {
      if (d == rs.enclosing.size()) {
        s.offsets.push_back(rs.ref->flat.eval(point));
        return;
      }
      const auto v = static_cast<std::size_t>(rs.enclosing[d]);
      for (std::size_t x = 0; x < tiles[v]; ++x) {
        point[v] = x;
        rec(d + 1);
      }
      point[v] = 0;
    };
    rec(0);
    sites.push_back(std::move(s));
  }

  std::uint64_t total = 0;
  for (const CacheLevel& level : cm.levels) {
    std::vector<std::uint64_t> lines(sites.size());
    std::set<std::pair<std::string, std::int64_t>> working_set;
    for (std::size_t s = 0; s < sites.size(); ++s) {
      std::set<std::int64_t> own;
      for (std::int64_t off : sites[s].offsets) {
        const std::int64_t line = off * static_cast<std::int64_t>(cm.element) / static_cast<std::int64_t>(level.line);
        own.insert(line);
        working_set.insert({sites[s].ref->array, line});
      }
      lines[s] = own.size();
    }
    const bool fits = working_set.size() * level.line <= level.capacity;
    for (std::size_t s = 0; s < sites.size(); ++s) {
      total += (fits ? lines[s] * sites[s].tiles_run : sites[s].accesses) * level.miss;
    }
  }
  return total;
}

std::map<std::string, std::vector<std::pair<std::size_t, std::size_t>>> implied_lifts(
    const NormalForm& nf, const std::vector<std::size_t>& tiles) {
  check_tiles(nf, tiles);
  std::map<std::string, std::vector<std::pair<std::size_t, std::size_t>>> out;
  for (const RefSite& rs : reference_sites(nf)) {
    const ArrayRef& r = *rs.ref;
    for (std::size_t axis = 0; axis < r.coords.size(); ++axis) {
      const auto& terms = r.coords[axis].terms();
      if (terms.size() != 1 || terms[0].loop < 0 || terms[0].coeff != 1) continue;
      const auto v = static_cast<std::size_t>(terms[0].loop);
      if (tiles[v] == nf.loops[v].extent) continue;
      auto& list = out[r.array];
      const std::pair<std::size_t, std::size_t> lift{axis, tiles[v]};
      if (std::find(list.begin(), list.end(), lift) == list.end()) list.push_back(lift);
    }
  }
  return out;
}

std::vector<PlanCandidate> plan_table(const NormalForm& nf, const CostModel& cm) {
  cm.validate();
  std::vector<std::vector<std::size_t>> choices;
  for (const Loop& l : nf.loops) {
    if (l.extent > kMaxPlanExtent) {
      throw std::invalid_argument("plan: loop " + l.name + " extent " + std::to_string(l.extent) + " exceeds " +
                                  std::to_string(kMaxPlanExtent));
    }
    choices.push_back(divisors(l.extent));
  }
  std::vector<PlanCandidate> table;
  std::vector<std::size_t> tiles(nf.loops.size());
  std::function<void(std::size_t)> rec = [&](std::size_t d) {
    if (d == choices.size()) {
      table.push_back({tiles, predict_cost(nf, tiles, cm)});
      return;
    }
    for (std::size_t t : choices[d]) {
      tiles[d] = t;
      rec(d + 1);
    }
  };
  rec(0);
  return table;
}

LayoutPlan plan(const NormalForm& nf, const CostModel& cm) {
  const auto table = plan_table(nf, cm);
  // The table is in lexicographic order, so the first minimum wins ties.
  const PlanCandidate* best = &table.front();
  for (const PlanCandidate& c : table) {
    if (c.cost < best->cost) best = &c;
  }
  LayoutPlan p;
  p.tiles = best->tiles;
  p.predicted_cost = best->cost;
  p.lifts = implied_lifts(nf, p.tiles);
  return p;
}

std::string LayoutPlan::tiles_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < tiles.size(); ++i) s += (i ? "," : "") + std::to_string(tiles[i]);
  return s + ")";
}

std::string LayoutPlan::lifts_string() const {
  if (lifts.empty()) return "none";
  std::string s;
  for (const auto& [array, list] : lifts) {
    for (const auto& [axis, block] : list) {
      if (!s.empty()) s += " ";
      s += array + ":" + std::to_string(axis) + "/" + std::to_string(block);
    }
  }
  return s;
}

}  // namespace tc
