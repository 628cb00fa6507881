#include "ciflab/simple_function_io.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cif {
namespace {

struct RawCell {
  Vec lo, hi;
  double weight;
  Vec value;
};

SimpleFunction assemble(std::vector<RawCell> cells, std::size_t axes, std::size_t d) {
  if (cells.empty()) throw std::invalid_argument("simple function input has no cells");
  std::vector<Vec> breaks(axes);
  for (const RawCell& c : cells) {
    if (c.lo.size() != axes || c.hi.size() != axes || c.value.size() != d)
      throw std::invalid_argument("cell record has the wrong number of fields");
    for (std::size_t a = 0; a < axes; ++a) {
      if (!(c.lo[a] < c.hi[a])) throw std::invalid_argument("cell with lo >= hi");
      breaks[a].push_back(c.lo[a]);
      breaks[a].push_back(c.hi[a]);
    }
  }
  for (Vec& b : breaks) {
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
  }
  std::size_t expected = 1;
  for (const Vec& b : breaks) expected *= b.size() - 1;
  if (expected != cells.size())
    throw std::invalid_argument("cells do not form a tensor grid covering the box (expected " +
                                std::to_string(expected) + " cells, got " + std::to_string(cells.size()) + ")");

  const MeasureSpace probe = MeasureSpace::lebesgue(breaks);
  Vec weights(expected, 0.0), values(expected * d, 0.0);
  std::vector<bool> seen(expected, false);
  bool lebesgue = true;
  for (const RawCell& c : cells) {
    std::vector<std::size_t> idx(axes);
    for (std::size_t a = 0; a < axes; ++a) {
      const auto it = std::lower_bound(breaks[a].begin(), breaks[a].end(), c.lo[a]);
      idx[a] = static_cast<std::size_t>(it - breaks[a].begin());
      if (idx[a] + 1 >= breaks[a].size() || breaks[a][idx[a] + 1] != c.hi[a])
        throw std::invalid_argument("cell does not match a single grid cell");
    }
    const std::size_t k = probe.ravel(idx);
    if (seen[k]) throw std::invalid_argument("duplicate cell in input");
    seen[k] = true;
    if (!(c.weight > 0.0) || !std::isfinite(c.weight)) throw std::invalid_argument("cell weight must be positive");
    weights[k] = c.weight;
    std::copy(c.value.begin(), c.value.end(), values.begin() + static_cast<std::ptrdiff_t>(k * d));
    if (std::abs(c.weight - probe.weight(k)) > 1e-12 * probe.weight(k)) lebesgue = false;
  }
  auto space = std::make_shared<const MeasureSpace>(lebesgue ? probe : MeasureSpace::weighted(breaks, weights));
  return SimpleFunction(std::move(space), d, std::move(values));
}

}  // namespace

void write_csv(std::ostream& out, const SimpleFunction& x) {
  const MeasureSpace& sp = x.space();
  const std::size_t k = sp.axes();
  for (std::size_t a = 0; a < k; ++a) out << "lo_" << a + 1 << ",";
  for (std::size_t a = 0; a < k; ++a) out << "hi_" << a + 1 << ",";
  out << "weight";
  for (std::size_t i = 0; i < x.d(); ++i) out << ",v_" << i + 1;
  out << "\n";
  out << std::setprecision(17);
  Vec lo, hi;
  for (std::size_t c = 0; c < sp.cell_count(); ++c) {
    sp.cell_bounds(c, lo, hi);
    for (double v : lo) out << v << ",";
    for (double v : hi) out << v << ",";
    out << sp.weight(c);
    for (double v : x.cell_value(c)) out << "," << v;
    out << "\n";
  }
}

SimpleFunction read_csv(std::istream& in, std::size_t axes, std::size_t d) {
  std::vector<RawCell> cells;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string tok;
    bool numeric = true;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t used = 0;
        fields.push_back(std::stod(tok, &used));
        if (tok.find_first_not_of(" \t\r", used) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (cells.empty() && line_no == 1) continue;  // header
      throw std::invalid_argument("non-numeric CSV field on line " + std::to_string(line_no));
    }
    if (fields.size() != 2 * axes + 1 + d)
      throw std::invalid_argument("CSV line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                  " fields, expected " + std::to_string(2 * axes + 1 + d));
    RawCell c;
    c.lo.assign(fields.begin(), fields.begin() + static_cast<std::ptrdiff_t>(axes));
    c.hi.assign(fields.begin() + static_cast<std::ptrdiff_t>(axes), fields.begin() + static_cast<std::ptrdiff_t>(2 * axes));
    c.weight = fields[2 * axes];
    c.value.assign(fields.begin() + static_cast<std::ptrdiff_t>(2 * axes + 1), fields.end());
    cells.push_back(std::move(c));
  }
  return assemble(std::move(cells), axes, d);
}

nlohmann::json to_json(const SimpleFunction& x) {
  nlohmann::json arr = nlohmann::json::array();
  const MeasureSpace& sp = x.space();
  Vec lo, hi;
  for (std::size_t c = 0; c < sp.cell_count(); ++c) {
    sp.cell_bounds(c, lo, hi);
    const auto v = x.cell_value(c);
    arr.push_back({{"lo", lo}, {"hi", hi}, {"weight", sp.weight(c)}, {"value", Vec(v.begin(), v.end())}});
  }
  return arr;
}

SimpleFunction simple_function_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("simple function JSON must be a non-empty array");
  std::vector<RawCell> cells;
  const std::size_t axes = j[0].at("lo").size();
  const std::size_t d = j[0].at("value").size();
  for (const auto& e : j) {
    RawCell c;
    c.lo = e.at("lo").get<Vec>();
    c.hi = e.at("hi").get<Vec>();
    c.weight = e.at("weight").get<double>();
    c.value = e.at("value").get<Vec>();
    cells.push_back(std::move(c));
  }
  return assemble(std::move(cells), axes, d);
}

}  // namespace cif
