#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "ciflab/measure_space.hpp"

namespace cif {

// CSV layout: one row per cell,
//   lo_1..lo_k, hi_1..hi_k, weight, v_1..v_d
// preceded by a header row. The JSON form is an array of
//   {"lo": [...], "hi": [...], "weight": w, "value": [...]}.
// Cells may appear in any order on input but must tile the bounding box as
// a tensor grid; weights equal to cell volumes yield a Lebesgue space.

void write_csv(std::ostream& out, const SimpleFunction& x);
SimpleFunction read_csv(std::istream& in, std::size_t axes, std::size_t d);

nlohmann::json to_json(const SimpleFunction& x);
SimpleFunction simple_function_from_json(const nlohmann::json& j);

}  // namespace cif
