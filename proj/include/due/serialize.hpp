#pragma once

// JSON descriptions of the core types. Kept out of the math headers so the
// library core depends on Eigen only.

#include <due/nilgroup.hpp>

#include <json.hpp>

namespace due {

inline nlohmann::json nil_structure_to_json(const NilStructured& s) {
  nlohmann::json brackets = nlohmann::json::array();
  for (int k = 0; k < s.central(); ++k)
    for (int i = 0; i < s.dim(); ++i)
      for (int j = i + 1; j < s.dim(); ++j)
        if (s.bracket_tables()[k](i, j) != 0.0)
          brackets.push_back({i, j, k, s.bracket_tables()[k](i, j)});
  return {{"d", s.dim()}, {"c", s.central()}, {"brackets", brackets}};
}

inline NilStructured nil_structure_from_json(const nlohmann::json& j) {
  std::vector<BracketEntry<double>> entries;
  for (const auto& t : j.at("brackets"))
    entries.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>(),
                       t.at(3).get<double>()});
  return make_nil_structure<double>(j.at("d").get<int>(), j.at("c").get<int>(), entries);
}

}  // namespace due
