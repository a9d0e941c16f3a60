// Copyright 2026 The itoprop developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "itoprop/gates.hpp"

namespace ito {

/// Loads the gate equivalence-class catalog: a JSON array of objects with
/// "name", "triple" (3 reals), and "matrix" (4x4 of [re, im] pairs). Each
/// entry's triple is verified against its defining matrix so a stale or
/// hand-edited file fails loudly.
inline EquivalenceCatalog load_catalog(const std::string& path, double tol = 1e-10) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open gate catalog: " + path);
  nlohmann::json doc;
  in >> doc;
  EquivalenceCatalog cat;
  for (const auto& entry : doc) {
    GateClass cls;
    cls.name = entry.at("name").get<std::string>();
    const auto& triple = entry.at("triple");
    if (triple.size() != 3) throw std::runtime_error("catalog entry '" + cls.name + "': triple must have 3 entries");
    for (int i = 0; i < 3; ++i) cls.triple(i) = triple.at(std::size_t(i)).get<double>();
    const auto& rows = entry.at("matrix");
    if (rows.size() != 4) throw std::runtime_error("catalog entry '" + cls.name + "': matrix must be 4x4");
    cls.gate = Matrix(4, 4);
    for (int r = 0; r < 4; ++r) {
      const auto& row = rows.at(static_cast<std::size_t>(r));
      if (row.size() != 4) throw std::runtime_error("catalog entry '" + cls.name + "': matrix must be 4x4");
      for (int c = 0; c < 4; ++c) {
        const auto& cell = row.at(static_cast<std::size_t>(c));
        cls.gate(r, c) = Complex{cell.at(0).get<double>(), cell.at(1).get<double>()};
      }
    }
    const LocalInvariants check = makhlin_invariants(cls.gate);
    if ((check.vec() - cls.triple).norm() > tol)
      throw std::runtime_error("catalog entry '" + cls.name + "': stored triple does not match its gate matrix");
    cat.push_back(std::move(cls));
  }
  return cat;
}

inline void save_catalog(const EquivalenceCatalog& cat, const std::string& path) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& cls : cat) {
    nlohmann::json entry;
    entry["name"] = cls.name;
    entry["triple"] = {cls.triple(0), cls.triple(1), cls.triple(2)};
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < 4; ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < 4; ++c) row.push_back({cls.gate(r, c).real(), cls.gate(r, c).imag()});
      rows.push_back(row);
    }
    entry["matrix"] = rows;
    doc.push_back(entry);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write gate catalog: " + path);
  out << doc.dump(2) << '\n';
}

}  // namespace ito
