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

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ito {

/// Line-oriented configuration: `[section]` headers, `key = value` entries,
/// `#` comments. Values are kept as trimmed strings; typed access below.
class ExperimentConfig {
 public:
  using Section = std::map<std::string, std::string>;

  static ExperimentConfig parse(std::istream& in) {
    ExperimentConfig cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string t = trim(line);
      if (t.empty()) continue;
      if (t.front() == '[') {
        if (t.back() != ']') throw std::runtime_error("config line " + std::to_string(lineno) + ": unterminated section");
        section = trim(t.substr(1, t.size() - 2));
        cfg.sections_[section];
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
      cfg.sections_[section][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return cfg;
  }

  static ExperimentConfig parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    return parse(in);
  }

  static ExperimentConfig parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  bool has(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
  }

  std::string get(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end() || !s->second.count(key))
      throw std::runtime_error("missing config key: [" + section + "] " + key);
    return s->second.at(key);
  }

  std::string get_or(const std::string& section, const std::string& key, const std::string& dflt) const {
    return has(section, key) ? get(section, key) : dflt;
  }

  double get_double(const std::string& section, const std::string& key) const {
    return parse_double(get(section, key), section, key);
  }
  double get_double_or(const std::string& section, const std::string& key, double dflt) const {
    return has(section, key) ? get_double(section, key) : dflt;
  }
  long long get_int(const std::string& section, const std::string& key) const {
    return std::stoll(get(section, key));
  }
  long long get_int_or(const std::string& section, const std::string& key, long long dflt) const {
    return has(section, key) ? get_int(section, key) : dflt;
  }
  bool get_bool_or(const std::string& section, const std::string& key, bool dflt) const {
    if (!has(section, key)) return dflt;
    const std::string v = get(section, key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::runtime_error("config key [" + section + "] " + key + ": expected a boolean, got '" + v + "'");
  }

  /// Comma-separated list of reals.
  std::vector<double> get_list(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    std::istringstream in(get(section, key));
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(parse_double(trim(item), section, key));
    return out;
  }
  std::vector<double> get_list_or(const std::string& section, const std::string& key,
                                  std::vector<double> dflt) const {
    return has(section, key) ? get_list(section, key) : dflt;
  }

  void set(const std::string& section, const std::string& key, const std::string& value) {
    sections_[section][key] = value;
  }

  /// Deterministic serialization (sections and keys sorted); basis for the
  /// config hash and the resolved-config file written next to outputs.
  std::string canonical_dump() const {
    std::ostringstream out;
    for (const auto& [name, sec] : sections_) {
      out << '[' << name << "]\n";
      for (const auto& [k, v] : sec) out << k << " = " << v << '\n';
    }
    return out.str();
  }

  std::uint64_t hash() const { return fnv1a(canonical_dump()); }

  static std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (const unsigned char c : data) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  }

  const std::map<std::string, Section>& sections() const { return sections_; }

 private:
  static std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
  }

  static double parse_double(const std::string& v, const std::string& section, const std::string& key) {
    try {
      std::size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw std::runtime_error("config key [" + section + "] " + key + ": expected a number, got '" + v + "'");
    }
  }

  std::map<std::string, Section> sections_;
};

}  // namespace ito
