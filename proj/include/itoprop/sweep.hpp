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

#include <atomic>
#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ito {

/// Stable per-cell seed derived from (master seed, cell index, target index)
/// by splitmix64-style mixing; independent of worker count and execution
/// order.
inline std::uint64_t cell_seed(std::uint64_t master, std::uint64_t cell, std::uint64_t target = 0) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(master) ^ cell) ^ (target + 0x51ed2701a7b5e3dull));
}

/// Runs fn(cell) for cell = 0..n_cells-1 on a pool of n_threads workers.
/// Each cell must be a pure function of its inputs; results land in cell
/// order regardless of scheduling. The first exception is rethrown after all
/// workers join.
template <typename Result>
std::vector<Result> run_parallel(int n_cells, int n_threads, const std::function<Result(int)>& fn) {
  if (n_cells < 0) throw std::invalid_argument("run_parallel: negative cell count");
  std::vector<Result> results(static_cast<std::size_t>(n_cells));
  if (n_cells == 0) return results;
  n_threads = std::max(1, std::min(n_threads, n_cells));

  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (int cell = next.fetch_add(1); cell < n_cells; cell = next.fetch_add(1)) {
      if (failed.load(std::memory_order_relaxed)) return;
      try {
        results[std::size_t(cell)] = fn(cell);
      } catch (...) {
        if (!failed.exchange(true)) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

/// CSV with `#`-prefixed metadata lines, a header row, and %.12g-formatted
/// numeric cells. Rows are written in the order they are appended, so
/// deterministic output only requires appending in cell order.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open output file: " + path);
  }

  void metadata(const std::string& key, const std::string& value) { out_ << "# " << key << " = " << value << '\n'; }
  void metadata(const std::string& key, std::uint64_t value) { metadata(key, std::to_string(value)); }

  void header(const std::vector<std::string>& columns) { write_row(columns); }

  void row(const std::vector<std::string>& cells) { write_row(cells); }

  static std::string num(double v) {
    std::ostringstream s;
    s << std::setprecision(12) << v;
    return s.str();
  }

  void flush() { out_.flush(); }

 private:
  void write_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::ofstream out_;
};

}  // namespace ito
