#include "sparsear/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sparsear {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

bool try_parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

bool try_parse_int(const std::string& s, long& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

double parse_finite(const std::string& cell, const std::string& path,
                    std::size_t row) {
  double v;
  if (!try_parse_double(cell, v) || !std::isfinite(v)) {
    throw std::invalid_argument(path + ": row " + std::to_string(row) +
                                ": cell '" + cell +
                                "' is not a finite number");
  }
  return v;
}

long parse_index(const std::string& cell, const std::string& path,
                 std::size_t row, const char* what) {
  long v;
  if (!try_parse_int(cell, v) || v < 1) {
    throw std::invalid_argument(path + ": row " + std::to_string(row) + ": " +
                                what + " '" + cell +
                                "' is not a positive integer");
  }
  return v;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open file: " + path);
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  // A single trailing newline is not an empty record.
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write file: " + path);
  }
  return out;
}

void finish_out(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

std::string join_lags(std::span<const int> support) {
  std::string s;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(support[i] + 1);
  }
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

TimeSeries read_univariate(const std::string& path,
                           const std::string& column) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) {
    throw std::invalid_argument(path + ": empty file");
  }
  const std::vector<std::string> first = split_csv(lines[0]);

  std::size_t col = 0;
  std::size_t data_start = 0;  // line index of the first data row
  if (!column.empty()) {
    const auto it = std::find(first.begin(), first.end(), column);
    if (it != first.end()) {
      col = static_cast<std::size_t>(it - first.begin());
      data_start = 1;
    } else {
      long idx;
      if (!try_parse_int(column, idx) || idx < 1) {
        throw std::invalid_argument(path + ": column '" + column +
                                    "' not found in header");
      }
      col = static_cast<std::size_t>(idx - 1);
    }
  }
  if (data_start == 0) {
    // Header row detection: a non-numeric first cell in the selected column.
    double probe;
    if (col < first.size() && !try_parse_double(first[col], probe)) {
      data_start = 1;
    }
  }

  TimeSeries x;
  for (std::size_t i = data_start; i < lines.size(); ++i) {
    const std::vector<std::string> cells = split_csv(lines[i]);
    if (col >= cells.size()) {
      throw std::invalid_argument(path + ": row " + std::to_string(i + 1) +
                                  ": missing column " + std::to_string(col + 1));
    }
    x.values.push_back(parse_finite(cells[col], path, i + 1));
  }
  if (x.values.empty()) {
    throw std::invalid_argument(path + ": no data rows");
  }
  return x;
}

GridSeries read_grid(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  std::size_t i = 0;
  while (i < lines.size() && (trim(lines[i]).empty() ||
                              trim(lines[i]).front() == '#')) {
    ++i;
  }
  if (i == lines.size()) {
    throw std::invalid_argument(path + ": empty file");
  }
  const std::vector<std::string> header = split_csv(lines[i]);
  const std::vector<std::string> want = {"m", "n", "gamma", "t", "value"};
  if (std::vector<std::string>(header.begin(), header.end()) != want) {
    throw std::invalid_argument(path +
                                ": expected header 'm,n,gamma,t,value'");
  }
  ++i;

  struct Key {
    long m, n, g;
    bool operator<(const Key& o) const {
      if (m != o.m) return m < o.m;
      if (n != o.n) return n < o.n;
      return g < o.g;
    }
  };
  std::map<Key, std::map<long, double>> cells;
  long max_m = 0, max_n = 0, max_g = 0;
  std::map<long, long> seg_max_t;

  for (; i < lines.size(); ++i) {
    const std::string line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const std::vector<std::string> c = split_csv(line);
    if (c.size() != 5) {
      throw std::invalid_argument(path + ": row " + std::to_string(i + 1) +
                                  ": expected 5 columns");
    }
    const long m = parse_index(c[0], path, i + 1, "m");
    const long n = parse_index(c[1], path, i + 1, "n");
    const long g = parse_index(c[2], path, i + 1, "gamma");
    const long t = parse_index(c[3], path, i + 1, "t");
    const double v = parse_finite(c[4], path, i + 1);
    const Key key{m, n, g};
    if (!cells[key].emplace(t, v).second) {
      throw std::invalid_argument(
          path + ": duplicate entry for cell (" + std::to_string(m) + "," +
          std::to_string(n) + "," + std::to_string(g) + ") at t=" +
          std::to_string(t));
    }
    max_m = std::max(max_m, m);
    max_n = std::max(max_n, n);
    max_g = std::max(max_g, g);
    auto [it_t, inserted] = seg_max_t.emplace(g, t);
    if (!inserted) it_t->second = std::max(it_t->second, t);
  }
  if (cells.empty()) {
    throw std::invalid_argument(path + ": no data rows");
  }

  GridSeries grid;
  grid.rows = static_cast<int>(max_m);
  grid.cols = static_cast<int>(max_n);
  grid.num_segments = static_cast<int>(max_g);
  grid.seg_len.assign(grid.num_segments, 0);
  for (const auto& [g, tmax] : seg_max_t) {
    grid.seg_len[g - 1] = static_cast<int>(tmax);
  }
  grid.cells.resize(grid.cell_count());
  grid.present.assign(grid.cell_count(), 0);

  for (const auto& [key, obs] : cells) {
    const long tmax = seg_max_t.at(key.g);
    if (static_cast<long>(obs.size()) != tmax || obs.begin()->first != 1 ||
        obs.rbegin()->first != tmax) {
      throw std::invalid_argument(
          path + ": cell (" + std::to_string(key.m) + "," +
          std::to_string(key.n) + "," + std::to_string(key.g) +
          ") does not cover t=1.." + std::to_string(tmax) + " completely");
    }
    std::vector<double> series(obs.size());
    for (const auto& [t, v] : obs) series[t - 1] = v;
    const std::size_t c = grid.flat(static_cast<int>(key.m - 1),
                                    static_cast<int>(key.n - 1),
                                    static_cast<int>(key.g - 1));
    grid.cells[c] = std::move(series);
    grid.present[c] = 1;
  }
  return grid;
}

void write_univariate(const std::string& path, const TimeSeries& x) {
  std::ofstream out = open_out(path);
  out << "value\n";
  for (double v : x.values) out << format_double(v) << "\n";
  finish_out(out, path);
}

void write_grid(const std::string& path, const GridSeries& g) {
  for (int s = 0; s < g.num_segments; ++s) {
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
      // Writers assume the documented within-segment length invariant.
      if (g.present[c] && static_cast<long>(c) % g.num_segments == s &&
          static_cast<int>(g.cells[c].size()) != g.seg_len[s]) {
        throw std::invalid_argument(
            "write_grid: cell length differs from its segment length");
      }
    }
  }
  std::ofstream out = open_out(path);
  out << "m,n,gamma,t,value\n";
  for (int m = 0; m < g.rows; ++m) {
    for (int n = 0; n < g.cols; ++n) {
      for (int s = 0; s < g.num_segments; ++s) {
        const std::size_t c = g.flat(m, n, s);
        if (!g.present[c]) continue;
        const std::vector<double>& series = g.cells[c];
        for (std::size_t t = 0; t < series.size(); ++t) {
          out << (m + 1) << "," << (n + 1) << "," << (s + 1) << ","
              << (t + 1) << "," << format_double(series[t]) << "\n";
        }
      }
    }
  }
  finish_out(out, path);
}

void write_segment_fit(const std::string& path, std::span<const int> support,
                       const Eigen::MatrixXd& W) {
  std::ofstream out = open_out(path);
  out << "# omega=" << join_lags(support) << "\n";
  out << "gamma,k,w\n";
  for (long g = 0; g < W.rows(); ++g) {
    for (int k : support) {
      const double w = W(g, k);
      if (w == 0.0) continue;
      out << (g + 1) << "," << (k + 1) << "," << format_double(w) << "\n";
    }
  }
  finish_out(out, path);
}

void write_grid_fit(const std::string& path, const StvSarResult& res) {
  std::ofstream out = open_out(path);
  out << "m,n,gamma,k,w\n";
  for (int m = 0; m < res.rows; ++m) {
    for (int n = 0; n < res.cols; ++n) {
      for (int s = 0; s < res.num_segments; ++s) {
        const std::size_t c =
            (static_cast<std::size_t>(m) * res.cols + n) * res.num_segments +
            s;
        if (!res.present[c]) continue;
        for (std::size_t a = 0; a < res.support.size(); ++a) {
          out << (m + 1) << "," << (n + 1) << "," << (s + 1) << ","
              << (res.support[a] + 1) << ","
              << format_double(res.cell_weights[c](static_cast<long>(a)))
              << "\n";
        }
      }
    }
  }
  finish_out(out, path);
}

void write_seasonality(const std::string& path, const SeasonalityMap& map) {
  std::ofstream out = open_out(path);
  out << "# k=" << (map.lag + 1) << "\n";
  out << "m,n,gamma,value\n";
  for (int m = 0; m < map.rows; ++m) {
    for (int n = 0; n < map.cols; ++n) {
      for (int s = 0; s < map.num_segments; ++s) {
        const std::size_t c =
            (static_cast<std::size_t>(m) * map.cols + n) * map.num_segments +
            s;
        if (!map.present[c]) continue;
        out << (m + 1) << "," << (n + 1) << "," << (s + 1) << ","
            << format_double(map.values[c]) << "\n";
      }
    }
  }
  finish_out(out, path);
}

void write_bench(const std::string& path, std::span<const BenchRow> rows) {
  std::ofstream out = open_out(path);
  out << "dataset,order,tau,solver,objective,wall_time_s,certified\n";
  for (const BenchRow& r : rows) {
    out << r.dataset << "," << r.order << "," << r.tau << "," << r.solver
        << "," << format_double(r.objective) << ","
        << format_double(r.wall_time_s) << "," << (r.certified ? 1 : 0)
        << "\n";
  }
  finish_out(out, path);
}

SegmentFitTable read_segment_fit(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  SegmentFitTable table;
  std::size_t i = 0;
  for (; i < lines.size(); ++i) {
    const std::string line = trim(lines[i]);
    if (line.rfind("# omega=", 0) == 0) {
      std::string rest = line.substr(8);
      if (!rest.empty()) {
        for (const std::string& tok : split_csv(rest)) {
          table.omega.push_back(
              static_cast<int>(parse_index(tok, path, i + 1, "omega lag")));
        }
      }
      continue;
    }
    if (line.empty() || line.front() == '#') continue;
    break;
  }
  if (i >= lines.size() || split_csv(lines[i]) !=
                               std::vector<std::string>{"gamma", "k", "w"}) {
    throw std::invalid_argument(path + ": expected header 'gamma,k,w'");
  }
  for (++i; i < lines.size(); ++i) {
    const std::vector<std::string> c = split_csv(lines[i]);
    if (c.size() != 3) {
      throw std::invalid_argument(path + ": row " + std::to_string(i + 1) +
                                  ": expected 3 columns");
    }
    SegmentFitRow row;
    row.gamma = static_cast<int>(parse_index(c[0], path, i + 1, "gamma"));
    row.k = static_cast<int>(parse_index(c[1], path, i + 1, "k"));
    row.w = parse_finite(c[2], path, i + 1);
    table.rows.push_back(row);
  }
  return table;
}

std::vector<GridFitRow> read_grid_fit(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  std::size_t i = 0;
  while (i < lines.size() &&
         (trim(lines[i]).empty() || trim(lines[i]).front() == '#')) {
    ++i;
  }
  if (i >= lines.size() ||
      split_csv(lines[i]) !=
          std::vector<std::string>{"m", "n", "gamma", "k", "w"}) {
    throw std::invalid_argument(path + ": expected header 'm,n,gamma,k,w'");
  }
  std::vector<GridFitRow> rows;
  for (++i; i < lines.size(); ++i) {
    const std::vector<std::string> c = split_csv(lines[i]);
    if (c.size() != 5) {
      throw std::invalid_argument(path + ": row " + std::to_string(i + 1) +
                                  ": expected 5 columns");
    }
    GridFitRow row;
    row.m = static_cast<int>(parse_index(c[0], path, i + 1, "m"));
    row.n = static_cast<int>(parse_index(c[1], path, i + 1, "n"));
    row.gamma = static_cast<int>(parse_index(c[2], path, i + 1, "gamma"));
    row.k = static_cast<int>(parse_index(c[3], path, i + 1, "k"));
    row.w = parse_finite(c[4], path, i + 1);
    rows.push_back(row);
  }
  return rows;
}

SeasonalityTable read_seasonality(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  SeasonalityTable table;
  std::size_t i = 0;
  for (; i < lines.size(); ++i) {
    const std::string line = trim(lines[i]);
    if (line.rfind("# k=", 0) == 0) {
      table.k = static_cast<int>(parse_index(line.substr(4), path, i + 1, "k"));
      continue;
    }
    if (line.empty() || line.front() == '#') continue;
    break;
  }
  if (i >= lines.size() ||
      split_csv(lines[i]) !=
          std::vector<std::string>{"m", "n", "gamma", "value"}) {
    throw std::invalid_argument(path + ": expected header 'm,n,gamma,value'");
  }
  for (++i; i < lines.size(); ++i) {
    const std::vector<std::string> c = split_csv(lines[i]);
    if (c.size() != 4) {
      throw std::invalid_argument(path + ": row " + std::to_string(i + 1) +
                                  ": expected 4 columns");
    }
    GridFitRow row;
    row.m = static_cast<int>(parse_index(c[0], path, i + 1, "m"));
    row.n = static_cast<int>(parse_index(c[1], path, i + 1, "n"));
    row.gamma = static_cast<int>(parse_index(c[2], path, i + 1, "gamma"));
    row.w = parse_finite(c[3], path, i + 1);
    table.rows.push_back(row);
  }
  return table;
}

std::vector<BenchRow> read_bench(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty() ||
      split_csv(lines[0]) !=
          std::vector<std::string>{"dataset", "order", "tau", "solver",
                                   "objective", "wall_time_s", "certified"}) {
    throw std::invalid_argument(
        path + ": expected bench header "
               "'dataset,order,tau,solver,objective,wall_time_s,certified'");
  }
  std::vector<BenchRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> c = split_csv(lines[i]);
    if (c.size() != 7) {
      throw std::invalid_argument(path + ": row " + std::to_string(i + 1) +
                                  ": expected 7 columns");
    }
    BenchRow row;
    row.dataset = c[0];
    row.order = static_cast<int>(parse_index(c[1], path, i + 1, "order"));
    row.tau = static_cast<int>(parse_index(c[2], path, i + 1, "tau"));
    row.solver = c[3];
    row.objective = parse_finite(c[4], path, i + 1);
    double wt;
    if (!try_parse_double(c[5], wt) || !std::isfinite(wt)) {
      throw std::invalid_argument(path + ": row " + std::to_string(i + 1) +
                                  ": bad wall time");
    }
    row.wall_time_s = wt;
    if (c[6] != "0" && c[6] != "1") {
      throw std::invalid_argument(path + ": row " + std::to_string(i + 1) +
                                  ": certified must be 0 or 1");
    }
    row.certified = c[6] == "1";
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sparsear
