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

#include "loglin/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace loglin {

namespace {

using nlohmann::json;

IntMat vaccine_design() {
  return IntMat{{3, 0}, {2, 1}, {1, 1}, {0, 1}};
}

IntMat indep2x2_design() {
  // cells 00,01,10,11; columns: row-0 indicator, row-1 indicator, col-0
  // indicator
  return IntMat{{1, 0, 1}, {1, 0, 0}, {0, 1, 1}, {0, 1, 0}};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::invalid_argument, "cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    raise(Errc::invalid_argument,
          "malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

std::string format_double(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

// labels may carry commas (e.g. odds lists); quote them CSV-style
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

bool is_builtin_model(const std::string& name) {
  return name == "vaccine" || name == "indep2x2";
}

ModelSpec builtin_model(const std::string& name) {
  if (name == "vaccine") {
    // curated kernel contrasts: p1 p3 p4 / p2^2 and p2 p4 / p3^2
    return make_model_with_kernel(validate_design(vaccine_design()),
                                  IntMat{{1, -2, 1, 1}, {0, 1, -2, 1}}, {},
                                  "vaccine");
  }
  if (name == "indep2x2")
    return make_model(validate_design(indep2x2_design()), {}, "indep2x2");
  raise(Errc::invalid_argument, "unknown builtin model: " + name);
}

ModelSpec load_model_json(const std::string& path) {
  json j = read_json_file(path);
  if (!j.contains("design") || !j["design"].is_array())
    raise(Errc::invalid_argument, "model file needs a 'design' array");
  const auto& rows = j["design"];
  const std::size_t r = rows.size();
  if (r == 0) raise(Errc::invalid_argument, "empty design");
  const std::size_t c = rows[0].size();
  IntMat m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c)
      raise(Errc::invalid_argument, "ragged design rows");
    for (std::size_t k = 0; k < c; ++k) {
      if (!rows[i][k].is_number_integer())
        raise(Errc::invalid_argument, "design entries must be integers");
      m(i, k) = rows[i][k].get<std::int64_t>();
    }
  }
  std::vector<double> offset;
  if (j.contains("offset")) {
    for (const auto& v : j["offset"]) offset.push_back(v.get<double>());
  }
  std::string name = path;
  const auto slash = name.find_last_of("/\\");
  if (slash != std::string::npos) name = name.substr(slash + 1);
  const auto dot = name.rfind('.');
  if (dot != std::string::npos) name = name.substr(0, dot);
  return make_model(validate_design(m), std::move(offset), name);
}

ModelSpec load_model(const std::string& path_or_name) {
  if (is_builtin_model(path_or_name)) return builtin_model(path_or_name);
  return load_model_json(path_or_name);
}

Kind model_kind(const std::string& path_or_name) {
  if (is_builtin_model(path_or_name)) return Kind::probability;
  json j = read_json_file(path_or_name);
  if (j.contains("kind")) {
    const std::string k = j["kind"].get<std::string>();
    if (k == "intensity") return Kind::intensity;
    if (k == "probability") return Kind::probability;
    raise(Errc::invalid_argument, "kind must be probability or intensity");
  }
  return Kind::probability;
}

std::vector<double> offset_from_log_contrasts(const ModelSpec& model,
                                              std::span<const double> c) {
  const std::size_t dof = model.kernel.dof();
  const std::size_t icount = model.design.cell_count();
  if (c.size() != dof)
    raise(Errc::dimension_mismatch, "need one value per kernel row");
  if (dof == 0) return std::vector<double>(icount, 1.0);

  // least-norm solution x = D' (D D')^{-1} c of D x = c
  RealMat g(dof, dof);
  for (std::size_t r = 0; r < dof; ++r)
    for (std::size_t s = 0; s < dof; ++s) {
      double acc = 0.0;
      for (std::size_t i = 0; i < icount; ++i)
        acc += static_cast<double>(model.kernel.d(r, i)) *
               static_cast<double>(model.kernel.d(s, i));
      g(r, s) = acc;
    }
  std::vector<double> rhs(c.begin(), c.end());
  // Gaussian elimination with partial pivoting on the small Gram system
  for (std::size_t col = 0; col < dof; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < dof; ++r)
      if (std::abs(g(r, col)) > std::abs(g(piv, col))) piv = r;
    if (g(piv, col) == 0.0)
      raise(Errc::rank_deficient, "kernel Gram matrix is singular");
    if (piv != col) {
      for (std::size_t k = 0; k < dof; ++k) std::swap(g(piv, k), g(col, k));
      std::swap(rhs[piv], rhs[col]);
    }
    for (std::size_t r = 0; r < dof; ++r) {
      if (r == col) continue;
      const double f = g(r, col) / g(col, col);
      if (f == 0.0) continue;
      for (std::size_t k = col; k < dof; ++k) g(r, k) -= f * g(col, k);
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> lam(dof);
  for (std::size_t r = 0; r < dof; ++r) lam[r] = rhs[r] / g(r, r);

  std::vector<double> xi(icount);
  for (std::size_t i = 0; i < icount; ++i) {
    double acc = 0.0;
    for (std::size_t r = 0; r < dof; ++r)
      acc += static_cast<double>(model.kernel.d(r, i)) * lam[r];
    xi[i] = std::exp(acc);
  }
  return xi;
}

std::vector<double> offset_from_odds(const ModelSpec& model,
                                     std::span<const double> odds) {
  std::vector<double> c(odds.size());
  for (std::size_t k = 0; k < odds.size(); ++k) {
    if (!(odds[k] > 0.0))
      raise(Errc::non_positive_input, "odds targets must be positive");
    c[k] = std::log(odds[k]);
  }
  return offset_from_log_contrasts(model, c);
}

std::string model_hash(const ModelSpec& model) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64 offset basis
  auto mix = [&h](const void* data, std::size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  const std::uint64_t dims[2] = {model.design.a.rows, model.design.a.cols};
  mix(dims, sizeof(dims));
  mix(model.design.a.data.data(),
      model.design.a.data.size() * sizeof(std::int64_t));
  mix(model.offset.data(), model.offset.size() * sizeof(double));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::vector<double> read_counts(const std::string& path_or_inline) {
  std::vector<double> out;
  auto parse_token = [&out](std::string tok) {
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t'))
      tok.erase(tok.begin());
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t'))
      tok.pop_back();
    if (tok.empty()) return;
    long long v = 0;
    std::size_t pos = 0;
    try {
      v = std::stoll(tok, &pos);
    } catch (const std::exception&) {
      raise(Errc::invalid_argument, "counts must be integers: " + tok);
    }
    if (pos != tok.size())
      raise(Errc::invalid_argument, "counts must be integers: " + tok);
    if (v < 0) raise(Errc::invalid_argument, "counts must be non-negative");
    out.push_back(static_cast<double>(v));
  };

  std::ifstream in(path_or_inline);
  if (in) {
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
        line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      parse_token(line);
    }
  } else {
    std::stringstream ss(path_or_inline);
    std::string tok;
    while (std::getline(ss, tok, ',')) parse_token(tok);
  }
  if (out.empty())
    raise(Errc::invalid_argument, "no counts found in: " + path_or_inline);
  return out;
}

void write_power_csv(std::ostream& os, const PowerTable& table) {
  os << "# mode=" << (table.mode == PowerMode::geometric
                          ? "geometric (alpha column holds epsilon, N=1)"
                          : "cumulative")
     << "\n";
  os << "# seed=" << table.seed << "\n";
  os << "# n_sim=" << table.n_sim << "\n";
  os << "# dirichlet_alpha=" << format_double(table.dirichlet_alpha, 6)
     << "\n";
  os << "# model=" << table.model_name << "\n";
  os << "# model_hash=" << table.model_hash << "\n";
  os << "N,alpha,offset_label,rate,ci_lo,ci_hi,n_sim,n_failed\n";
  for (const auto& cell : table.cells) {
    os << cell.n << ',' << format_double(cell.alpha, 6) << ','
       << csv_field(cell.offset_label) << ',' << format_double(cell.rate, 4)
       << ',' << format_double(cell.ci_lo, 4) << ','
       << format_double(cell.ci_hi, 4) << ',' << cell.n_sim << ','
       << cell.n_failed << "\n";
  }
}

std::string power_csv_string(const PowerTable& table) {
  std::ostringstream os;
  write_power_csv(os, table);
  return os.str();
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows) {
  os << "iter,residual_mean,residual_dual,bregman\n";
  for (const auto& r : rows) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%ld,%.9e,%.9e,%.9e\n", r.iter,
                  r.residual_mean, r.residual_dual, r.bregman);
    os << buf;
  }
}

std::vector<TraceRow> read_trace_csv(std::istream& is) {
  std::vector<TraceRow> rows;
  std::string line;
  if (!std::getline(is, line) ||
      line != "iter,residual_mean,residual_dual,bregman")
    raise(Errc::invalid_argument, "unexpected trace CSV header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    TraceRow r;
    std::stringstream ss(line);
    std::string tok;
    std::getline(ss, tok, ',');
    r.iter = std::stol(tok);
    std::getline(ss, tok, ',');
    r.residual_mean = std::stod(tok);
    std::getline(ss, tok, ',');
    r.residual_dual = std::stod(tok);
    std::getline(ss, tok, ',');
    r.bregman = std::stod(tok);
    rows.push_back(r);
  }
  return rows;
}

PowerTable read_power_csv(std::istream& is) {
  PowerTable table;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(2, eq - 2);
      std::string value = line.substr(eq + 1);
      if (key == "mode")
        table.mode = value.rfind("geometric", 0) == 0 ? PowerMode::geometric
                                                      : PowerMode::cumulative;
      else if (key == "seed")
        table.seed = std::stoull(value);
      else if (key == "n_sim")
        table.n_sim = std::stol(value);
      else if (key == "dirichlet_alpha")
        table.dirichlet_alpha = std::stod(value);
      else if (key == "model")
        table.model_name = value;
      else if (key == "model_hash")
        table.model_hash = value;
      continue;
    }
    if (!header_seen) {
      if (line != "N,alpha,offset_label,rate,ci_lo,ci_hi,n_sim,n_failed")
        raise(Errc::invalid_argument, "unexpected power CSV header");
      header_seen = true;
      continue;
    }
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 8)
      raise(Errc::invalid_argument, "malformed power CSV row: " + line);
    PowerCell cell;
    cell.n = std::stoll(f[0]);
    cell.alpha = std::stod(f[1]);
    cell.offset_label = f[2];
    cell.rate = std::stod(f[3]);
    cell.ci_lo = std::stod(f[4]);
    cell.ci_hi = std::stod(f[5]);
    cell.n_sim = std::stol(f[6]);
    cell.n_failed = std::stol(f[7]);
    table.cells.push_back(std::move(cell));
  }
  if (!header_seen)
    raise(Errc::invalid_argument, "power CSV without header");
  return table;
}

}  // namespace loglin
