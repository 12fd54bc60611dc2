#include "precipgen/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "precipgen/errors.hpp"

namespace precipgen {

using nlohmann::json;

// --- small text helpers ------------------------------------------------------

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double_field(const std::string& s, const std::string& where) {
  double out = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto res = std::from_chars(first, last, out);
  if (res.ec != std::errc() || res.ptr != last || !std::isfinite(out))
    throw DataError(where + ": malformed numeric value '" + s + "'");
  return out;
}

long parse_int_field(const std::string& s, const std::string& where) {
  long out = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw DataError(where + ": malformed integer '" + s + "'");
  return out;
}

std::string loc(const std::string& path, std::size_t line) {
  return path + " line " + std::to_string(line);
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  return in;
}

}  // namespace

// --- dates -------------------------------------------------------------------

Date Date::parse(const std::string& iso) {
  auto bad = [&] { return DataError("malformed date '" + iso + "' (expected YYYY-MM-DD)"); };
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') throw bad();
  int yy = 0;
  unsigned mm = 0, dd = 0;
  auto num = [&](int from, int len, auto& out) {
    auto res = std::from_chars(iso.data() + from, iso.data() + from + len, out);
    if (res.ec != std::errc() || res.ptr != iso.data() + from + len) throw bad();
  };
  num(0, 4, yy);
  num(5, 2, mm);
  num(8, 2, dd);
  const std::chrono::year_month_day ymd{std::chrono::year{yy}, std::chrono::month{mm},
                                        std::chrono::day{dd}};
  if (!ymd.ok()) throw DataError("invalid calendar date '" + iso + "'");
  return Date{yy, mm, dd};
}

std::string Date::str() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, d);
  return buf;
}

long Date::serial() const {
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

Date Date::from_serial(long days) {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
  return Date{static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
              static_cast<unsigned>(ymd.day())};
}

ChainLayout PrecipDataset::chain_layout() const {
  if (blocks.empty()) return ChainLayout::single(values.rows);
  ChainLayout c;
  c.blocked = true;
  c.blocks = blocks;
  return c;
}

// --- CSV ingestion -----------------------------------------------------------

namespace {

std::vector<Location> load_locations(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{
                                     "location_id", "lat", "lon"})
    throw DataError(loc(path, 1) + ": expected header 'location_id,lat,lon'");

  std::vector<Location> out;
  std::unordered_map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw DataError(loc(path, line_no) + ": expected 3 fields");
    if (f[0].empty()) throw DataError(loc(path, line_no) + ": empty location_id");
    if (!seen.emplace(f[0], out.size()).second)
      throw DataError(loc(path, line_no) + ": duplicate location_id '" + f[0] + "'");
    out.push_back({f[0], parse_double_field(f[1], loc(path, line_no)),
                   parse_double_field(f[2], loc(path, line_no))});
  }
  if (out.empty()) throw DataError(path + ": no locations");
  return out;
}

void clamp_dry(Matrix& values, double threshold) {
  if (threshold <= 0.0) return;
  for (double& x : values.v)
    if (x < threshold) x = 0.0;
}

}  // namespace

PrecipDataset load_long_csv(const std::string& data_path, const std::string& locations_path,
                            double dryness_threshold) {
  PrecipDataset ds;
  ds.locations = load_locations(locations_path);
  const std::size_t L = ds.locations.size();
  std::unordered_map<std::string, std::size_t> loc_index;
  for (std::size_t l = 0; l < L; ++l) loc_index[ds.locations[l].id] = l;

  std::ifstream in = open_or_throw(data_path);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{
                                     "date", "location_id", "precip_mm"})
    throw DataError(loc(data_path, 1) + ": expected header 'date,location_id,precip_mm'");

  struct Cell {
    long date_serial;
    std::size_t l;
    double value;
  };
  std::vector<Cell> cells;
  std::map<long, Date> date_set;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw DataError(loc(data_path, line_no) + ": expected 3 fields");
    Date date;
    try {
      date = Date::parse(f[0]);
    } catch (const DataError& e) {
      throw DataError(loc(data_path, line_no) + ": " + e.what());
    }
    const auto it = loc_index.find(f[1]);
    if (it == loc_index.end())
      throw DataError(loc(data_path, line_no) + ": unknown location_id '" + f[1] + "'");
    const double v = parse_double_field(f[2], loc(data_path, line_no));
    if (v < 0.0)
      throw DataError(loc(data_path, line_no) + ": negative precipitation " + f[2]);
    cells.push_back({date.serial(), it->second, v});
    date_set.emplace(date.serial(), date);
  }
  if (cells.empty()) throw DataError(data_path + ": no data rows");

  std::unordered_map<long, std::size_t> date_index;
  ds.dates.reserve(date_set.size());
  for (const auto& [serial, date] : date_set) {
    date_index[serial] = ds.dates.size();
    ds.dates.push_back(date);
  }

  const double kMissing = std::numeric_limits<double>::quiet_NaN();
  ds.values = Matrix(ds.dates.size(), L, kMissing);
  for (const Cell& c : cells) {
    double& slot = ds.values(date_index[c.date_serial], c.l);
    if (!std::isnan(slot))
      throw DataError(data_path + ": duplicate entry for date " +
                      Date::from_serial(c.date_serial).str() + ", location '" +
                      ds.locations[c.l].id + "'");
    slot = c.value;
  }
  for (std::size_t t = 0; t < ds.values.rows; ++t)
    for (std::size_t l = 0; l < L; ++l)
      if (std::isnan(ds.values(t, l)))
        throw DataError(data_path + ": missing entry for date " + ds.dates[t].str() +
                        ", location '" + ds.locations[l].id + "'");

  clamp_dry(ds.values, dryness_threshold);
  return ds;
}

PrecipDataset load_wide_csv(const std::string& data_path, const std::string& locations_path,
                            double dryness_threshold) {
  PrecipDataset ds;
  ds.locations = load_locations(locations_path);
  const std::size_t L = ds.locations.size();

  std::ifstream in = open_or_throw(data_path);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw DataError(data_path + ": empty file");
  const auto header = split_csv_line(line);
  if (header.size() != L + 1 || header[0] != "date")
    throw DataError(loc(data_path, 1) + ": expected header 'date,<location ids...>'");
  std::vector<std::size_t> col_to_loc(L);
  {
    std::unordered_map<std::string, std::size_t> loc_index;
    for (std::size_t l = 0; l < L; ++l) loc_index[ds.locations[l].id] = l;
    for (std::size_t c = 0; c < L; ++c) {
      const auto it = loc_index.find(header[c + 1]);
      if (it == loc_index.end())
        throw DataError(loc(data_path, 1) + ": unknown location_id '" + header[c + 1] + "'");
      col_to_loc[c] = it->second;
    }
  }

  std::map<long, std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != L + 1)
      throw DataError(loc(data_path, line_no) + ": expected " + std::to_string(L + 1) +
                      " fields");
    Date date;
    try {
      date = Date::parse(f[0]);
    } catch (const DataError& e) {
      throw DataError(loc(data_path, line_no) + ": " + e.what());
    }
    std::vector<double> vals(L);
    for (std::size_t c = 0; c < L; ++c) {
      const double v = parse_double_field(f[c + 1], loc(data_path, line_no));
      if (v < 0.0) throw DataError(loc(data_path, line_no) + ": negative precipitation");
      vals[col_to_loc[c]] = v;
    }
    if (!rows.emplace(date.serial(), std::move(vals)).second)
      throw DataError(loc(data_path, line_no) + ": duplicate date " + f[0]);
  }
  if (rows.empty()) throw DataError(data_path + ": no data rows");

  ds.values = Matrix(rows.size(), L);
  std::size_t t = 0;
  for (const auto& [serial, vals] : rows) {
    ds.dates.push_back(Date::from_serial(serial));
    for (std::size_t l = 0; l < L; ++l) ds.values(t, l) = vals[l];
    ++t;
  }
  clamp_dry(ds.values, dryness_threshold);
  return ds;
}

// --- block construction ------------------------------------------------------

PrecipDataset make_blocks(const PrecipDataset& ds, int start_month, int start_day, int end_month,
                          int end_day) {
  auto valid_md = [](int m, int d) {
    // must form a valid date in every year, which rules out Feb 29 endpoints
    return std::chrono::year_month_day{std::chrono::year{2001}, std::chrono::month{unsigned(m)},
                                       std::chrono::day{unsigned(d)}}
        .ok();
  };
  if (!valid_md(start_month, start_day) || !valid_md(end_month, end_day))
    throw ConfigError("season window endpoints must be valid month/day pairs (Feb 29 excluded)");
  if (std::pair(start_month, start_day) > std::pair(end_month, end_day))
    throw ConfigError("season window must not cross the year boundary");

  // collect the window rows per year
  std::map<int, std::vector<std::size_t>> by_year;
  for (std::size_t t = 0; t < ds.dates.size(); ++t) {
    const Date& date = ds.dates[t];
    const auto md = std::pair<int, int>(static_cast<int>(date.m), static_cast<int>(date.d));
    if (md >= std::pair(start_month, start_day) && md <= std::pair(end_month, end_day))
      by_year[date.y].push_back(t);
  }
  if (by_year.empty()) throw DataError("season window matches no rows in the dataset");

  std::string bad_years;
  long expected_len = -1;
  for (const auto& [year, rows] : by_year) {
    const long first = Date{year, static_cast<unsigned>(start_month),
                            static_cast<unsigned>(start_day)}.serial();
    const long last = Date{year, static_cast<unsigned>(end_month),
                           static_cast<unsigned>(end_day)}.serial();
    const long want = last - first + 1;
    bool ok = static_cast<long>(rows.size()) == want;
    if (ok)
      for (std::size_t i = 0; i < rows.size(); ++i)
        if (ds.dates[rows[i]].serial() != first + static_cast<long>(i)) {
          ok = false;
          break;
        }
    if (expected_len < 0) expected_len = want;
    if (!ok || want != expected_len) {
      if (!bad_years.empty()) bad_years += ", ";
      bad_years += std::to_string(year);
    }
  }
  if (!bad_years.empty())
    throw DataError("season window is incomplete or unequal in year(s): " + bad_years);

  PrecipDataset out;
  out.locations = ds.locations;
  const std::size_t D = static_cast<std::size_t>(expected_len);
  out.values = Matrix(by_year.size() * D, ds.values.cols);
  std::size_t t_out = 0;
  for (const auto& [year, rows] : by_year) {
    out.blocks.push_back({year, t_out, D});
    for (std::size_t r : rows) {
      out.dates.push_back(ds.dates[r]);
      for (std::size_t l = 0; l < ds.values.cols; ++l) out.values(t_out, l) = ds.values(r, l);
      ++t_out;
    }
  }
  return out;
}

PrecipDataset with_uniform_blocks(const PrecipDataset& ds, int N, int D) {
  if (N < 1 || D < 1) throw ConfigError("block structure requires N >= 1 and D >= 1");
  if (static_cast<long>(N) * D != ds.T())
    throw ConfigError("dataset has " + std::to_string(ds.T()) + " rows; cannot form " +
                      std::to_string(N) + " blocks of " + std::to_string(D));
  PrecipDataset out = ds;
  out.blocks.clear();
  for (int i = 0; i < N; ++i)
    out.blocks.push_back({i, static_cast<std::size_t>(i) * D, static_cast<std::size_t>(D)});
  require_daily_dates(out);
  return out;
}

void require_daily_dates(const PrecipDataset& ds) {
  if (ds.dates.size() != ds.values.rows) return;  // no per-row calendar to check
  const auto check_run = [&](std::size_t begin, std::size_t len) {
    for (std::size_t i = begin + 1; i < begin + len; ++i)
      if (ds.dates[i].serial() != ds.dates[i - 1].serial() + 1)
        throw DataError("dates jump from " + ds.dates[i - 1].str() + " to " + ds.dates[i].str() +
                        "; days inside a block must be consecutive");
  };
  if (ds.blocks.empty()) {
    check_run(0, ds.dates.size());
  } else {
    for (const BlockRange& b : ds.blocks) check_run(b.begin, b.length);
  }
}

// --- writers -----------------------------------------------------------------

namespace {

std::ofstream create_or_throw(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot create file: " + path);
  return out;
}

}  // namespace

void write_long_csv(const PrecipDataset& ds, const std::string& path) {
  std::ofstream out = create_or_throw(path);
  out << "date,location_id,precip_mm\n";
  for (std::size_t t = 0; t < ds.values.rows; ++t) {
    const std::string date = ds.dates[t].str();
    for (std::size_t l = 0; l < ds.values.cols; ++l)
      out << date << ',' << ds.locations[l].id << ',' << format_double(ds.values(t, l)) << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

void write_locations_csv(const std::vector<Location>& locations, const std::string& path) {
  std::ofstream out = create_or_throw(path);
  out << "location_id,lat,lon\n";
  for (const Location& l : locations)
    out << l.id << ',' << format_double(l.lat) << ',' << format_double(l.lon) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

void write_states_csv(const PrecipDataset& ds, std::span<const int> states,
                      const std::string& path) {
  if (states.size() != ds.values.rows)
    throw std::invalid_argument("write_states_csv: state/path length mismatch");
  std::vector<int> block_of(ds.values.rows, 0);
  for (const BlockRange& b : ds.blocks)
    for (std::size_t t = b.begin; t < b.begin + b.length; ++t) block_of[t] = b.label;
  std::ofstream out = create_or_throw(path);
  out << "date,block_id,state\n";
  for (std::size_t t = 0; t < ds.values.rows; ++t)
    out << ds.dates[t].str() << ',' << block_of[t] << ',' << states[t] << '\n';
  if (!out) throw DataError("write failed: " + path);
}

StatesFile read_states_csv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) ||
      split_csv_line(line) != std::vector<std::string>{"date", "block_id", "state"})
    throw DataError(loc(path, 1) + ": expected header 'date,block_id,state'");
  StatesFile sf;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw DataError(loc(path, line_no) + ": expected 3 fields");
    try {
      sf.dates.push_back(Date::parse(f[0]));
    } catch (const DataError& e) {
      throw DataError(loc(path, line_no) + ": " + e.what());
    }
    sf.block_ids.push_back(static_cast<int>(parse_int_field(f[1], loc(path, line_no))));
    const long s = parse_int_field(f[2], loc(path, line_no));
    if (s < 1) throw DataError(loc(path, line_no) + ": state labels are 1-based");
    sf.states.push_back(static_cast<int>(s));
  }
  if (sf.states.empty()) throw DataError(path + ": no rows");
  return sf;
}

void write_trace_csv(const FitTrace& trace, const std::string& path) {
  std::ofstream out = create_or_throw(path);
  out << "iteration,phase,elbo,delta,step\n";
  for (const TraceRow& r : trace.rows)
    out << r.iteration << ',' << (r.phase == 's' ? "svb" : "cavi") << ','
        << format_double(r.elbo) << ',' << format_double(r.delta) << ','
        << format_double(r.step) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

// --- model persistence -------------------------------------------------------

namespace {

json array3_to_json(const Array3& a) {
  json out = json::array();
  for (std::size_t i = 0; i < a.n1; ++i) {
    json plane = json::array();
    for (std::size_t j = 0; j < a.n2; ++j) {
      json row = json::array();
      for (std::size_t k = 0; k < a.n3; ++k) row.push_back(a(i, j, k));
      plane.push_back(std::move(row));
    }
    out.push_back(std::move(plane));
  }
  return out;
}

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (std::size_t i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols; ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

json hyper_to_json(const Hyperparameters& h) {
  return json{{"xi", h.xi},
              {"alpha", matrix_to_json(h.alpha)},
              {"zeta", array3_to_json(h.zeta)},
              {"gamma_shape", array3_to_json(h.gamma_shape)},
              {"delta_rate", array3_to_json(h.delta_rate)}};
}

const json& require(const json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) throw DataError("model load: missing field '" + where + key + "'");
  return *it;
}

double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw DataError("model load: field '" + where + "' must be a number");
  return j.get<double>();
}

std::vector<double> json_to_vector(const json& j, std::size_t n, const std::string& where) {
  if (!j.is_array() || j.size() != n)
    throw DataError("model load: field '" + where + "' must be an array of length " +
                    std::to_string(n));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = as_number(j[i], where);
  return out;
}

Matrix json_to_matrix(const json& j, std::size_t r, std::size_t c, const std::string& where) {
  if (!j.is_array() || j.size() != r)
    throw DataError("model load: field '" + where + "' has wrong row count");
  Matrix out(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    const auto row = json_to_vector(j[i], c, where);
    for (std::size_t k = 0; k < c; ++k) out(i, k) = row[k];
  }
  return out;
}

Array3 json_to_array3(const json& j, std::size_t a, std::size_t b, std::size_t c,
                      const std::string& where) {
  if (!j.is_array() || j.size() != a)
    throw DataError("model load: field '" + where + "' has wrong outer size");
  Array3 out(a, b, c);
  for (std::size_t i = 0; i < a; ++i) {
    const Matrix plane = json_to_matrix(j[i], b, c, where);
    for (std::size_t p = 0; p < b; ++p)
      for (std::size_t q = 0; q < c; ++q) out(i, p, q) = plane(p, q);
  }
  return out;
}

Hyperparameters json_to_hyper(const json& j, const ModelDims& dims, const std::string& where) {
  Hyperparameters h;
  h.K = dims.K;
  h.L = dims.L;
  h.M = dims.M;
  const auto K = static_cast<std::size_t>(dims.K);
  const auto L = static_cast<std::size_t>(dims.L);
  const auto M = static_cast<std::size_t>(dims.M);
  h.xi = json_to_vector(require(j, "xi", where), K, where + "xi");
  h.alpha = json_to_matrix(require(j, "alpha", where), K, K, where + "alpha");
  h.zeta = json_to_array3(require(j, "zeta", where), K, L, M + 1, where + "zeta");
  h.gamma_shape =
      json_to_array3(require(j, "gamma_shape", where), K, L, M, where + "gamma_shape");
  h.delta_rate = json_to_array3(require(j, "delta_rate", where), K, L, M, where + "delta_rate");
  return h;
}

}  // namespace

void save_model(const ModelFile& mf, const std::string& path) {
  json trace = json::object();
  {
    json its = json::array(), phases = json::array(), elbos = json::array(),
         deltas = json::array(), steps = json::array();
    for (const TraceRow& r : mf.trace.rows) {
      its.push_back(r.iteration);
      phases.push_back(r.phase == 's' ? "svb" : "cavi");
      elbos.push_back(r.elbo);
      deltas.push_back(r.delta);
      steps.push_back(r.step);
    }
    trace = json{{"iteration", std::move(its)}, {"phase", std::move(phases)},
                 {"elbo", std::move(elbos)},    {"delta", std::move(deltas)},
                 {"step", std::move(steps)},    {"converged", mf.trace.converged},
                 {"iterations_run", mf.trace.iterations_run}};
  }

  const json j{{"model_version", mf.model_version},
               {"dims", json{{"K", mf.dims.K},
                             {"L", mf.dims.L},
                             {"M", mf.dims.M},
                             {"T", mf.dims.T},
                             {"N", mf.dims.N},
                             {"D", mf.dims.D}}},
               {"state_ordering", mf.state_ordering},
               {"seed", mf.seed},
               {"prior", hyper_to_json(mf.prior)},
               {"posterior", hyper_to_json(mf.posterior)},
               {"elbo_trace", trace}};

  std::ofstream out = create_or_throw(path);
  out << j.dump() << '\n';
  if (!out) throw DataError("write failed: " + path);
}

ModelFile load_model(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("model load: " + path + " is not valid JSON: " + e.what());
  }

  ModelFile mf;
  const json& version = require(j, "model_version", "");
  if (!version.is_number_integer() || version.get<int>() != 1)
    throw DataError("model load: unsupported model_version " + version.dump());
  mf.model_version = 1;

  const json& dims = require(j, "dims", "");
  mf.dims.K = static_cast<int>(as_number(require(dims, "K", "dims."), "dims.K"));
  mf.dims.L = static_cast<int>(as_number(require(dims, "L", "dims."), "dims.L"));
  mf.dims.M = static_cast<int>(as_number(require(dims, "M", "dims."), "dims.M"));
  mf.dims.T = static_cast<long>(as_number(require(dims, "T", "dims."), "dims.T"));
  mf.dims.N = static_cast<int>(as_number(require(dims, "N", "dims."), "dims.N"));
  mf.dims.D = static_cast<int>(as_number(require(dims, "D", "dims."), "dims.D"));
  try {
    mf.dims.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model load: ") + e.what());
  }

  mf.state_ordering = require(j, "state_ordering", "").get<std::string>();
  mf.seed = require(j, "seed", "").get<std::uint64_t>();
  mf.prior = json_to_hyper(require(j, "prior", ""), mf.dims, "prior.");
  mf.posterior = json_to_hyper(require(j, "posterior", ""), mf.dims, "posterior.");
  try {
    mf.prior.validate();
    mf.posterior.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model load: ") + e.what());
  }

  const json& trace = require(j, "elbo_trace", "");
  const json& its = require(trace, "iteration", "elbo_trace.");
  const json& phases = require(trace, "phase", "elbo_trace.");
  const json& elbos = require(trace, "elbo", "elbo_trace.");
  const json& deltas = require(trace, "delta", "elbo_trace.");
  const json& steps = require(trace, "step", "elbo_trace.");
  if (!its.is_array() || !phases.is_array() || !elbos.is_array() || !deltas.is_array() ||
      !steps.is_array() || its.size() != elbos.size() || phases.size() != elbos.size() ||
      deltas.size() != elbos.size() || steps.size() != elbos.size())
    throw DataError("model load: elbo_trace arrays are inconsistent");
  for (std::size_t i = 0; i < elbos.size(); ++i) {
    TraceRow r;
    r.iteration = its[i].get<int>();
    r.phase = phases[i].get<std::string>() == "svb" ? 's' : 'c';
    r.elbo = as_number(elbos[i], "elbo_trace.elbo");
    r.delta = as_number(deltas[i], "elbo_trace.delta");
    r.step = as_number(steps[i], "elbo_trace.step");
    mf.trace.rows.push_back(r);
    mf.trace.elbo.push_back(r.elbo);
  }
  mf.trace.converged = require(trace, "converged", "elbo_trace.").get<bool>();
  mf.trace.iterations_run = require(trace, "iterations_run", "elbo_trace.").get<int>();
  return mf;
}

}  // namespace precipgen
