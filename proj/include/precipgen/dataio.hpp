#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "precipgen/forward_backward.hpp"
#include "precipgen/model.hpp"
#include "precipgen/tensor.hpp"
#include "precipgen/vbem.hpp"

namespace precipgen {

// Calendar date (proleptic Gregorian), ISO-8601 text form.
struct Date {
  int y = 0;
  unsigned m = 1, d = 1;

  static Date parse(const std::string& iso);  // throws DataError on malformed input
  std::string str() const;
  long serial() const;  // days since the civil epoch (1970-01-01)
  static Date from_serial(long days);
  Date next() const { return from_serial(serial() + 1); }
  bool operator==(const Date& o) const { return y == o.y && m == o.m && d == o.d; }
  bool operator<(const Date& o) const { return serial() < o.serial(); }
};

struct Location {
  std::string id;
  double lat = 0.0, lon = 0.0;
};

struct PrecipDataset {
  Matrix values;                   // [T][L]
  std::vector<Date> dates;         // [T]
  std::vector<Location> locations; // [L]
  std::vector<BlockRange> blocks;  // labeled (e.g. by year); empty = unblocked

  bool blocked() const { return !blocks.empty(); }
  ChainLayout chain_layout() const;
  long T() const { return static_cast<long>(values.rows); }
  int L() const { return static_cast<int>(values.cols); }
};

// Long form: header "date,location_id,precip_mm", one row per (date, location).
// Every (date, location) pair must appear exactly once; negative values,
// unknown location ids, malformed cells and duplicates raise DataError naming
// the line. Values below dryness_threshold are clamped to exactly 0.
PrecipDataset load_long_csv(const std::string& data_path, const std::string& locations_path,
                            double dryness_threshold = 0.0);

// Wide form: header "date,<id1>,<id2>,...", one row per date.
PrecipDataset load_wide_csv(const std::string& data_path, const std::string& locations_path,
                            double dryness_threshold = 0.0);

// Extracts the in-year season window [start .. end] (months/days inclusive,
// start must not fall after end within the year) from every year present,
// producing one uniform-length block per year. Incomplete or unequal years
// raise DataError listing the offending years.
PrecipDataset make_blocks(const PrecipDataset& ds, int start_month, int start_day, int end_month,
                          int end_day);

// Reinterprets an unblocked dataset of exactly N*D rows as N uniform blocks.
// The dates inside each resulting block must be consecutive calendar days.
PrecipDataset with_uniform_blocks(const PrecipDataset& ds, int N, int D);

// Checks that dates advance by exactly one day inside every block (over the
// whole series when unblocked); the chain treats adjacent rows as adjacent
// days, so a skipped date would silently bridge the gap. Gaps *between*
// blocks are fine. Throws DataError naming the first offending pair. Datasets
// without per-row dates are left alone.
void require_daily_dates(const PrecipDataset& ds);

void write_long_csv(const PrecipDataset& ds, const std::string& path);
void write_locations_csv(const std::vector<Location>& locations, const std::string& path);

// Decoded path: header "date,block_id,state".
void write_states_csv(const PrecipDataset& ds, std::span<const int> states,
                      const std::string& path);

struct StatesFile {
  std::vector<Date> dates;
  std::vector<int> block_ids;
  std::vector<int> states;  // 1-based
};
StatesFile read_states_csv(const std::string& path);

// Versioned model persistence. JSON round-trips bit-exactly (shortest
// round-trip decimal representation on write).
struct ModelFile {
  int model_version = 1;
  ModelDims dims;
  Hyperparameters prior;
  Hyperparameters posterior;
  std::string state_ordering = "as_fit";  // or "wettest_first"
  FitTrace trace;
  std::uint64_t seed = 0;
};

void save_model(const ModelFile& mf, const std::string& path);
ModelFile load_model(const std::string& path);

// Header "iteration,phase,elbo,delta,step"; phase is "cavi" or "svb".
void write_trace_csv(const FitTrace& trace, const std::string& path);

// Shortest decimal string that parses back to the same double.
std::string format_double(double x);

}  // namespace precipgen
