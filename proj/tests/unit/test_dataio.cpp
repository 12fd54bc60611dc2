#include <doctest.h>

#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <string>

#include "builders.hpp"
#include "precipgen/dataio.hpp"
#include "precipgen/errors.hpp"
#include "precipgen/rng.hpp"

using namespace precipgen;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("precipgen_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("dates parse strictly and round-trip") {
  const Date d = Date::parse("2004-02-29");
  CHECK(d.y == 2004);
  CHECK(d.m == 2);
  CHECK(d.d == 29);
  CHECK(d.str() == "2004-02-29");
  CHECK(Date::parse("1999-12-31").next() == Date::parse("2000-01-01"));
  CHECK(Date::parse("2000-02-28").next() == Date::parse("2000-02-29"));
  CHECK(Date::from_serial(Date::parse("2020-06-15").serial()) == Date::parse("2020-06-15"));
  CHECK(Date::parse("1970-01-01").serial() == 0);

  CHECK_THROWS_AS(Date::parse("2003-02-29"), DataError);  // not a leap year
  CHECK_THROWS_AS(Date::parse("2003-13-01"), DataError);
  CHECK_THROWS_AS(Date::parse("2003/01/01"), DataError);
  CHECK_THROWS_AS(Date::parse("03-01-2003"), DataError);
  CHECK_THROWS_AS(Date::parse("garbage"), DataError);
}

TEST_CASE("long CSV round trip preserves every value bit for bit") {
  TempDir tmp;
  Rng rng(81);
  PrecipDataset ds;
  ds.values = testsupport::random_data(40, 3, 0.4, 2.7, rng);
  Date d = Date::parse("2001-03-30");
  for (int t = 0; t < 40; ++t) {
    ds.dates.push_back(d);
    d = d.next();
  }
  ds.locations = {{"a", 39.0, -76.5}, {"b", 39.1, -76.6}, {"c", 39.2, -76.7}};

  write_long_csv(ds, tmp.file("data.csv"));
  write_locations_csv(ds.locations, tmp.file("locs.csv"));
  const PrecipDataset back = load_long_csv(tmp.file("data.csv"), tmp.file("locs.csv"));

  REQUIRE(back.values.rows == 40);
  REQUIRE(back.values.cols == 3);
  CHECK(back.values.v == ds.values.v);  // bitwise through shortest round-trip text
  CHECK(back.dates.front() == ds.dates.front());
  CHECK(back.dates.back() == ds.dates.back());
  CHECK(back.locations[1].id == "b");
  CHECK(back.locations[1].lat == 39.1);
}

TEST_CASE("wide CSV loads the same matrix as long CSV") {
  TempDir tmp;
  write_file(tmp.file("locs.csv"), "location_id,lat,lon\np,0,0\nq,1,1\n");
  write_file(tmp.file("long.csv"),
             "date,location_id,precip_mm\n"
             "2000-01-01,p,0\n2000-01-01,q,1.25\n"
             "2000-01-02,p,3.5\n2000-01-02,q,0\n");
  write_file(tmp.file("wide.csv"),
             "date,p,q\n"
             "2000-01-01,0,1.25\n"
             "2000-01-02,3.5,0\n");
  const PrecipDataset a = load_long_csv(tmp.file("long.csv"), tmp.file("locs.csv"));
  const PrecipDataset b = load_wide_csv(tmp.file("wide.csv"), tmp.file("locs.csv"));
  CHECK(a.values.v == b.values.v);
  CHECK(a.dates == b.dates);
}

TEST_CASE("malformed input is rejected with the line number") {
  TempDir tmp;
  write_file(tmp.file("locs.csv"), "location_id,lat,lon\np,0,0\n");

  write_file(tmp.file("neg.csv"), "date,location_id,precip_mm\n2000-01-01,p,-1\n");
  CHECK_THROWS_WITH_AS(load_long_csv(tmp.file("neg.csv"), tmp.file("locs.csv")),
                       doctest::Contains("line 2"), DataError);

  write_file(tmp.file("unknown.csv"), "date,location_id,precip_mm\n2000-01-01,zz,1\n");
  CHECK_THROWS_WITH_AS(load_long_csv(tmp.file("unknown.csv"), tmp.file("locs.csv")),
                       doctest::Contains("zz"), DataError);

  write_file(tmp.file("dup.csv"),
             "date,location_id,precip_mm\n2000-01-01,p,1\n2000-01-01,p,2\n");
  CHECK_THROWS_AS(load_long_csv(tmp.file("dup.csv"), tmp.file("locs.csv")), DataError);

  // a wholly missing date loads (blocked series legitimately skip days between
  // blocks) but is rejected once the rows are to be chained as consecutive days
  write_file(tmp.file("gap.csv"),
             "date,location_id,precip_mm\n2000-01-01,p,1\n2000-01-03,p,2\n");
  const PrecipDataset gapped = load_long_csv(tmp.file("gap.csv"), tmp.file("locs.csv"));
  CHECK(gapped.T() == 2);
  CHECK_THROWS_WITH_AS(require_daily_dates(gapped), doctest::Contains("2000-01-03"), DataError);
  CHECK_THROWS_AS(with_uniform_blocks(gapped, 1, 2), DataError);

  write_file(tmp.file("badhdr.csv"), "when,where,how_much\n2000-01-01,p,1\n");
  CHECK_THROWS_AS(load_long_csv(tmp.file("badhdr.csv"), tmp.file("locs.csv")), DataError);

  write_file(tmp.file("badnum.csv"), "date,location_id,precip_mm\n2000-01-01,p,wet\n");
  CHECK_THROWS_AS(load_long_csv(tmp.file("badnum.csv"), tmp.file("locs.csv")), DataError);

  CHECK_THROWS_AS(load_long_csv(tmp.file("missing_file.csv"), tmp.file("locs.csv")), DataError);
}

TEST_CASE("the dryness threshold clamps trace values to zero") {
  TempDir tmp;
  write_file(tmp.file("locs.csv"), "location_id,lat,lon\np,0,0\n");
  write_file(tmp.file("d.csv"),
             "date,location_id,precip_mm\n2000-01-01,p,0.05\n2000-01-02,p,0.2\n");
  const PrecipDataset ds = load_long_csv(tmp.file("d.csv"), tmp.file("locs.csv"), 0.1);
  CHECK(ds.values(0, 0) == 0.0);
  CHECK(ds.values(1, 0) == 0.2);
}

TEST_CASE("season windows cut one uniform block per year") {
  TempDir tmp;
  write_file(tmp.file("locs.csv"), "location_id,lat,lon\np,0,0\n");
  std::string csv = "date,location_id,precip_mm\n";
  for (int year : {2001, 2002}) {
    Date d{year, 6, 25};
    for (int i = 0; i < 20; ++i) {
      csv += d.str() + ",p," + std::to_string(i % 4) + "\n";
      d = d.next();
    }
  }
  write_file(tmp.file("d.csv"), csv);
  const PrecipDataset ds = load_long_csv(tmp.file("d.csv"), tmp.file("locs.csv"));
  const PrecipDataset cut = make_blocks(ds, 7, 1, 7, 10);
  REQUIRE(cut.blocks.size() == 2);
  CHECK(cut.blocks[0].label == 2001);
  CHECK(cut.blocks[1].label == 2002);
  CHECK(cut.blocks[0].length == 10);
  CHECK(cut.blocks[1].length == 10);
  CHECK(cut.T() == 20);
  CHECK(cut.dates.front() == Date::parse("2001-07-01"));
  CHECK(cut.dates[10] == Date::parse("2002-07-01"));

  // a window not fully covered in one year is an error naming the year
  CHECK_THROWS_WITH_AS(make_blocks(ds, 7, 1, 8, 10), doctest::Contains("2001"), DataError);
  // inverted windows and leap-only endpoints are configuration errors
  CHECK_THROWS_AS(make_blocks(ds, 8, 1, 7, 1), ConfigError);
  CHECK_THROWS_AS(make_blocks(ds, 2, 29, 7, 1), ConfigError);
}

TEST_CASE("uniform reblocking validates the row count") {
  TempDir tmp;
  Rng rng(82);
  PrecipDataset ds;
  ds.values = testsupport::random_data(40, 1, 0.3, 2.0, rng);
  Date d = Date::parse("2000-01-01");
  for (int t = 0; t < 40; ++t) {
    ds.dates.push_back(d);
    d = d.next();
  }
  ds.locations = {{"p", 0, 0}};
  const PrecipDataset blocked = with_uniform_blocks(ds, 4, 10);
  REQUIRE(blocked.blocks.size() == 4);
  CHECK(blocked.blocks[2].begin == 20);
  CHECK_THROWS_AS(with_uniform_blocks(ds, 3, 10), ConfigError);
}

TEST_CASE("model files round-trip every hyperparameter bit for bit") {
  TempDir tmp;
  Rng rng(83);
  ModelFile mf;
  mf.dims.K = 3;
  mf.dims.L = 2;
  mf.dims.M = 2;
  mf.dims.T = 100;
  mf.prior = testsupport::random_hyperparameters(3, 2, 2, rng);
  mf.posterior = testsupport::random_hyperparameters(3, 2, 2, rng);
  mf.state_ordering = "wettest_first";
  mf.seed = 0xDEADBEEFCAFEBABEull;
  mf.trace.converged = true;
  mf.trace.iterations_run = 17;
  for (int i = 0; i < 17; ++i) {
    TraceRow r;
    r.iteration = i + 1;
    r.phase = i < 5 ? 's' : 'c';
    r.elbo = -1000.0 / (i + 1);
    r.delta = i == 0 ? 0.0 : 1.0 / i;
    r.step = i < 5 ? 0.5 / (i + 1) : 0.0;
    mf.trace.rows.push_back(r);
    mf.trace.elbo.push_back(r.elbo);
  }

  save_model(mf, tmp.file("m.json"));
  const ModelFile back = load_model(tmp.file("m.json"));

  CHECK(back.model_version == 1);
  CHECK(back.dims.K == 3);
  CHECK(back.dims.T == 100);
  CHECK(back.seed == mf.seed);
  CHECK(back.state_ordering == "wettest_first");
  CHECK(back.prior.xi == mf.prior.xi);
  CHECK(back.prior.alpha.v == mf.prior.alpha.v);
  CHECK(back.posterior.zeta.v == mf.posterior.zeta.v);
  CHECK(back.posterior.gamma_shape.v == mf.posterior.gamma_shape.v);
  CHECK(back.posterior.delta_rate.v == mf.posterior.delta_rate.v);
  CHECK(back.trace.converged);
  CHECK(back.trace.iterations_run == 17);
  REQUIRE(back.trace.rows.size() == 17);
  CHECK(back.trace.rows[3].phase == 's');
  CHECK(back.trace.rows[8].phase == 'c');
  CHECK(back.trace.rows[4].step == mf.trace.rows[4].step);
  CHECK(back.trace.elbo == mf.trace.elbo);
}

TEST_CASE("model loading rejects foreign versions and missing fields") {
  TempDir tmp;
  write_file(tmp.file("v9.json"), R"({"model_version": 9})");
  CHECK_THROWS_WITH_AS(load_model(tmp.file("v9.json")), doctest::Contains("version"), DataError);
  write_file(tmp.file("empty.json"), R"({"model_version": 1})");
  CHECK_THROWS_AS(load_model(tmp.file("empty.json")), DataError);
  write_file(tmp.file("notjson.json"), "not json at all {");
  CHECK_THROWS_AS(load_model(tmp.file("notjson.json")), DataError);
  CHECK_THROWS_AS(load_model(tmp.file("absent.json")), DataError);
}

TEST_CASE("state paths round-trip through CSV") {
  TempDir tmp;
  Rng rng(84);
  PrecipDataset ds;
  ds.values = testsupport::random_data(10, 1, 0.3, 2.0, rng);
  Date d = Date::parse("2010-07-01");
  for (int t = 0; t < 10; ++t) {
    ds.dates.push_back(d);
    d = d.next();
  }
  ds.locations = {{"p", 0, 0}};
  ds.blocks = {{2010, 0, 10}};
  const std::vector<int> states{1, 2, 3, 1, 2, 3, 2, 2, 1, 3};
  write_states_csv(ds, states, tmp.file("s.csv"));
  const StatesFile back = read_states_csv(tmp.file("s.csv"));
  CHECK(back.states == states);
  CHECK(back.dates.front() == Date::parse("2010-07-01"));
  CHECK(back.block_ids == std::vector<int>(10, 2010));
}

TEST_CASE("trace CSV carries one row per iteration with phase labels") {
  TempDir tmp;
  FitTrace t;
  for (int i = 0; i < 4; ++i) {
    TraceRow r;
    r.iteration = i + 1;
    r.phase = i < 2 ? 's' : 'c';
    r.elbo = -5.5 * (4 - i);
    r.delta = i ? 5.5 : 0.0;
    r.step = i < 2 ? 0.3 : 0.0;
    t.rows.push_back(r);
  }
  write_trace_csv(t, tmp.file("trace.csv"));
  std::ifstream in(tmp.file("trace.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "iteration,phase,elbo,delta,step");
  int rows = 0;
  bool saw_svb = false, saw_cavi = false;
  while (std::getline(in, line)) {
    ++rows;
    saw_svb |= line.find(",svb,") != std::string::npos;
    saw_cavi |= line.find(",cavi,") != std::string::npos;
  }
  CHECK(rows == 4);
  CHECK(saw_svb);
  CHECK(saw_cavi);
}

TEST_CASE("doubles print as the shortest string that parses back identically") {
  for (double x : {0.1, 1.0 / 3.0, 123456789.123456789, 1e-300, 1e300, 0.0, 2.5,
                   0.30000000000000004}) {
    const std::string s = format_double(x);
    CHECK(std::stod(s) == x);
    CHECK(s.find('\n') == std::string::npos);
  }
  CHECK(format_double(2.5) == "2.5");
  CHECK(format_double(0.0) == "0");
}
