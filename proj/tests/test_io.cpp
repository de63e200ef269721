#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <unistd.h>
#include <filesystem>
#include <fstream>

#include "bdmm/errors.hpp"
#include "bdmm/io.hpp"
#include "bdmm/likelihood.hpp"
#include "bdmm/simulate.hpp"
#include "support.hpp"

using namespace bdmm;
using namespace testsup;

namespace {

struct TempDir {
  std::filesystem::path dir;
  TempDir() {
    dir = std::filesystem::temp_directory_path() /
          ("bdmm_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    std::filesystem::create_directories(dir);
  }
  ~TempDir() { std::filesystem::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

bool tracks_equal(const Track& a, const Track& b) {
  if (a.id != b.id || a.samples.size() != b.samples.size() || a.labels.size() != b.labels.size())
    return false;
  if (a.death_time.has_value() != b.death_time.has_value()) return false;
  if (a.death_time && *a.death_time != *b.death_time) return false;
  for (size_t i = 0; i < a.samples.size(); ++i) {
    if (a.samples[i].t != b.samples[i].t) return false;
    if (a.samples[i].location != b.samples[i].location) return false;
  }
  for (size_t i = 0; i < a.labels.size(); ++i) {
    if (a.labels[i].t_begin != b.labels[i].t_begin || a.labels[i].t_end != b.labels[i].t_end ||
        a.labels[i].label != b.labels[i].label)
      return false;
  }
  return true;
}

bool trajectories_equal(const Trajectory& a, const Trajectory& b) {
  if (a.horizon != b.horizon || a.grid_dt != b.grid_dt) return false;
  if (a.tracks.size() != b.tracks.size() || a.events.size() != b.events.size()) return false;
  for (size_t i = 0; i < a.tracks.size(); ++i)
    if (!tracks_equal(a.tracks[i], b.tracks[i])) return false;
  for (size_t i = 0; i < a.events.size(); ++i) {
    const auto& x = a.events[i];
    const auto& y = b.events[i];
    if (x.time != y.time || x.kind != y.kind || x.particle_id != y.particle_id) return false;
    if (x.kind == JumpKind::birth && (*x.birth_location != *y.birth_location ||
                                      *x.birth_label != *y.birth_label))
      return false;
  }
  return true;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  for (const auto& l : lines) out << l << "\n";
}

}  // namespace

TEST_CASE("trajectory file: bit-exact round trip on simulated output") {
  TempDir tmp;
  const ModelSpec model = two_label_model(2.0, 0.5, 0.4);
  RngStream rng(1);
  for (int r = 0; r < 100; ++r) {
    SimOptions opts;
    opts.horizon = 3.0;
    opts.grid_dt = 0.05;
    opts.seed = 500;
    opts.stream = static_cast<std::uint64_t>(r);
    const Trajectory traj =
        simulate(model, model.params, uniform_configuration(model.domain, 3, 1, rng), opts);
    const std::string path = tmp.path("t" + std::to_string(r) + ".jsonl");
    write_trajectory(path, traj, model);
    TrajectoryFileHeader hdr;
    const Trajectory back = read_trajectory(path, &hdr);
    CHECK(trajectories_equal(traj, back));
    CHECK(hdr.model_fingerprint == model.fingerprint());
    CHECK(hdr.label_names == model.label_names);
  }
}

TEST_CASE("trajectory file: header-only file yields an empty trajectory") {
  TempDir tmp;
  const ModelSpec model = basic_model(1.0, 0.0);
  Trajectory empty;
  empty.horizon = 7.5;
  empty.grid_dt = 0.25;
  const std::string path = tmp.path("empty.jsonl");
  write_trajectory(path, empty, model);
  const Trajectory back = read_trajectory(path);
  CHECK(back.horizon == 7.5);
  CHECK(back.grid_dt == 0.25);
  CHECK(back.tracks.empty());
  CHECK(back.events.empty());
}

TEST_CASE("trajectory file: schema version and parse errors carry context") {
  TempDir tmp;
  const std::string path = tmp.path("bad.jsonl");
  write_lines(path, {R"({"schema_version":99,"domain":{"lower":[0],"upper":[1],"boundary":"free"},"labels":["a"],"grid_dt":0.1,"horizon":1.0,"model_fingerprint":"0"})"});
  CHECK_THROWS_WITH_AS(read_trajectory(path), doctest::Contains("unsupported schema version"),
                       ValidationError);

  write_lines(path, {"not json"});
  CHECK_THROWS_WITH_AS(read_trajectory(path), doctest::Contains(":1:"), ValidationError);
}

TEST_CASE("trajectory file: event with unknown track id fails validation") {
  TempDir tmp;
  const ModelSpec model = basic_model(2.0, 0.0);
  SimOptions opts;
  opts.horizon = 4.0;
  opts.grid_dt = 0.1;
  opts.seed = 9;
  Trajectory traj = simulate(model, model.params, Configuration{}, opts);
  REQUIRE(!traj.events.empty());
  traj.events.front().particle_id = 424242;
  const std::string path = tmp.path("corrupt.jsonl");
  write_trajectory(path, traj, model);
  CHECK_THROWS_WITH_AS(read_trajectory(path), doctest::Contains("unknown track id 424242"),
                       ValidationError);
}

TEST_CASE("ingest: one full-length track produces no events") {
  TempDir tmp;
  const std::string path = tmp.path("tracks.csv");
  std::ofstream out(path);
  out << "frame,track,x,y,label\n";
  for (int f = 0; f <= 10; ++f)
    out << f << ",3," << (1.0 + 0.1 * f) << ",2.0,walk\n";
  out.close();

  IngestOptions opts;
  opts.dt_frame = 0.5;
  opts.domain = box2d(0.0, 10.0);
  const Trajectory traj = ingest_tracks_csv(path, opts);
  CHECK(traj.events.empty());
  REQUIRE(traj.tracks.size() == 1);
  CHECK(traj.horizon == doctest::Approx(5.0));
  CHECK(traj.grid_dt == 0.5);
  CHECK(!traj.tracks[0].death_time);
  CHECK(traj.initial.size() == 1);
  CHECK(opts.label_names == std::vector<std::string>{"walk"});
  CHECK(validate_trajectory(traj).empty());
}

TEST_CASE("ingest: birth and death timing conventions") {
  TempDir tmp;
  const std::string path = tmp.path("tracks.csv");
  std::ofstream out(path);
  out << "frame,track,x,y,label\n";
  // anchor track covering all 21 frames, plus a track on frames 5..9
  for (int f = 0; f <= 20; ++f) out << f << ",1,5.0,5.0,a\n";
  for (int f = 5; f <= 9; ++f) out << f << ",2," << (2.0 + 0.1 * f) << ",3.0,a\n";
  out.close();

  IngestOptions opts;
  opts.dt_frame = 0.2;
  opts.domain = box2d(0.0, 10.0);
  const Trajectory traj = ingest_tracks_csv(path, opts);
  REQUIRE(traj.events.size() == 2);
  CHECK(traj.events[0].kind == JumpKind::birth);
  CHECK(traj.events[0].time == doctest::Approx(5 * 0.2));
  CHECK(traj.events[1].kind == JumpKind::death);
  CHECK(traj.events[1].time == doctest::Approx(10 * 0.2));  // last frame + one step
  CHECK(validate_trajectory(traj).empty());
}

TEST_CASE("ingest: label change becomes a mutation with correct endpoints") {
  TempDir tmp;
  const std::string path = tmp.path("tracks.csv");
  std::ofstream out(path);
  out << "frame,track,x,y,label\n";
  for (int f = 0; f <= 6; ++f)
    out << f << ",1,4.0,4.0," << (f < 3 ? "slow" : "fast") << "\n";
  out.close();

  IngestOptions opts;
  opts.dt_frame = 1.0;
  opts.domain = box2d(0.0, 10.0);
  const Trajectory traj = ingest_tracks_csv(path, opts);
  REQUIRE(traj.events.size() == 1);
  const auto& ev = traj.events[0];
  CHECK(ev.kind == JumpKind::mutation);
  CHECK(ev.time == doctest::Approx(3.0));
  // alphabet is sorted: fast=0, slow=1
  CHECK(*ev.mutation_from == 1);
  CHECK(*ev.mutation_to == 0);
  CHECK(validate_trajectory(traj).empty());
}

TEST_CASE("ingest: duplicates and gaps") {
  TempDir tmp;
  const std::string path = tmp.path("tracks.csv");
  write_lines(path, {"frame,track,x,y,label", "0,1,1.0,1.0,a", "0,1,1.5,1.0,a", "1,1,2.0,1.0,a"});
  IngestOptions opts;
  opts.dt_frame = 0.1;
  opts.domain = box2d(0.0, 10.0);
  CHECK_THROWS_WITH_AS(ingest_tracks_csv(path, opts), doctest::Contains("duplicate"),
                       ValidationError);

  write_lines(path, {"frame,track,x,y,label", "0,1,1.0,1.0,a", "1,1,1.2,1.0,a", "3,1,1.8,1.0,a",
                     "0,2,5.0,5.0,a", "1,2,5.0,5.0,a", "2,2,5.0,5.0,a", "3,2,5.0,5.0,a"});
  CHECK_THROWS_WITH_AS(ingest_tracks_csv(path, opts), doctest::Contains("gap"), ValidationError);

  opts.bridge_gaps = true;
  const Trajectory traj = ingest_tracks_csv(path, opts);
  CHECK(validate_trajectory(traj).empty());
  const Track* tr = traj.find_track(1);
  REQUIRE(tr);
  REQUIRE(tr->samples.size() == 4);
  CHECK(tr->samples[2].location[0] == doctest::Approx(1.5));  // bridged midpoint
}

TEST_CASE("ingest: simultaneous events are strictly ordered and stay consistent") {
  TempDir tmp;
  const std::string path = tmp.path("tracks.csv");
  std::ofstream out(path);
  out << "frame,track,x,y,label\n";
  for (int f = 0; f <= 8; ++f) out << f << ",1,5.0,5.0,a\n";
  // two births at frame 2, two deaths after frame 6
  for (int f = 2; f <= 6; ++f) out << f << ",2," << (1.0 + 0.1 * f) << ",2.0,a\n";
  for (int f = 2; f <= 6; ++f) out << f << ",3," << (8.0 - 0.1 * f) << ",7.0,a\n";
  out.close();

  IngestOptions opts;
  opts.dt_frame = 0.5;
  opts.domain = box2d(0.0, 10.0);
  const Trajectory traj = ingest_tracks_csv(path, opts);
  CHECK(validate_trajectory(traj).empty());
  REQUIRE(traj.events.size() == 4);
  for (size_t i = 1; i < traj.events.size(); ++i)
    CHECK(traj.events[i].time > traj.events[i - 1].time);
}

TEST_CASE("ingest -> write -> read round trip is stable") {
  TempDir tmp;
  const std::string csv = tmp.path("tracks.csv");
  std::ofstream out(csv);
  out << "frame,track,x,y,label\n";
  for (int f = 0; f <= 12; ++f) out << f << ",1," << (3.0 + 0.05 * f) << ",4.0,a\n";
  for (int f = 4; f <= 9; ++f) out << f << ",2,6.0," << (2.0 + 0.1 * f) << ",b\n";
  out.close();

  IngestOptions opts;
  opts.dt_frame = 0.25;
  opts.domain = box2d(0.0, 10.0);
  const Trajectory traj = ingest_tracks_csv(csv, opts);

  ModelSpec model = two_label_model(1.0, 0.5, 0.0);
  const std::string path = tmp.path("round.jsonl");
  write_trajectory(path, traj, model);
  const Trajectory back = read_trajectory(path);
  CHECK(trajectories_equal(traj, back));

  // the ingested trajectory supports likelihood evaluation
  const double ll = loglik_total(back, model, model.params).total;
  CHECK(std::isfinite(ll));
}

TEST_CASE("csv export: quoting, empty tables, closed polylines") {
  TempDir tmp;
  Table t;
  t.header = {"name", "value"};
  const std::string path = tmp.path("empty.csv");
  export_csv(t, path);
  auto rows = read_csv(path);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0] == std::vector<std::string>{"name", "value"});

  t.add_row({"plain", Table::num(1.5)});
  t.add_row({"quote\"inside", "with,comma"});
  t.add_row({"multi\nline", "x"});
  const std::string path2 = tmp.path("quoted.csv");
  export_csv(t, path2);
  rows = read_csv(path2);
  REQUIRE(rows.size() == 4);
  CHECK(rows[1][1] == "1.5");
  CHECK(rows[2][0] == "quote\"inside");
  CHECK(rows[2][1] == "with,comma");
  CHECK(rows[3][0] == "multi\nline");

  // 3x3 surface grid: nine data rows
  Table grid;
  grid.header = {"a", "b", "v"};
  for (int i = 0; i < 9; ++i) grid.add_row({Table::num(i), Table::num(i), Table::num(i)});
  const std::string path3 = tmp.path("grid.csv");
  export_csv(grid, path3);
  CHECK(read_csv(path3).size() == 10);

  // numbers round-trip through the shortest representation
  CHECK(Table::num(0.1) == "0.1");
  CHECK(std::stod(Table::num(1.0 / 3.0)) == 1.0 / 3.0);
}
