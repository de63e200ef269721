#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bdmm/model.hpp"
#include "bdmm/trajectory.hpp"

namespace bdmm {

constexpr int kTrajectorySchemaVersion = 1;

struct TrajectoryFileHeader {
  int schema_version = kTrajectorySchemaVersion;
  DomainBox domain;
  std::vector<std::string> label_names;
  double grid_dt = 0.0;
  double horizon = 0.0;
  std::uint64_t model_fingerprint = 0;
};

/// JSON-Lines layout: header line, one line per track, one line per event.
/// Locations are written at full precision and round-trip bit-exactly.
void write_trajectory(const std::string& path, const Trajectory& traj, const ModelSpec& model);

/// Reads and validates; throws ValidationError listing the violations, or on
/// a schema-version mismatch.
Trajectory read_trajectory(const std::string& path, TrajectoryFileHeader* header = nullptr);

struct IngestOptions {
  double dt_frame = 0.0;  // seconds per frame; mandatory
  DomainBox domain;
  std::string frame_col = "frame";
  std::string track_col = "track";
  std::string label_col = "label";
  std::vector<std::string> coord_cols = {"x", "y"};
  /// Label alphabet; when empty, the sorted distinct label values are used.
  std::vector<std::string> label_names;
  /// Bridge single-frame gaps inside a track by linear interpolation instead
  /// of rejecting the file.
  bool bridge_gaps = false;
};

/// Builds a trajectory from tracked-particle CSV rows (frame, track id,
/// coordinates, label). Births at each track's first frame (frame 0 rows
/// form the initial configuration), deaths one frame after the last
/// observation, mutations at label changes; the final frame is
/// right-censored. Resulting label alphabet is returned through `options`'
/// label_names when it was left empty.
Trajectory ingest_tracks_csv(const std::string& path, IngestOptions& options);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  static std::string num(double v);
};

/// RFC-4180 output (quotes doubled, fields quoted when needed).
void export_csv(const Table& table, const std::string& path);

/// Minimal RFC-4180 reader; returns rows of fields.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

}  // namespace bdmm
