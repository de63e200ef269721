#include "bdmm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bdmm/errors.hpp"

namespace bdmm {

using nlohmann::json;

namespace {

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from_json(const json& a) {
  Vec v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i].get<double>();
  return v;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

std::uint64_t from_hex64(const std::string& s) { return std::stoull(s, nullptr, 16); }

}  // namespace

void write_trajectory(const std::string& path, const Trajectory& traj, const ModelSpec& model) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open for writing: " + path);

  json header;
  header["schema_version"] = kTrajectorySchemaVersion;
  header["domain"] = {{"lower", vec_to_json(model.domain.lower)},
                      {"upper", vec_to_json(model.domain.upper)},
                      {"boundary", to_string(model.domain.boundary)}};
  header["labels"] = model.label_names;
  header["grid_dt"] = traj.grid_dt;
  header["horizon"] = traj.horizon;
  header["model_fingerprint"] = hex64(model.fingerprint());
  out << header.dump() << "\n";

  for (const auto& tr : traj.tracks) {
    json t;
    t["type"] = "track";
    t["id"] = tr.id;
    json labels = json::array();
    for (const auto& iv : tr.labels) labels.push_back({iv.t_begin, iv.t_end, iv.label});
    t["labels"] = std::move(labels);
    json samples = json::array();
    for (const auto& s : tr.samples) {
      json row = json::array();
      row.push_back(s.t);
      for (int k = 0; k < s.location.size(); ++k) row.push_back(s.location[k]);
      samples.push_back(std::move(row));
    }
    t["samples"] = std::move(samples);
    out << t.dump() << "\n";
  }

  for (const auto& ev : traj.events) {
    json e;
    e["type"] = "event";
    e["t"] = ev.time;
    e["kind"] = to_string(ev.kind);
    e["id"] = ev.particle_id;
    switch (ev.kind) {
      case JumpKind::birth:
        e["loc"] = vec_to_json(*ev.birth_location);
        e["label"] = *ev.birth_label;
        break;
      case JumpKind::death:
        e["label"] = *ev.death_label;
        break;
      case JumpKind::mutation:
        e["from"] = *ev.mutation_from;
        e["to"] = *ev.mutation_to;
        break;
    }
    out << e.dump() << "\n";
  }
}

Trajectory read_trajectory(const std::string& path, TrajectoryFileHeader* header_out) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open: " + path);

  std::string line;
  int line_no = 0;
  auto parse_line = [&](const std::string& text) {
    try {
      return json::parse(text);
    } catch (const json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  };

  if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
  ++line_no;
  const json header = parse_line(line);
  TrajectoryFileHeader hdr;
  try {
    hdr.schema_version = header.at("schema_version").get<int>();
    if (hdr.schema_version != kTrajectorySchemaVersion)
      throw ValidationError(path + ": unsupported schema version " +
                            std::to_string(hdr.schema_version));
    hdr.domain.lower = vec_from_json(header.at("domain").at("lower"));
    hdr.domain.upper = vec_from_json(header.at("domain").at("upper"));
    hdr.domain.boundary = boundary_from_string(header.at("domain").at("boundary"));
    hdr.label_names = header.at("labels").get<std::vector<std::string>>();
    hdr.grid_dt = header.at("grid_dt").get<double>();
    hdr.horizon = header.at("horizon").get<double>();
    hdr.model_fingerprint = from_hex64(header.at("model_fingerprint").get<std::string>());
  } catch (const json::exception& e) {
    throw ValidationError(path + ":1: bad header: " + e.what());
  }

  Trajectory traj;
  traj.horizon = hdr.horizon;
  traj.grid_dt = hdr.grid_dt;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = parse_line(line);
    try {
      const std::string type = j.at("type").get<std::string>();
      if (type == "track") {
        Track tr;
        tr.id = j.at("id").get<int>();
        for (const auto& iv : j.at("labels"))
          tr.labels.push_back({iv[0].get<double>(), iv[1].get<double>(), iv[2].get<Label>()});
        for (const auto& s : j.at("samples")) {
          TrackSample smp;
          smp.t = s[0].get<double>();
          smp.location.resize(static_cast<int>(s.size()) - 1);
          for (size_t k = 1; k < s.size(); ++k)
            smp.location[static_cast<int>(k) - 1] = s[k].get<double>();
          tr.samples.push_back(std::move(smp));
        }
        if (tr.labels.empty() || tr.samples.empty())
          throw ValidationError(path + ":" + std::to_string(line_no) + ": empty track record");
        traj.tracks.push_back(std::move(tr));
      } else if (type == "event") {
        const double t = j.at("t").get<double>();
        const JumpKind kind = jump_kind_from_string(j.at("kind").get<std::string>());
        const int id = j.at("id").get<int>();
        switch (kind) {
          case JumpKind::birth:
            traj.events.push_back(
                JumpEvent::birth(t, id, vec_from_json(j.at("loc")), j.at("label").get<Label>()));
            break;
          case JumpKind::death:
            traj.events.push_back(JumpEvent::death(t, id, j.at("label").get<Label>()));
            break;
          case JumpKind::mutation:
            traj.events.push_back(
                JumpEvent::mutation(t, id, j.at("from").get<Label>(), j.at("to").get<Label>()));
            break;
        }
      } else {
        throw ValidationError(path + ":" + std::to_string(line_no) + ": unknown record type");
      }
    } catch (const json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }

  std::sort(traj.tracks.begin(), traj.tracks.end(),
            [](const Track& a, const Track& b) { return a.id < b.id; });

  // Death times and the initial configuration are implied by events/tracks.
  for (const auto& ev : traj.events) {
    if (ev.kind != JumpKind::death) continue;
    for (auto& tr : traj.tracks)
      if (tr.id == ev.particle_id) tr.death_time = ev.time;
  }
  {
    std::vector<Particle> init;
    for (const auto& tr : traj.tracks) {
      if (tr.samples.front().t <= 1e-9)
        init.emplace_back(tr.id, tr.samples.front().location, tr.label_at(0.0));
    }
    traj.initial = Configuration(std::move(init));
  }

  const auto issues = validate_trajectory(traj);
  if (!issues.empty())
    throw ValidationError(path + ": invalid trajectory:\n" + format_issues(issues));
  if (header_out) *header_out = hdr;
  return traj;
}

// ---------------------------------------------------------------------------
// Tracked-particle CSV ingestion

namespace {

struct RawObs {
  long long frame;
  Vec loc;
  std::string label;
};

}  // namespace

Trajectory ingest_tracks_csv(const std::string& path, IngestOptions& options) {
  if (!(options.dt_frame > 0.0))
    throw ValidationError("ingest: dt_frame (seconds per frame) must be set and positive");
  const auto rows = read_csv(path);
  if (rows.size() < 2) throw ValidationError("ingest: no data rows in " + path);

  const auto& head = rows.front();
  auto col = [&](const std::string& name) {
    for (size_t i = 0; i < head.size(); ++i)
      if (head[i] == name) return static_cast<int>(i);
    throw ValidationError("ingest: missing column \"" + name + "\"");
  };
  const int c_frame = col(options.frame_col);
  const int c_track = col(options.track_col);
  const int c_label = col(options.label_col);
  std::vector<int> c_coord;
  for (const auto& name : options.coord_cols) c_coord.push_back(col(name));
  const int dim = static_cast<int>(c_coord.size());

  std::map<int, std::vector<RawObs>> by_track;
  std::set<std::pair<int, long long>> seen;
  long long max_frame = 0;
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.empty() || (row.size() == 1 && row[0].empty())) continue;
    RawObs obs;
    int track_id;
    try {
      obs.frame = std::stoll(row.at(static_cast<size_t>(c_frame)));
      track_id = std::stoi(row.at(static_cast<size_t>(c_track)));
      obs.loc.resize(dim);
      for (int k = 0; k < dim; ++k)
        obs.loc[k] = std::stod(row.at(static_cast<size_t>(c_coord[static_cast<size_t>(k)])));
      obs.label = row.at(static_cast<size_t>(c_label));
    } catch (const std::exception&) {
      throw ValidationError("ingest: malformed row " + std::to_string(r + 1));
    }
    if (obs.frame < 0) throw ValidationError("ingest: negative frame index");
    if (!seen.insert({track_id, obs.frame}).second)
      throw ValidationError("ingest: duplicate (frame, track) pair: frame " +
                            std::to_string(obs.frame) + ", track " + std::to_string(track_id));
    max_frame = std::max(max_frame, obs.frame);
    by_track[track_id].push_back(std::move(obs));
  }
  if (by_track.empty()) throw ValidationError("ingest: no data rows");
  if (max_frame < 1) throw ValidationError("ingest: need at least two frames");

  // Label alphabet.
  if (options.label_names.empty()) {
    std::set<std::string> values;
    for (const auto& [id, obs] : by_track)
      for (const auto& o : obs) values.insert(o.label);
    options.label_names.assign(values.begin(), values.end());
  }
  auto label_of = [&](const std::string& s) -> Label {
    for (size_t i = 0; i < options.label_names.size(); ++i)
      if (options.label_names[i] == s) return static_cast<Label>(i);
    throw ValidationError("ingest: label value \"" + s + "\" not in the declared alphabet");
  };

  const double dt = options.dt_frame;
  const double horizon = static_cast<double>(max_frame) * dt;

  // Gaps: reject or bridge.
  for (auto& [id, obs] : by_track) {
    std::sort(obs.begin(), obs.end(),
              [](const RawObs& a, const RawObs& b) { return a.frame < b.frame; });
    std::vector<RawObs> filled;
    for (size_t i = 0; i < obs.size(); ++i) {
      if (!filled.empty()) {
        const long long gap = obs[i].frame - filled.back().frame;
        if (gap > 1) {
          if (!options.bridge_gaps)
            throw ValidationError("ingest: track " + std::to_string(id) +
                                  " has a gap before frame " + std::to_string(obs[i].frame) +
                                  " (set bridge_gaps to interpolate)");
          const RawObs& a = filled.back();
          const RawObs& b = obs[i];
          for (long long f = a.frame + 1; f < b.frame; ++f) {
            const double w = static_cast<double>(f - a.frame) / static_cast<double>(gap);
            filled.push_back({f, (1.0 - w) * a.loc + w * b.loc, a.label});
          }
        }
      }
      filled.push_back(obs[i]);
    }
    obs = std::move(filled);
  }

  // Nominal events, then a deterministic strict ordering: simultaneous frame
  // events are separated by a tiny offset carried into the track records.
  struct PendingEvent {
    double t;
    int kind_rank;  // birth 0, mutation 1, death 2
    int track_id;
    JumpEvent ev;
  };
  std::vector<PendingEvent> pending;

  Trajectory traj;
  traj.horizon = horizon;
  traj.grid_dt = dt;

  std::map<int, Track> tracks;
  std::vector<Particle> initial;
  for (const auto& [id, obs] : by_track) {
    Track tr;
    tr.id = id;
    const double birth_nominal = static_cast<double>(obs.front().frame) * dt;
    const Label birth_label = label_of(obs.front().label);
    for (const auto& o : obs) tr.samples.push_back({static_cast<double>(o.frame) * dt, o.loc});
    tr.labels.push_back({birth_nominal, horizon, birth_label});

    if (obs.front().frame > 0) {
      PendingEvent pe{birth_nominal, 0, id,
                      JumpEvent::birth(birth_nominal, id, obs.front().loc, birth_label)};
      pending.push_back(std::move(pe));
    } else {
      initial.emplace_back(id, obs.front().loc, birth_label);
    }
    for (size_t i = 1; i < obs.size(); ++i) {
      if (obs[i].label != obs[i - 1].label) {
        const double t = static_cast<double>(obs[i].frame) * dt;
        pending.push_back({t, 1, id,
                           JumpEvent::mutation(t, id, label_of(obs[i - 1].label),
                                               label_of(obs[i].label))});
      }
    }
    if (obs.back().frame < max_frame) {
      const double t = static_cast<double>(obs.back().frame + 1) * dt;
      pending.push_back({t, 2, id, JumpEvent::death(t, id, label_of(obs.back().label))});
    }
    tracks.emplace(id, std::move(tr));
  }

  // Strictly increasing event times. Ties at a frame time t are separated by
  // a sub-resolution offset: deaths move just below t (their tracks have no
  // sample at t), mutations and births sit at or just above it.
  std::sort(pending.begin(), pending.end(), [](const PendingEvent& a, const PendingEvent& b) {
    return std::tie(a.t, a.kind_rank, a.track_id) < std::tie(b.t, b.kind_rank, b.track_id);
  });
  const double eps = std::max(dt * 1e-6, 1e-8);
  for (size_t i = 0; i < pending.size();) {
    size_t j = i;
    while (j < pending.size() && pending[j].t == pending[i].t) ++j;
    const double t = pending[i].t;
    if (j - i > 1) {
      int n_deaths = 0;
      for (size_t k = i; k < j; ++k) n_deaths += (pending[k].ev.kind == JumpKind::death) ? 1 : 0;
      int death_seen = 0, other_seen = 0;
      for (size_t k = i; k < j; ++k) {
        if (pending[k].ev.kind == JumpKind::death)
          pending[k].ev.time = t - (n_deaths - death_seen++) * eps;
        else
          pending[k].ev.time = t + (other_seen++) * eps;
      }
    }
    i = j;
  }
  std::sort(pending.begin(), pending.end(),
            [](const PendingEvent& a, const PendingEvent& b) { return a.ev.time < b.ev.time; });
  for (auto& pe : pending) {
    Track& tr = tracks.at(pe.track_id);
    const double t_ev = pe.ev.time;
    switch (pe.ev.kind) {
      case JumpKind::birth:
        tr.labels.front().t_begin = t_ev;
        tr.samples.front().t = t_ev;
        break;
      case JumpKind::death:
        tr.death_time = t_ev;
        tr.labels.back().t_end = t_ev;
        break;
      case JumpKind::mutation: {
        tr.labels.back().t_end = t_ev;
        tr.labels.push_back({t_ev, horizon, *pe.ev.mutation_to});
        break;
      }
    }
    traj.events.push_back(pe.ev);
  }

  for (auto& [id, tr] : tracks) traj.tracks.push_back(std::move(tr));
  traj.initial = Configuration(std::move(initial));

  const auto issues = validate_trajectory(traj);
  if (!issues.empty())
    throw ValidationError("ingest: inconsistent trajectory:\n" + format_issues(issues));
  return traj;
}

// ---------------------------------------------------------------------------
// CSV

std::string Table::num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\n\r") != std::string::npos;
}

std::string quoted(const std::string& s) {
  if (!needs_quoting(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

}  // namespace

void export_csv(const Table& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  auto write_row = [&](const std::vector<std::string>& row) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << quoted(row[i]);
    }
    out << "\r\n";
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
  if (!out) throw ValidationError("write failed: " + path);
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
    } else {
      field += c;
    }
  }
  if (!field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace bdmm
