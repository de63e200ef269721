#include "bdmm/model.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bdmm/errors.hpp"

namespace bdmm {

using nlohmann::json;

namespace {

const json& require(const json& j, const std::string& key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError("missing \"" + key + "\" in " + where);
  return *it;
}

Vec parse_vec(const json& j) {
  Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
  return v;
}

int label_index(const std::vector<std::string>& names, const std::string& s) {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == s) return static_cast<int>(i);
  throw ConfigError("unknown label name: " + s);
}

std::vector<Label> parse_label_list(const json& j, const std::vector<std::string>& names) {
  std::vector<Label> out;
  for (const auto& e : j) out.push_back(label_index(names, e.get<std::string>()));
  return out;
}

}  // namespace

double ModelSpec::total_intensity(const ParameterVector& th, const Configuration& x) const {
  return beta.eval(th, x) + delta.eval(th, x) + tau.eval(th, x);
}

double ModelSpec::total_bound(const ParameterVector& th, int n) const {
  return beta.bound_given_n(th, n) + delta.bound_given_n(th, n) + tau.bound_given_n(th, n);
}

bool ModelSpec::intensities_location_independent() const {
  return beta.location_independent && delta.location_independent && tau.location_independent;
}

const IntensitySpec& ModelSpec::intensity(JumpKind k) const {
  switch (k) {
    case JumpKind::birth: return beta;
    case JumpKind::death: return delta;
    case JumpKind::mutation: return tau;
  }
  return beta;
}

const KernelSpec& ModelSpec::kernel(JumpKind k) const {
  switch (k) {
    case JumpKind::birth: return birth;
    case JumpKind::death: return death;
    case JumpKind::mutation: return mutation;
  }
  return birth;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

std::uint64_t ModelSpec::fingerprint() const {
  return config_text.empty() ? 0 : fnv1a64(config_text);
}

void finalize_model(ModelSpec& model) {
  model.domain.validate();
  model.params.validate();
  if (model.label_names.empty()) throw ConfigError("model: label alphabet is empty");
  if (model.n_max < 1) throw ConfigError("model: n_max must be at least 1");
  model.beta = capped(std::move(model.beta), model.n_max);
  model.delta = zero_on_empty(std::move(model.delta));
  model.tau = zero_on_empty(std::move(model.tau));
}

ModelSpec load_model(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }

  ModelSpec model;
  model.config_text = doc.dump();

  for (const auto& name : require(doc, "labels", "model config"))
    model.label_names.push_back(name.get<std::string>());
  const int n_labels = model.n_labels();

  const json& dom = require(doc, "domain", "model config");
  model.domain.lower = parse_vec(require(dom, "lower", "domain"));
  model.domain.upper = parse_vec(require(dom, "upper", "domain"));
  model.domain.boundary =
      boundary_from_string(dom.value("boundary", std::string("reflective")));
  model.domain.validate();
  const int dim = model.domain.dim();

  for (const auto& [name, spec] : require(doc, "params", "model config").items()) {
    const double init = require(spec, "init", "params." + name).get<double>();
    const double lo = spec.value("lo", -std::numeric_limits<double>::infinity());
    const double hi = spec.value("hi", std::numeric_limits<double>::infinity());
    model.params.add(name, init, lo, hi);
  }

  // Initial configuration (optional). Ids follow the listed order.
  if (doc.contains("x0")) {
    std::vector<Particle> ps;
    int id = 0;
    for (const auto& e : doc["x0"]) {
      Vec loc = parse_vec(require(e, "loc", "x0 entry"));
      if (loc.size() != dim) throw ConfigError("x0: location dimension mismatch");
      const Label m = label_index(model.label_names, require(e, "label", "x0 entry").get<std::string>());
      ps.emplace_back(id++, std::move(loc), m);
    }
    model.x0 = Configuration(std::move(ps));
  }

  model.n_max = doc.value("n_max", model.x0 ? 10 * model.x0->size() + 50 : 200);

  const json& kernels = require(doc, "kernels", "model config");

  // A parameterized mutation matrix contributes parameter names of its own.
  const json& mut = require(kernels, "mutation", "kernels");
  Mat P = Mat::Zero(n_labels, n_labels);
  if (n_labels > 1) {
    const json& rows = require(mut, "matrix", "kernels.mutation");
    if (static_cast<int>(rows.size()) != n_labels)
      throw ConfigError("mutation matrix must be |labels| x |labels|");
    for (int i = 0; i < n_labels; ++i)
      for (int j = 0; j < n_labels; ++j) P(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)].get<double>();
  }
  MutationMatrixSpec mspec;
  mspec.initial = P;
  mspec.parameterized = mut.value("parameterized", false);
  mspec.param_prefix = mut.value("param_prefix", std::string("q"));
  if (mspec.parameterized) register_mutation_params(P, model.params, mspec.param_prefix);

  const json& intens = require(doc, "intensities", "model config");
  auto load_intensity = [&](const char* key) {
    const json& j = require(intens, key, "intensities");
    const auto fam = intensity_family_from_string(require(j, "family", key).get<std::string>());
    return make_intensity(fam, require(j, "rate", key).get<std::string>(), model.params,
                          model.n_max);
  };
  model.beta = load_intensity("beta");
  model.delta = load_intensity("delta");
  model.tau = load_intensity("tau");

  {
    const json& jb = require(kernels, "birth", "kernels");
    const auto fam = birth_family_from_string(require(jb, "family", "kernels.birth").get<std::string>());
    BirthKernelOptions opts;
    opts.n_labels = n_labels;
    if (jb.contains("label_probs")) {
      for (const auto& p : jb["label_probs"]) opts.label_probs.push_back(p.get<double>());
    } else {
      opts.label_probs.assign(static_cast<size_t>(n_labels), 1.0 / n_labels);
    }
    opts.quadrature_points = jb.value("quadrature_points", 64);
    opts.bracket_draws = jb.value("bracket_draws", 4096);
    if (fam == BirthFamily::gaussian_mixture || fam == BirthFamily::colocalization)
      opts.log_sigma_param = require(jb, "log_sigma", "kernels.birth").get<std::string>();
    if (fam == BirthFamily::colocalization) {
      opts.mix_param = require(jb, "mix", "kernels.birth").get<std::string>();
      opts.anchor_labels =
          parse_label_list(require(jb, "anchor_labels", "kernels.birth"), model.label_names);
      if (jb.contains("colocalized_labels"))
        opts.colocalized_labels = parse_label_list(jb["colocalized_labels"], model.label_names);
    }
    if (fam == BirthFamily::potential) {
      const json& w = require(jb, "weights", "kernels.birth");
      opts.weight_params.assign(static_cast<size_t>(n_labels), {});
      opts.fixed_weights = Mat::Zero(n_labels, n_labels);
      for (int i = 0; i < n_labels; ++i) {
        for (int j = 0; j < n_labels; ++j) {
          const auto& cell = w[static_cast<size_t>(i)][static_cast<size_t>(j)];
          if (cell.is_string()) {
            opts.weight_params[static_cast<size_t>(i)].push_back(cell.get<std::string>());
          } else {
            opts.weight_params[static_cast<size_t>(i)].push_back("");
            opts.fixed_weights(i, j) = cell.get<double>();
          }
        }
      }
      opts.bump_height = jb.value("bump_height", 1.0);
      opts.bump_scale = jb.value("bump_scale", 1.0);
    }
    model.birth = make_birth_kernel(fam, opts, model.domain, model.params);
  }

  {
    const std::string fam = require(require(kernels, "death", "kernels"), "family", "kernels.death").get<std::string>();
    if (fam != "uniform") throw ConfigError("unknown death kernel family: " + fam);
    model.death = make_death_kernel(model.params);
  }

  {
    const std::string fam = require(mut, "family", "kernels.mutation").get<std::string>();
    if (fam != "transition_matrix")
      throw ConfigError("unknown mutation kernel family: " + fam);
    model.mutation = make_mutation_kernel(mspec, model.params);
  }

  {
    const json& jm = require(doc, "move", "model config");
    const std::string fam = require(jm, "family", "move").get<std::string>();
    if (fam == "independent_per_label") {
      const json& regs = require(jm, "regimes", "move");
      std::vector<RegimeSpec> per_label(static_cast<size_t>(n_labels));
      for (int m = 0; m < n_labels; ++m) {
        const json& r = require(regs, model.label_names[static_cast<size_t>(m)], "move.regimes");
        RegimeSpec rs;
        rs.kind = regime_kind_from_string(require(r, "kind", "regime").get<std::string>());
        rs.sigma = require(r, "sigma", "regime").get<double>();
        if (rs.kind == RegimeKind::drifted)
          for (const auto& v : require(r, "velocity", "regime")) rs.velocity_params.push_back(v.get<std::string>());
        if (rs.kind == RegimeKind::ou) rs.kappa_param = require(r, "kappa", "regime").get<std::string>();
        per_label[static_cast<size_t>(m)] = std::move(rs);
      }
      model.move = make_independent_move(per_label, dim, model.params);
    } else if (fam == "langevin") {
      LangevinOptions opts;
      for (const auto& s : require(jm, "sigma", "move")) opts.sigma_per_label.push_back(s.get<double>());
      if (static_cast<int>(opts.sigma_per_label.size()) != n_labels)
        throw ConfigError("move.sigma must list one value per label");
      for (const auto& row : require(jm, "weights", "move")) {
        std::vector<std::string> names;
        for (const auto& cell : row) names.push_back(cell.get<std::string>());
        opts.weight_params.push_back(std::move(names));
      }
      opts.bump_height = jm.value("bump_height", 1.0);
      opts.bump_scale = jm.value("bump_scale", 1.0);
      model.move = make_langevin_move(opts, dim, model.params);
    } else {
      throw ConfigError("unknown move family: " + fam);
    }
  }

  finalize_model(model);
  return model;
}

ModelSpec load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_model(ss.str());
}

}  // namespace bdmm
