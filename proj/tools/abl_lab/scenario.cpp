#include "scenario.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace abl::cli {

using nlohmann::json;

namespace {

std::string location_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ":" + std::to_string(col);
}

std::string child(const std::string& path, std::string_view key) { return path + "/" + std::string(key); }
std::string child(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError(path.empty() ? "/" : path, message);
}

void expect_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) fail(child(path, key), "unknown key");
  }
}

const json& require(const json& j, const std::string& path, std::string_view key) {
  auto it = j.find(std::string(key));
  if (it == j.end()) fail(child(path, key), "required key missing");
  return *it;
}

double read_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "number must be finite");
  return v;
}

std::uint64_t read_unsigned(const json& j, const std::string& path) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
    fail(path, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

std::string read_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

Complex read_complex(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected a [re, im] pair");
  return {read_number(j[0], child(path, 0)), read_number(j[1], child(path, 1))};
}

BlochSpec read_bloch(const json& j, const std::string& path) {
  expect_keys(j, path, {"theta_deg", "phi_deg"});
  BlochSpec b;
  b.theta_deg = read_number(require(j, path, "theta_deg"), child(path, "theta_deg"));
  if (j.contains("phi_deg")) b.phi_deg = read_number(j["phi_deg"], child(path, "phi_deg"));
  return b;
}

StateSpec read_state(const json& j, const std::string& path) {
  expect_keys(j, path, {"bloch", "amplitudes", "normalize", "label"});
  StateSpec s;
  const bool has_bloch = j.contains("bloch");
  const bool has_amps = j.contains("amplitudes");
  if (has_bloch == has_amps) fail(path, "exactly one of 'bloch' or 'amplitudes' is required");
  if (has_bloch) {
    if (j.contains("normalize")) fail(child(path, "normalize"), "only valid with 'amplitudes'");
    s.form = read_bloch(j["bloch"], child(path, "bloch"));
  } else {
    AmplitudeSpec a;
    const auto& amps = j["amplitudes"];
    const auto amps_path = child(path, "amplitudes");
    if (!amps.is_array()) fail(amps_path, "expected an array of [re, im] pairs");
    for (std::size_t i = 0; i < amps.size(); ++i) a.amplitudes.push_back(read_complex(amps[i], child(amps_path, i)));
    if (j.contains("normalize")) {
      if (!j["normalize"].is_boolean()) fail(child(path, "normalize"), "expected a boolean");
      a.normalize = j["normalize"].get<bool>();
    }
    s.form = std::move(a);
  }
  if (j.contains("label")) s.label = read_string(j["label"], child(path, "label"));
  return s;
}

ObservableSpec read_observable(const json& j, const std::string& path) {
  expect_keys(j, path, {"name", "spin", "projector", "outcomes"});
  ObservableSpec o;
  o.name = read_string(require(j, path, "name"), child(path, "name"));
  if (o.name.empty()) fail(child(path, "name"), "must not be empty");
  const int forms = int(j.contains("spin")) + int(j.contains("projector")) + int(j.contains("outcomes"));
  if (forms != 1) fail(path, "exactly one of 'spin', 'projector' or 'outcomes' is required");
  if (j.contains("spin")) {
    o.form = read_bloch(j["spin"], child(path, "spin"));
  } else if (j.contains("projector")) {
    const auto p = child(path, "projector");
    if (!j["projector"].is_array()) fail(p, "expected an array of basis indices");
    std::vector<std::size_t> indices;
    for (std::size_t i = 0; i < j["projector"].size(); ++i) {
      indices.push_back(static_cast<std::size_t>(read_unsigned(j["projector"][i], child(p, i))));
    }
    o.form = std::move(indices);
  } else {
    const auto p = child(path, "outcomes");
    if (!j["outcomes"].is_array()) fail(p, "expected an array of outcomes");
    std::vector<ExplicitOutcomeSpec> outcomes;
    for (std::size_t i = 0; i < j["outcomes"].size(); ++i) {
      const auto& e = j["outcomes"][i];
      const auto ep = child(p, i);
      expect_keys(e, ep, {"label", "eigenvalue", "matrix"});
      ExplicitOutcomeSpec spec;
      spec.label = read_string(require(e, ep, "label"), child(ep, "label"));
      spec.eigenvalue = read_number(require(e, ep, "eigenvalue"), child(ep, "eigenvalue"));
      const auto& m = require(e, ep, "matrix");
      const auto mp = child(ep, "matrix");
      if (!m.is_array()) fail(mp, "expected an array of rows");
      for (std::size_t r = 0; r < m.size(); ++r) {
        if (!m[r].is_array()) fail(child(mp, r), "expected a row of [re, im] pairs");
        std::vector<Complex> row;
        for (std::size_t c = 0; c < m[r].size(); ++c) row.push_back(read_complex(m[r][c], child(child(mp, r), c)));
        spec.matrix.push_back(std::move(row));
      }
      outcomes.push_back(std::move(spec));
    }
    o.form = std::move(outcomes);
  }
  return o;
}

json complex_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

json bloch_json(const BlochSpec& b) {
  json j = {{"theta_deg", b.theta_deg}};
  if (b.phi_deg) j["phi_deg"] = *b.phi_deg;
  return j;
}

json state_json(const StateSpec& s) {
  json j = json::object();
  if (const auto* b = std::get_if<BlochSpec>(&s.form)) {
    j["bloch"] = bloch_json(*b);
  } else {
    const auto& a = std::get<AmplitudeSpec>(s.form);
    json amps = json::array();
    for (const auto& z : a.amplitudes) amps.push_back(complex_json(z));
    j["amplitudes"] = std::move(amps);
    if (a.normalize) j["normalize"] = *a.normalize;
  }
  if (s.label) j["label"] = *s.label;
  return j;
}

json observable_json(const ObservableSpec& o) {
  json j = {{"name", o.name}};
  if (const auto* b = std::get_if<BlochSpec>(&o.form)) {
    j["spin"] = bloch_json(*b);
  } else if (const auto* idx = std::get_if<std::vector<std::size_t>>(&o.form)) {
    j["projector"] = *idx;
  } else {
    json outcomes = json::array();
    for (const auto& e : std::get<std::vector<ExplicitOutcomeSpec>>(o.form)) {
      json m = json::array();
      for (const auto& row : e.matrix) {
        json r = json::array();
        for (const auto& z : row) r.push_back(complex_json(z));
        m.push_back(std::move(r));
      }
      outcomes.push_back({{"label", e.label}, {"eigenvalue", e.eigenvalue}, {"matrix", std::move(m)}});
    }
    j["outcomes"] = std::move(outcomes);
  }
  return j;
}

StateVector build_state(const StateSpec& s, std::size_t dim, const std::string& path) {
  try {
    std::optional<StateVector> state;
    if (const auto* b = std::get_if<BlochSpec>(&s.form)) {
      if (dim != 2) fail(child(path, "bloch"), "Bloch directions require dim 2");
      state = spin_state(BlochDirection::from_degrees(b->theta_deg, b->phi_deg.value_or(0.0)), true);
    } else {
      const auto& a = std::get<AmplitudeSpec>(s.form);
      if (a.amplitudes.size() != dim) {
        fail(child(path, "amplitudes"), "has " + std::to_string(a.amplitudes.size()) + " entries, dim is " +
                                            std::to_string(dim));
      }
      state = a.normalize.value_or(false) ? StateVector::normalized(a.amplitudes) : StateVector(a.amplitudes);
    }
    return state->with_label(s.label.value_or(""));
  } catch (const abl::Error& e) {
    fail(path, e.what());
  }
}

Observable build_observable(const ObservableSpec& o, std::size_t dim, const std::string& path) {
  try {
    if (const auto* b = std::get_if<BlochSpec>(&o.form)) {
      if (dim != 2) fail(child(path, "spin"), "spin observables require dim 2");
      return spin_observable(BlochDirection::from_degrees(b->theta_deg, b->phi_deg.value_or(0.0)), o.name);
    }
    if (const auto* idx = std::get_if<std::vector<std::size_t>>(&o.form)) {
      return projector_observable(Projector::basis(dim, *idx), o.name);
    }
    std::vector<Outcome> outcomes;
    const auto& specs = std::get<std::vector<ExplicitOutcomeSpec>>(o.form);
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const auto& e = specs[i];
      const auto mp = child(child(child(path, "outcomes"), i), "matrix");
      if (e.matrix.size() != dim) fail(mp, "expected " + std::to_string(dim) + " rows");
      std::vector<Complex> data;
      for (std::size_t r = 0; r < dim; ++r) {
        if (e.matrix[r].size() != dim) fail(child(mp, r), "expected " + std::to_string(dim) + " entries");
        data.insert(data.end(), e.matrix[r].begin(), e.matrix[r].end());
      }
      try {
        outcomes.push_back({e.eigenvalue, e.label, Projector(Matrix(dim, std::move(data)))});
      } catch (const abl::Error& err) {
        fail(mp, err.what());
      }
    }
    return Observable(o.name, std::move(outcomes));
  } catch (const abl::Error& e) {
    fail(path, e.what());
  }
}

}  // namespace

const Observable& Scenario::observable(std::string_view name) const {
  for (const auto& o : observables) {
    if (o.name() == name) return o;
  }
  throw ConfigError("/observables", "no observable named '" + std::string(name) + "'");
}

ScenarioConfig parse_scenario(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(location_of(text, e.byte), e.what());
  }
  const std::string top;
  expect_keys(root, top,
              {"name", "description", "dim", "pre", "post", "observables", "sequence", "final", "trials", "seed",
               "time_labels"});

  ScenarioConfig c;
  if (root.contains("name")) c.name = read_string(root["name"], "/name");
  if (root.contains("description")) c.description = read_string(root["description"], "/description");
  const auto dim = read_unsigned(require(root, top, "dim"), "/dim");
  if (dim < kMinDim || dim > kMaxDim) {
    fail("/dim", "must lie in [" + std::to_string(kMinDim) + ", " + std::to_string(kMaxDim) + "]");
  }
  c.dim = static_cast<std::size_t>(dim);
  c.pre = read_state(require(root, top, "pre"), "/pre");
  c.post = read_state(require(root, top, "post"), "/post");

  const auto& obs = require(root, top, "observables");
  if (!obs.is_array()) fail("/observables", "expected an array");
  std::set<std::string> names;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    auto o = read_observable(obs[i], child("/observables", i));
    if (!names.insert(o.name).second) fail(child(child("/observables", i), "name"), "duplicate name '" + o.name + "'");
    c.observables.push_back(std::move(o));
  }

  if (root.contains("sequence")) {
    const auto& seq = root["sequence"];
    if (!seq.is_array()) fail("/sequence", "expected an array of observable names");
    std::vector<std::string> refs;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      auto name = read_string(seq[i], child("/sequence", i));
      if (!names.contains(name)) fail(child("/sequence", i), "unknown observable '" + name + "'");
      refs.push_back(std::move(name));
    }
    c.sequence = std::move(refs);
  }
  if (root.contains("final")) {
    c.final_observable = read_string(root["final"], "/final");
    if (!names.contains(*c.final_observable)) fail("/final", "unknown observable '" + *c.final_observable + "'");
  }
  if (root.contains("trials")) c.trials = read_unsigned(root["trials"], "/trials");
  if (root.contains("seed")) c.seed = read_unsigned(root["seed"], "/seed");
  if (root.contains("time_labels")) {
    const auto& t = root["time_labels"];
    if (!t.is_array() || t.size() != 2) fail("/time_labels", "expected two labels");
    c.time_labels = {read_string(t[0], "/time_labels/0"), read_string(t[1], "/time_labels/1")};
  }
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), "cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

json to_json(const ScenarioConfig& c) {
  json j = json::object();
  if (c.name) j["name"] = *c.name;
  if (c.description) j["description"] = *c.description;
  j["dim"] = c.dim;
  j["pre"] = state_json(c.pre);
  j["post"] = state_json(c.post);
  json obs = json::array();
  for (const auto& o : c.observables) obs.push_back(observable_json(o));
  j["observables"] = std::move(obs);
  if (c.sequence) j["sequence"] = *c.sequence;
  if (c.final_observable) j["final"] = *c.final_observable;
  if (c.trials) j["trials"] = *c.trials;
  if (c.seed) j["seed"] = *c.seed;
  if (c.time_labels) j["time_labels"] = json::array({c.time_labels->first, c.time_labels->second});
  return j;
}

Scenario build_scenario(const ScenarioConfig& c) {
  auto pre = build_state(c.pre, c.dim, "/pre");
  auto post = build_state(c.post, c.dim, "/post");
  std::optional<PrePostContext::TimeLabels> labels;
  if (c.time_labels) labels = *c.time_labels;
  PrePostContext ctx(std::move(pre), std::move(post), std::move(labels));

  std::vector<Observable> observables;
  for (std::size_t i = 0; i < c.observables.size(); ++i) {
    observables.push_back(build_observable(c.observables[i], c.dim, child("/observables", i)));
  }
  auto find = [&](const std::string& name) -> const Observable& {
    for (const auto& o : observables) {
      if (o.name() == name) return o;
    }
    fail("/observables", "no observable named '" + name + "'");
  };

  std::vector<Observable> seq;
  if (c.sequence) {
    if (c.sequence->size() > kMaxSequenceLength) {
      fail("/sequence", "longer than " + std::to_string(kMaxSequenceLength));
    }
    for (const auto& name : *c.sequence) seq.push_back(find(name));
  }
  Observable final_obs = c.final_observable ? find(*c.final_observable)
                                            : projector_observable(Projector::onto(ctx.post()), "post-selection");
  return Scenario{std::move(ctx), std::move(observables), MeasurementSequence(std::move(seq)), std::move(final_obs)};
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t value) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << value;
  return os.str();
}

std::uint64_t config_digest(const ScenarioConfig& config) { return fnv1a64(to_json(config).dump()); }

}  // namespace abl::cli
