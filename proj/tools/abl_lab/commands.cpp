#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "abl/counterfactual.hpp"
#include "abl/serialization.hpp"
#include "abl/simulator.hpp"
#include "scenario.hpp"

namespace abl::cli {

using nlohmann::json;

nlohmann::json to_json(const RunManifest& m) {
  json j = {{"command", m.command}, {"tool", kToolName}, {"tool_version", m.tool_version}, {"outputs", m.outputs}};
  j["config_digest"] = m.config_digest ? json(*m.config_digest) : json(nullptr);
  j["seed"] = m.seed ? json(*m.seed) : json(nullptr);
  return j;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::optional<std::uint64_t> config,
                           const char* env_value) {
  if (flag) return *flag;
  if (config) return *config;
  if (env_value != nullptr && *env_value != '\0') {
    std::string_view text(env_value);
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw ConfigError(std::string(kSeedEnvVar), "not an unsigned 64-bit integer: '" + std::string(text) + "'");
    }
    return value;
  }
  return kDefaultSeed;
}

namespace {

struct Context {
  const Options& options;
  std::ostream& out;
  std::ostream& err;
  RunManifest manifest;
};

std::string fixed6(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

std::string signed6(double v) {
  std::ostringstream os;
  os << std::showpos << std::fixed << std::setprecision(6) << v;
  return os.str();
}

std::string optional6(const std::optional<double>& v) { return v ? fixed6(*v) : "n/a"; }

void print_row(std::ostream& os, std::initializer_list<std::string> cells, std::size_t width = 12) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) os << "  ";
    os << std::left << std::setw(static_cast<int>(width)) << c;
    first = false;
  }
  os << std::right << '\n';
}

std::string describe_state(const StateVector& s) {
  std::ostringstream os;
  os << std::setprecision(6) << '(';
  for (std::size_t i = 0; i < s.dim(); ++i) {
    if (i > 0) os << ", ";
    const auto z = s[i];
    if (z.imag() == 0.0) {
      os << z.real();
    } else {
      os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << 'i';
    }
  }
  os << ')';
  return os.str();
}

struct Loaded {
  ScenarioConfig config;
  Scenario scenario;
};

Loaded load(Context& c) {
  if (!c.options.config) throw ConfigError("--config", "this command requires a scenario file");
  auto config = load_scenario(*c.options.config);
  auto scenario = build_scenario(config);
  c.manifest.config_digest = to_hex(config_digest(config));
  return {std::move(config), std::move(scenario)};
}

std::vector<const Observable*> selected_observables(const Context& c, const Scenario& s) {
  std::vector<const Observable*> out;
  if (c.options.observable) {
    out.push_back(&s.observable(*c.options.observable));
  } else {
    for (const auto& o : s.observables) out.push_back(&o);
  }
  if (out.empty()) throw ConfigError("/observables", "no observables declared");
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
  if (!f) throw std::runtime_error("failed writing " + path);
}

// Writes the machine-readable artifact and its manifest when --out is given,
// and the JSON document to stdout when --json is given.
void emit(Context& c, json result, const std::string& artifact_text = {}) {
  if (c.options.out) {
    c.manifest.outputs.push_back(*c.options.out);
    c.manifest.outputs.push_back(*c.options.out + ".manifest.json");
    write_file(*c.options.out, artifact_text.empty() ? result.dump(2) + "\n" : artifact_text);
    write_file(*c.options.out + ".manifest.json", to_json(c.manifest).dump(2) + "\n");
  }
  if (c.options.json) {
    json doc = {{"manifest", to_json(c.manifest)}, {"result", std::move(result)}};
    c.out << doc.dump(2) << '\n';
  }
}

void print_header(Context& c, const Loaded& l) {
  if (c.options.json) return;
  c.out << "scenario: " << l.config.name.value_or(*c.options.config) << "  (digest " << *c.manifest.config_digest
        << ")\n";
  c.out << "pre  = " << describe_state(l.scenario.ctx.pre()) << "\n";
  c.out << "post = " << describe_state(l.scenario.ctx.post()) << "\n\n";
}

int cmd_abl(Context& c) {
  auto l = load(c);
  print_header(c, l);
  json results = json::array();
  for (const auto* q : selected_observables(c, l.scenario)) {
    const auto abl = abl_distribution(l.scenario.ctx, *q);
    const auto born = born_distribution(l.scenario.ctx.pre(), *q);
    const auto special = classify_special_case(l.scenario.ctx, *q);
    results.push_back({{"observable", q->name()}, {"abl", abl}, {"born", born}, {"special_case", special}});
    if (c.options.json) continue;
    c.out << "observable " << q->name() << "\n";
    print_row(c.out, {"outcome", "eigenvalue", "abl", "born"});
    for (std::size_t k = 0; k < q->size(); ++k) {
      print_row(c.out, {q->outcome(k).label, signed6(q->outcome(k).eigenvalue), fixed6(abl.entries()[k].probability),
                        fixed6(born.entries()[k].probability)});
    }
    c.out << "special case: " << to_string(special) << "\n\n";
  }
  emit(c, json{{"observables", std::move(results)}});
  return kExitOk;
}

int cmd_sequence(Context& c) {
  auto l = load(c);
  print_header(c, l);
  const auto& seq = l.scenario.sequence;
  const auto dist = abl_sequence_distribution(l.scenario.ctx, seq);
  const auto paths = sequence_path_weights(l.scenario.ctx, seq);
  const double survival = sim::postselection_survival(l.scenario.ctx, seq);
  if (!c.options.json) {
    c.out << "sequence:";
    for (const auto& q : seq.observables()) c.out << ' ' << q.name();
    c.out << "\n";
    print_row(c.out, {"outcomes", "path weight", "abl"}, 16);
    for (std::size_t i = 0; i < dist.size(); ++i) {
      const auto& e = dist.entries()[i];
      print_row(c.out, {e.outcome.empty() ? "()" : join_labels(e.outcome), fixed6(paths[i].probability),
                        fixed6(e.probability)},
                16);
    }
    c.out << "post-selection survival with sequence performed: " << fixed6(survival) << "\n";
  }
  json names = json::array();
  for (const auto& q : seq.observables()) names.push_back(q.name());
  emit(c, json{{"sequence", std::move(names)}, {"abl", dist}, {"postselection_survival", survival}});
  return kExitOk;
}

int cmd_simulate(Context& c) {
  auto l = load(c);
  const auto trials = c.options.trials ? c.options.trials : l.config.trials;
  if (!trials) throw ConfigError("/trials", "simulate needs a trial count (config 'trials' or --trials)");
  if (*trials == 0) throw ConfigError("/trials", "must be positive");
  if (*trials > sim::kMaxTrials) throw ConfigError("/trials", "exceeds " + std::to_string(sim::kMaxTrials));
  const auto seed = resolve_seed(c.options.seed, l.config.seed, std::getenv(std::string(kSeedEnvVar).c_str()));
  c.manifest.seed = seed;

  const auto& s = l.scenario;
  const auto report = sim::run_trials(s.ctx, s.sequence, s.final_observable, *trials, seed, c.options.threads);
  const auto survival = sim::postselection_survival(s.ctx, s.sequence);

  json result = {{"report", report}};
  std::optional<sim::ComparisonTable> table;
  if (report.postselected_outcome) {
    table = sim::frequency_vs_abl(report, s.ctx, s.sequence);
    result["comparison"] = *table;
  }
  result["postselection_survival"] = survival;

  if (!c.options.json) {
    print_header(c, l);
    c.out << "trials " << report.trials << ", seed " << report.seed << ", final observable "
          << s.final_observable.name() << "\n";
    for (const auto& [label, count] : report.subensemble_counts) {
      c.out << "  " << std::left << std::setw(12) << label << std::right << count << "  ("
            << fixed6(static_cast<double>(count) / static_cast<double>(report.trials)) << ")\n";
    }
    if (table) {
      c.out << "post-selected outcome '" << table->postselected_outcome << "': " << table->postselected_count
            << " trials; exact survival " << fixed6(survival) << "\n";
      print_row(c.out, {"intermediate", "count", "frequency", "abl", "std.err", "z", "flag"});
      for (const auto& r : table->rows) {
        print_row(c.out, {r.intermediate.empty() ? "()" : join_labels(r.intermediate), std::to_string(r.count),
                          fixed6(r.frequency), fixed6(r.abl), fixed6(r.standard_error),
                          r.flag == sim::RowFlag::kEmpty ? "n/a" : signed6(r.z), std::string(to_string(r.flag))});
      }
      if (table->max_abs_z() > 4.0) {
        c.out << "WARN: |z| = " << fixed6(table->max_abs_z()) << " exceeds 4 standard errors\n";
      }
      if (table->any_flagged()) c.out << "WARN: flagged rows (low or empty post-selected subensemble)\n";
    } else {
      c.out << "no final outcome matches the post-selected state; comparison skipped\n";
    }
  }
  emit(c, std::move(result));
  return kExitOk;
}

int cmd_scan(Context& c) {
  const auto scan = c.options.sphere ? counterfactual::discrepancy_scan_sphere(c.options.steps)
                                     : counterfactual::discrepancy_scan(c.options.steps);
  std::ostringstream csv;
  counterfactual::write_scan_csv(csv, scan);

  std::size_t special = 0;
  double special_max = 0.0;
  for (const auto& cell : scan.cells) {
    if (cell.result.special_case) {
      ++special;
      special_max = std::max(special_max, std::abs(cell.result.discrepancy));
    }
  }
  const auto& top = scan.max_cell();
  std::ostringstream summary;
  summary << std::setprecision(12) << "cells=" << scan.cells.size() << " special=" << special
          << " max_special_abs_discrepancy=" << special_max
          << " max_abs_discrepancy=" << std::setprecision(15) << scan.max_abs_discrepancy << std::setprecision(12)
          << " at theta_b=" << top.b.theta() << " phi_b=" << top.b.phi() << " theta_c=" << top.c.theta()
          << " phi_c=" << top.c.phi();

  if (c.options.out) {
    emit(c, json{}, csv.str());
    c.out << summary.str() << '\n';
  } else if (c.options.json) {
    json cells = json::array();
    for (const auto& cell : scan.cells) {
      cells.push_back({{"theta_b", cell.b.theta()},
                       {"phi_b", cell.b.phi()},
                       {"theta_c", cell.c.theta()},
                       {"phi_c", cell.c.phi()},
                       {"result", cell.result}});
    }
    emit(c, json{{"steps", scan.steps},
                 {"sphere", scan.sphere},
                 {"max_abs_discrepancy", scan.max_abs_discrepancy},
                 {"argmax", scan.argmax},
                 {"cells", std::move(cells)}});
  } else {
    c.out << csv.str();
    c.err << summary.str() << '\n';
  }
  return kExitOk;
}

int cmd_worlds(Context& c) {
  auto l = load(c);
  print_header(c, l);
  std::vector<Observable> chosen;
  for (const auto* q : selected_observables(c, l.scenario)) chosen.push_back(*q);
  const auto sets = counterfactual::build_world_sets(l.scenario.ctx, chosen);
  json out = json::array();
  for (const auto& set : sets) {
    out.push_back(set);
    if (c.options.json) continue;
    c.out << "world set {" << set.observable.name() << "}" << (set.defined ? "" : "  UNDEFINED (zero denominator)")
          << "\n";
    print_row(c.out, {"outcome", "P(q|a)", "P(b|q)", "P(q,b|a)", "P_ABL(q|a,b)", "fixed P(b|q)", "disagrees"});
    for (const auto& w : set.worlds) {
      print_row(c.out, {w.label, fixed6(w.forward_weight), optional6(w.standard_post_conditional), fixed6(w.joint),
                        optional6(w.abl_conditional), fixed6(w.fixed_outcome_conditional),
                        w.unity_disagreement ? "yes" : "no"});
    }
    c.out << "\n";
  }
  emit(c, json{{"world_sets", std::move(out)}});
  return kExitOk;
}

int cmd_cotenable(Context& c) {
  auto l = load(c);
  print_header(c, l);
  json out = json::array();
  for (const auto* q : selected_observables(c, l.scenario)) {
    const auto verdict = counterfactual::cotenability(l.scenario.ctx, *q);
    out.push_back({{"observable", q->name()}, {"verdict", verdict}});
    if (c.options.json) continue;
    c.out << std::left << std::setw(12) << q->name() << std::right
          << (verdict.holds ? "cotenable" : "not cotenable (witness: " + *verdict.witness + ")") << "\n";
  }
  emit(c, json{{"cotenability", std::move(out)}});
  return kExitOk;
}

int cmd_threebox(Context& c) {
  const auto report = counterfactual::three_box();
  if (!c.options.json) {
    c.out << "pre  = " << describe_state(report.ctx.pre()) << "\n";
    c.out << "post = " << describe_state(report.ctx.post()) << "\n";
    print_row(c.out, {"observable", "abl yes", "abl no", "born yes", "cotenable"});
    for (const auto& b : report.boxes) {
      const double no = b.abl.size() > 1 ? b.abl.probability("no") : 0.0;
      print_row(c.out, {b.observable.name(), fixed6(b.abl.probability("yes")), fixed6(no), fixed6(b.forward_yes),
                        b.cotenability.holds ? "yes" : "no (" + *b.cotenability.witness + ")"});
    }
  }
  emit(c, json(report));
  return kExitOk;
}

}  // namespace

int run_command(std::string_view command, const Options& options, std::ostream& out, std::ostream& err) {
  static const std::pair<std::string_view, int (*)(Context&)> kCommands[] = {
      {"abl", cmd_abl},   {"sequence", cmd_sequence}, {"simulate", cmd_simulate},   {"scan", cmd_scan},
      {"worlds", cmd_worlds}, {"cotenable", cmd_cotenable}, {"threebox", cmd_threebox},
  };
  RunManifest manifest;
  manifest.command = std::string(command);
  Context c{options, out, err, std::move(manifest)};
  try {
    for (const auto& [name, fn] : kCommands) {
      if (name == command) return fn(c);
    }
    err << "error: unknown command '" << command << "'\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << (options.config ? *options.config + ": " : std::string()) << e.what() << "\n";
    return kExitConfig;
  } catch (const ZeroDenominator& e) {
    err << "error: post-selection unreachable given this measurement (" << e.what() << ")\n";
    return kExitZeroDenominator;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace abl::cli
