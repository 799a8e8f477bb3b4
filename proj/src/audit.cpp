#include "sufaudit/audit.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "sufaudit/errors.hpp"

namespace sufaudit {

namespace {

using Path = std::filesystem::path;

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

void allow_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) bad(where, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) bad(where, "unknown key '" + k + "'");
  }
}

std::string get_string(const Json& v, const std::string& where) {
  if (!v.is_string()) bad(where, "expected a string");
  return v.get<std::string>();
}

double get_number(const Json& v, const std::string& where) {
  if (!v.is_number()) bad(where, "expected a number");
  return v.get<double>();
}

std::uint64_t get_unsigned(const Json& v, const std::string& where) {
  if (!v.is_number_unsigned()) bad(where, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::vector<std::string> get_strings(const Json& v, const std::string& where) {
  if (!v.is_array()) bad(where, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_string(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::optional<std::string> optional_string(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return get_string(obj.at(key), where + "." + key);
}

Path resolve(const Path& base, const std::string& p) {
  const Path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::string read_file(const Path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RoleBinding parse_roles(const Json& r) {
  const std::string where = "roles";
  allow_keys(r, where,
             {"treatment", "macro_pre", "macro_post", "wellbeing_pre", "wellbeing_post", "instrument", "covariates",
              "confounders"});
  RoleBinding b;
  if (!r.contains("treatment")) bad(where, "missing 'treatment'");
  b.treatment = get_string(r.at("treatment"), where + ".treatment");
  b.macro_pre = optional_string(r, "macro_pre", where);
  b.macro_post = optional_string(r, "macro_post", where);
  b.wellbeing_pre = optional_string(r, "wellbeing_pre", where);
  b.wellbeing_post = optional_string(r, "wellbeing_post", where);
  b.instrument = optional_string(r, "instrument", where);
  if (r.contains("covariates")) b.covariates = get_strings(r.at("covariates"), where + ".covariates");
  if (r.contains("confounders")) {
    const Json& c = r.at("confounders");
    const std::string cw = where + ".confounders";
    allow_keys(c, cw, {"selection", "independence", "macro", "wellbeing"});
    if (c.contains("selection")) b.confounders.selection = get_strings(c.at("selection"), cw + ".selection");
    if (c.contains("independence")) b.confounders.independence = get_strings(c.at("independence"), cw + ".independence");
    if (c.contains("macro")) b.confounders.macro = get_strings(c.at("macro"), cw + ".macro");
    if (c.contains("wellbeing")) b.confounders.wellbeing = get_strings(c.at("wellbeing"), cw + ".wellbeing");
  }
  return b;
}

void parse_estimator(const Json& e, AuditOptions& o) {
  const std::string where = "estimator";
  allow_keys(e, where,
             {"method", "clip", "epsilon", "epsilon_pop", "weak_instrument", "alpha", "harm_mode",
              "max_adjustment_size"});
  try {
    if (e.contains("method")) o.method = adjustment_method_from_string(get_string(e.at("method"), where + ".method"));
    if (e.contains("harm_mode")) o.harm_mode = harm_mode_from_string(get_string(e.at("harm_mode"), where + ".harm_mode"));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& err) {
    bad(where, err.what());
  }
  if (e.contains("clip")) o.estimator.clip = get_number(e.at("clip"), where + ".clip");
  if (e.contains("epsilon")) o.epsilon = get_number(e.at("epsilon"), where + ".epsilon");
  if (e.contains("epsilon_pop")) o.epsilon_pop = get_number(e.at("epsilon_pop"), where + ".epsilon_pop");
  if (e.contains("weak_instrument")) {
    o.estimator.weak_instrument = get_number(e.at("weak_instrument"), where + ".weak_instrument");
  }
  if (e.contains("alpha")) o.alpha = get_number(e.at("alpha"), where + ".alpha");
  if (e.contains("max_adjustment_size")) {
    o.max_adjustment_size = get_unsigned(e.at("max_adjustment_size"), where + ".max_adjustment_size");
  }
  if (!(o.estimator.clip >= 0.0 && o.estimator.clip < 0.5)) bad(where + ".clip", "must lie in [0, 0.5)");
  if (!(o.alpha > 0.0 && o.alpha < 1.0)) bad(where + ".alpha", "must lie in (0, 1)");
  if (!(o.epsilon >= 0.0)) bad(where + ".epsilon", "must be non-negative");
  if (!(o.epsilon_pop >= 0.0)) bad(where + ".epsilon_pop", "must be non-negative");
  if (!(o.estimator.weak_instrument >= 0.0)) bad(where + ".weak_instrument", "must be non-negative");
}

}  // namespace

AuditConfig parse_config(const std::string& text, const Path& base) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(e.what());
  }
  allow_keys(j, "config",
             {"spec_version", "data", "schema", "unit_id", "period", "thresholds", "combine", "roles", "graphs",
              "estimator", "bootstrap", "criteria", "output"});
  if (!j.contains("spec_version")) bad("config", "missing 'spec_version'");
  if (get_string(j.at("spec_version"), "spec_version") != kConfigVersion) {
    bad("spec_version", std::string("unsupported version (expected \"") + kConfigVersion + "\")");
  }

  AuditConfig c;
  if (!j.contains("data")) bad("config", "missing 'data'");
  c.data = resolve(base, get_string(j.at("data"), "data"));

  if (!j.contains("schema")) bad("config", "missing 'schema'");
  const Json& schema = j.at("schema");
  if (!schema.is_object() || schema.empty()) bad("schema", "expected an object of column -> kind");
  for (const auto& [name, kind] : schema.items()) {
    try {
      c.schema.emplace_back(name, column_kind_from_string(get_string(kind, "schema." + name)));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& err) {
      bad("schema." + name, err.what());
    }
  }
  c.unit_id = optional_string(j, "unit_id", "config");
  c.period = optional_string(j, "period", "config");

  if (j.contains("thresholds")) {
    const Json& ts = j.at("thresholds");
    if (!ts.is_array()) bad("thresholds", "expected an array");
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const std::string where = "thresholds[" + std::to_string(i) + "]";
      allow_keys(ts[i], where, {"column", "cutoff", "direction"});
      SufficiencyThreshold t;
      if (!ts[i].contains("column") || !ts[i].contains("cutoff")) bad(where, "needs 'column' and 'cutoff'");
      t.column = get_string(ts[i].at("column"), where + ".column");
      t.cutoff = get_number(ts[i].at("cutoff"), where + ".cutoff");
      if (ts[i].contains("direction")) {
        const std::string d = get_string(ts[i].at("direction"), where + ".direction");
        if (d == "at_or_above") {
          t.direction = SufficiencyDirection::AtOrAbove;
        } else if (d == "below") {
          t.direction = SufficiencyDirection::Below;
        } else {
          bad(where + ".direction", "expected at_or_above or below");
        }
      }
      c.thresholds.push_back(t);
    }
  }

  if (j.contains("combine")) {
    const Json& cs = j.at("combine");
    if (!cs.is_array()) bad("combine", "expected an array");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::string where = "combine[" + std::to_string(i) + "]";
      allow_keys(cs[i], where, {"name", "columns", "combiner"});
      IndicatorCombination comb;
      if (!cs[i].contains("name") || !cs[i].contains("columns")) bad(where, "needs 'name' and 'columns'");
      comb.name = get_string(cs[i].at("name"), where + ".name");
      comb.columns = get_strings(cs[i].at("columns"), where + ".columns");
      if (cs[i].contains("combiner")) {
        const std::string k = get_string(cs[i].at("combiner"), where + ".combiner");
        if (k == "all_of") {
          comb.combiner = Combiner::AllOf;
        } else if (k == "any_of") {
          comb.combiner = Combiner::AnyOf;
        } else {
          bad(where + ".combiner", "expected all_of or any_of");
        }
      }
      c.combine.push_back(comb);
    }
  }

  if (!j.contains("roles")) bad("config", "missing 'roles'");
  c.roles = parse_roles(j.at("roles"));

  if (!j.contains("graphs")) bad("config", "missing 'graphs'");
  const Json& gs = j.at("graphs");
  if (!gs.is_array() || gs.empty()) bad("graphs", "expected a non-empty array");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const std::string where = "graphs[" + std::to_string(i) + "]";
    GraphSource src;
    if (gs[i].is_string()) {
      src.path = resolve(base, gs[i].get<std::string>());
      src.label = src.path.stem().string();
    } else {
      allow_keys(gs[i], where, {"label", "path"});
      if (!gs[i].contains("path")) bad(where, "missing 'path'");
      src.path = resolve(base, get_string(gs[i].at("path"), where + ".path"));
      src.label = gs[i].contains("label") ? get_string(gs[i].at("label"), where + ".label") : src.path.stem().string();
    }
    if (!labels.insert(src.label).second) bad(where, "duplicate graph label '" + src.label + "'");
    c.graphs.push_back(src);
  }

  if (j.contains("estimator")) parse_estimator(j.at("estimator"), c.options);

  if (j.contains("bootstrap")) {
    const Json& b = j.at("bootstrap");
    allow_keys(b, "bootstrap", {"reps", "seed", "threads", "alpha"});
    if (b.contains("reps")) c.options.bootstrap.reps = get_unsigned(b.at("reps"), "bootstrap.reps");
    if (b.contains("threads")) {
      c.options.bootstrap.threads = static_cast<unsigned>(get_unsigned(b.at("threads"), "bootstrap.threads"));
    }
    if (b.contains("alpha")) c.options.bootstrap.alpha = get_number(b.at("alpha"), "bootstrap.alpha");
    if (b.contains("seed")) {
      c.options.bootstrap.seed = get_unsigned(b.at("seed"), "bootstrap.seed");
    } else if (c.options.bootstrap.reps > 0) {
      bad("bootstrap", "'seed' is required when reps > 0");
    }
    if (!(c.options.bootstrap.alpha > 0.0 && c.options.bootstrap.alpha < 1.0)) {
      bad("bootstrap.alpha", "must lie in (0, 1)");
    }
  }

  if (j.contains("criteria")) {
    const auto names = get_strings(j.at("criteria"), "criteria");
    if (names.empty()) bad("criteria", "request at least one criterion");
    c.criteria.clear();
    for (const auto& n : names) c.criteria.push_back(criterion_from_string(n));
  }
  if (j.contains("output") && !j.at("output").is_null()) c.output = resolve(base, get_string(j.at("output"), "output"));
  return c;
}

AuditConfig load_config(const Path& path) {
  const std::string text = read_file(path);
  try {
    return parse_config(text, path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

Dataset prepare_data(const AuditConfig& config) {
  if (!std::filesystem::exists(config.data)) throw DataError("data file '" + config.data.string() + "' not found");
  Dataset d = load_csv(config.data, config.schema, config.unit_id, config.period);
  for (const auto& t : config.thresholds) d = binarize_sufficiency(d, t);
  for (const auto& c : config.combine) d = combine_indicators(d, c.name, c.columns, c.combiner);
  return d;
}

AuditOutcome run_audit(const AuditConfig& config) {
  const Dataset data = prepare_data(config);
  std::vector<CausalGraph> graphs;
  for (const auto& src : config.graphs) {
    if (!std::filesystem::exists(src.path)) throw ConfigError("graph file '" + src.path.string() + "' not found");
    graphs.push_back(parse_graph(read_file(src.path), src.label));
  }

  AuditOutcome out;
  out.report = ensemble_audit(data, config.roles, graphs, config.options, config.criteria);

  Json echo;
  echo["data"] = config.data.filename().string();
  echo["rows"] = data.rows();
  Json schema = Json::object();
  for (const auto& [name, kind] : config.schema) schema[name] = to_string(kind);
  echo["schema"] = schema;
  Json thresholds = Json::array();
  for (const auto& t : config.thresholds) {
    thresholds.push_back({{"column", t.column},
                          {"cutoff", t.cutoff},
                          {"direction", t.direction == SufficiencyDirection::AtOrAbove ? "at_or_above" : "below"}});
  }
  echo["thresholds"] = thresholds;
  Json roles;
  const RoleBinding& r = config.roles;
  auto opt = [](const std::optional<std::string>& s) { return s ? Json(*s) : Json(nullptr); };
  roles["treatment"] = r.treatment;
  roles["macro_pre"] = opt(r.macro_pre);
  roles["macro_post"] = opt(r.macro_post);
  roles["wellbeing_pre"] = opt(r.wellbeing_pre);
  roles["wellbeing_post"] = opt(r.wellbeing_post);
  roles["instrument"] = opt(r.instrument);
  roles["covariates"] = r.covariates;
  roles["confounders"] = {{"selection", r.confounders.selection},
                          {"independence", r.confounders.independence},
                          {"macro", r.confounders.macro},
                          {"wellbeing", r.confounders.wellbeing}};
  echo["roles"] = roles;
  Json graph_echo = Json::array();
  for (const auto& g : graphs) graph_echo.push_back({{"label", g.label()}, {"dsl", g.to_dsl()}});
  echo["graphs"] = graph_echo;

  out.json["report_version"] = kReportVersion;
  out.json["config"] = echo;
  out.json["report"] = to_json(out.report);
  out.summary = summarize(out.json);
  out.exit_code = exit_code(out.report);

  if (config.output) {
    std::ofstream f(*config.output, std::ios::binary);
    if (!f) throw ConfigError("cannot write report to '" + config.output->string() + "'");
    f << out.json.dump(2) << "\n";
  }
  return out;
}

}  // namespace sufaudit
