#include "optdual/scenario.hpp"

#include "optdual/doob.hpp"
#include "optdual/errors.hpp"
#include "optdual/processes.hpp"
#include "optdual/sampling.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace optdual {

using nlohmann::json;

namespace {

template <typename Map>
auto lookup(Map const &m, std::string const &name, std::string_view what) -> typename Map::mapped_type const &
{
  auto it = m.find(name);
  if (it == m.end()) {
    throw ValidationError(fmt::format("no {} named '{}'", what, name), {{"name", name}});
  }
  return it->second;
}

auto number(json const &j, std::string_view where) -> double
{
  if (j.is_string() && (j == "inf" || j == "infinity")) { return std::numeric_limits<double>::infinity(); }
  if (!j.is_number()) { throw ValidationError(fmt::format("{}: expected a number", where)); }
  double const v = j.get<double>();
  if (!std::isfinite(v)) { throw ValidationError(fmt::format("{}: value is not finite", where)); }
  return v;
}

auto finite(json const &j, std::string_view where) -> double
{
  double const v = number(j, where);
  if (!std::isfinite(v)) { throw ValidationError(fmt::format("{}: value is not finite", where)); }
  return v;
}

auto read_vector(json const &j, int atoms, std::string const &where) -> RandVar
{
  if (!j.is_array() || static_cast<int>(j.size()) != atoms) {
    throw ValidationError(fmt::format("{}: expected {} values, one per atom", where, atoms), {{"name", where}});
  }
  RandVar v(atoms);
  for (int a = 0; a < atoms; ++a) { v[a] = finite(j[static_cast<std::size_t>(a)], where); }
  return v;
}

// time-major rows in the file, atoms x times in memory
auto read_matrix(json const &j, int atoms, int times, std::string const &where) -> Eigen::MatrixXd
{
  if (!j.is_array() || static_cast<int>(j.size()) != times) {
    throw ValidationError(fmt::format("{}: expected {} time slices", where, times), {{"name", where}});
  }
  Eigen::MatrixXd m(atoms, times);
  for (int t = 0; t < times; ++t) {
    m.col(t) = read_vector(j[static_cast<std::size_t>(t)], atoms, fmt::format("{} at slice {}", where, t));
  }
  return m;
}

auto write_matrix(Eigen::MatrixXd const &m) -> json
{
  json out = json::array();
  for (int t = 0; t < m.cols(); ++t) {
    json row = json::array();
    for (int a = 0; a < m.rows(); ++a) { row.push_back(m(a, t)); }
    out.push_back(std::move(row));
  }
  return out;
}

auto write_vector(RandVar const &v) -> json { return std::vector<double>(v.data(), v.data() + v.size()); }

void only_keys(json const &j, std::set<std::string> const &allowed, std::string_view where)
{
  for (auto const &[key, _] : j.items()) {
    if (!allowed.contains(key)) {
      throw ValidationError(fmt::format("{}: unknown field '{}'", where, key), {{"field", key}});
    }
  }
}

auto read_space(json const &j) -> FilteredSpace
{
  if (!j.is_object()) { throw ValidationError("space: expected an object"); }
  only_keys(j, {"atoms", "prob", "horizon", "filtration"}, "space");
  for (auto const *key : {"atoms", "prob", "filtration"}) {
    if (!j.contains(key)) { throw ValidationError(fmt::format("space: missing field '{}'", key)); }
  }
  auto const atoms = j.at("atoms").get<std::vector<std::string>>();
  std::vector<double> prob;
  for (auto const &p : j.at("prob")) { prob.push_back(finite(p, "space.prob")); }

  auto const &filt = j.at("filtration");
  if (!filt.is_array()) { throw ValidationError("space.filtration: expected a list of partitions"); }
  if (j.contains("horizon") && j.at("horizon").get<int>() + 1 != static_cast<int>(filt.size())) {
    throw ValidationError(fmt::format("space: horizon {} needs {} partitions, {} given", j.at("horizon").get<int>(),
                                      j.at("horizon").get<int>() + 1, filt.size()));
  }
  std::map<std::string, int> index;
  for (std::size_t a = 0; a < atoms.size(); ++a) { index.emplace(atoms[a], static_cast<int>(a)); }
  std::vector<Partition> parts;
  for (std::size_t t = 0; t < filt.size(); ++t) {
    std::vector<std::vector<int>> blocks;
    for (auto const &block : filt[t]) {
      std::vector<int> b;
      for (auto const &label : block) {
        auto it = index.find(label.get<std::string>());
        if (it == index.end()) {
          throw ValidationError(fmt::format("space.filtration at t={}: unknown atom '{}'", t, label.get<std::string>()),
                                {{"t", t}, {"atom", label}});
        }
        b.push_back(it->second);
      }
      blocks.push_back(std::move(b));
    }
    try {
      parts.emplace_back(static_cast<int>(atoms.size()), std::move(blocks));
    } catch (ValidationError const &e) {
      json w = e.witness();
      w["t"] = t;
      throw ValidationError(fmt::format("space.filtration at t={}: {}", t, e.what()), w);
    }
  }
  return FilteredSpace(atoms, prob, std::move(parts));
}

auto read_process(json const &j, FilteredSpace const &space, std::string const &name) -> ScenarioProcess
{
  int const       n = space.atom_count(), T = space.horizon();
  ScenarioProcess p;
  json const     *values = &j;
  if (j.is_object()) {
    only_keys(j, {"values", "adapted", "martingale", "decomposition"}, fmt::format("process '{}'", name));
    if (!j.contains("values")) { throw ValidationError(fmt::format("process '{}': missing field 'values'", name)); }
    values       = &j.at("values");
    p.adapted    = j.value("adapted", false);
    p.martingale = j.value("martingale", false);
    if (j.contains("decomposition")) {
      auto const &d = j.at("decomposition");
      only_keys(d, {"M", "A"}, fmt::format("process '{}' decomposition", name));
      p.decomposition = ClaimedDecomposition{read_matrix(d.at("M"), n, T + 1, fmt::format("process '{}' M", name)),
                                             read_matrix(d.at("A"), n, T + 1, fmt::format("process '{}' A", name))};
    }
  }
  p.values = read_matrix(*values, n, T + 1, fmt::format("process '{}'", name));
  if (p.adapted || p.martingale) {
    for (int t = 0; t <= T; ++t) {
      double const defect = measurability_defect(space, p.values.col(t), space.partition(t));
      if (defect > 1e-12) {
        throw ValidationError(fmt::format("process '{}' is declared adapted but is not F_{}-measurable", name, t),
                              {{"process", name}, {"t", t}, {"defect", defect}});
      }
    }
  }
  return p;
}

auto read_measure(json const &j, FilteredSpace const &space, std::string const &name) -> ScenarioMeasure
{
  int const where_n = space.atom_count(), T = space.horizon();
  if (!j.is_object()) { throw ValidationError(fmt::format("measure '{}': expected an object", name)); }
  only_keys(j, {"u", "utilde", "class"}, fmt::format("measure '{}'", name));
  ScenarioMeasure m;
  m.pair.u = read_matrix(j.at("u"), where_n, T + 1, fmt::format("measure '{}' u", name));
  m.pair.utilde = j.contains("utilde") ? read_matrix(j.at("utilde"), where_n, T, fmt::format("measure '{}' utilde", name))
                                       : Eigen::MatrixXd::Zero(where_n, T);
  std::string const cls = j.value("class", "optional");
  if (cls == "optional") {
    m.kind = MeasureClass::optional;
  } else if (cls == "raw") {
    m.kind = MeasureClass::raw;
  } else {
    throw ValidationError(fmt::format("measure '{}': class must be 'optional' or 'raw'", name));
  }
  return m;
}

} // namespace

auto Scenario::process(std::string const &name) const -> ScenarioProcess const &
{
  return lookup(processes, name, "process");
}

auto Scenario::measure(std::string const &name) const -> ScenarioMeasure const &
{
  return lookup(measures, name, "measure");
}

auto Scenario::norm(std::string const &name) const -> SeminormSpec const & { return lookup(norms, name, "norm"); }

auto Scenario::variable(std::string const &name) const -> RandVar const &
{
  return lookup(variables, name, "random variable");
}

auto spec_from_json(json const &j) -> SeminormSpec
{
  if (!j.is_object() || !j.contains("kind")) { throw ValidationError("norm: expected an object with a 'kind'"); }
  std::string const kind = j.at("kind").get<std::string>();
  try {
    if (kind == "lp") {
      only_keys(j, {"kind", "p"}, "norm");
      return SeminormSpec::lp(number(j.at("p"), "norm p"));
    }
    if (kind == "orlicz") {
      only_keys(j, {"kind", "young", "p"}, "norm");
      std::string const young = j.at("young").get<std::string>();
      if (young == "power") { return SeminormSpec::orlicz(YoungFunction::power(finite(j.at("p"), "norm p"))); }
      if (young == "exp") { return SeminormSpec::orlicz(YoungFunction::exponential()); }
      throw ValidationError(fmt::format("norm: unknown Young function '{}'", young));
    }
    if (kind == "spectral") {
      only_keys(j, {"kind", "gamma", "table"}, "norm");
      if (j.contains("table")) { return SeminormSpec::spectral(Distortion::tabulated(j.at("table").get<std::vector<double>>())); }
      return SeminormSpec::spectral(finite(j.at("gamma"), "norm gamma"));
    }
  } catch (ValidationError const &) {
    throw;
  } catch (std::exception const &e) {
    throw ValidationError(fmt::format("norm: {}", e.what()));
  }
  throw ValidationError(fmt::format("norm: unknown kind '{}'", kind));
}

auto spec_to_json(SeminormSpec const &spec) -> json
{
  return std::visit(
    [](auto const &f) -> json {
      using F = std::decay_t<decltype(f)>;
      if constexpr (std::is_same_v<F, LpNorm>) {
        return std::isinf(f.p) ? json{{"kind", "lp"}, {"p", "inf"}} : json{{"kind", "lp"}, {"p", f.p}};
      } else if constexpr (std::is_same_v<F, OrliczNorm>) {
        if (f.young.kind() == YoungFunction::Kind::exponential) { return {{"kind", "orlicz"}, {"young", "exp"}}; }
        return {{"kind", "orlicz"}, {"young", "power"}, {"p", f.young.exponent()}};
      } else {
        if (auto g = f.sigma.gamma()) { return {{"kind", "spectral"}, {"gamma", *g}}; }
        return {{"kind", "spectral"}, {"table", f.sigma.table()}};
      }
    },
    spec.family());
}

auto scenario_from_json(json const &j) -> Scenario
{
  if (!j.is_object()) { throw ValidationError("scenario: expected a JSON object"); }
  only_keys(j, {"space", "processes", "measures", "norms", "variables", "metadata"}, "scenario");
  if (!j.contains("space")) { throw ValidationError("scenario: missing field 'space'"); }
  Scenario s{read_space(j.at("space")), {}, {}, {}, {}, {}, {}};

  std::set<std::string> names;
  auto claim = [&](std::string const &name) {
    if (!names.insert(name).second) {
      throw ValidationError(fmt::format("name '{}' is used twice", name), {{"name", name}});
    }
  };
  auto section = [&](char const *key) -> json const & {
    static json const empty = json::object();
    if (!j.contains(key)) { return empty; }
    if (!j.at(key).is_object()) { throw ValidationError(fmt::format("{}: expected an object of named entries", key)); }
    return j.at(key);
  };
  for (auto const &[name, v] : section("processes").items()) {
    claim(name);
    s.processes.emplace(name, read_process(v, s.space, name));
  }
  for (auto const &[name, v] : section("measures").items()) {
    claim(name);
    s.measures.emplace(name, read_measure(v, s.space, name));
  }
  for (auto const &[name, v] : section("norms").items()) {
    claim(name);
    try {
      s.norms.emplace(name, spec_from_json(v));
    } catch (ValidationError const &e) {
      throw ValidationError(fmt::format("norm '{}': {}", name, e.what()), {{"name", name}});
    }
  }
  for (auto const &[name, v] : section("variables").items()) {
    claim(name);
    s.variables.emplace(name, read_vector(v, s.space.atom_count(), fmt::format("random variable '{}'", name)));
  }
  if (j.contains("metadata")) {
    auto const &meta = j.at("metadata");
    only_keys(meta, {"seed", "description"}, "metadata");
    s.description = meta.value("description", "");
    if (meta.contains("seed")) { s.seed = meta.at("seed").get<std::uint64_t>(); }
  }
  return s;
}

auto to_json(Scenario const &s) -> json
{
  auto const &space = s.space;
  json        filt  = json::array();
  for (auto const &part : space.filtration()) {
    json blocks = json::array();
    for (auto const &block : part.blocks) {
      json b = json::array();
      for (int a : block) { b.push_back(space.atoms()[static_cast<std::size_t>(a)]); }
      blocks.push_back(std::move(b));
    }
    filt.push_back(std::move(blocks));
  }
  json out;
  out["space"] = {{"atoms", space.atoms()}, {"prob", write_vector(space.prob())}, {"horizon", space.horizon()},
                  {"filtration", filt}};
  out["processes"] = json::object();
  for (auto const &[name, p] : s.processes) {
    json e = {{"values", write_matrix(p.values)}, {"adapted", p.adapted}, {"martingale", p.martingale}};
    if (p.decomposition) { e["decomposition"] = {{"M", write_matrix(p.decomposition->M)}, {"A", write_matrix(p.decomposition->A)}}; }
    out["processes"][name] = std::move(e);
  }
  out["measures"] = json::object();
  for (auto const &[name, m] : s.measures) {
    out["measures"][name] = {{"u", write_matrix(m.pair.u)},
                             {"utilde", write_matrix(m.pair.utilde)},
                             {"class", m.kind == MeasureClass::optional ? "optional" : "raw"}};
  }
  out["norms"] = json::object();
  for (auto const &[name, spec] : s.norms) { out["norms"][name] = spec_to_json(spec); }
  out["variables"] = json::object();
  for (auto const &[name, v] : s.variables) { out["variables"][name] = write_vector(v); }
  out["metadata"] = {{"description", s.description}};
  if (s.seed) { out["metadata"]["seed"] = *s.seed; }
  return out;
}

auto parse_scenario(std::string const &text) -> Scenario
{
  std::vector<std::set<std::string>> keys;
  auto                               reject_duplicates = [&](int, json::parse_event_t event, json &parsed) {
    if (event == json::parse_event_t::object_start) {
      keys.emplace_back();
    } else if (event == json::parse_event_t::object_end) {
      keys.pop_back();
    } else if (event == json::parse_event_t::key) {
      auto const k = parsed.get<std::string>();
      if (!keys.back().insert(k).second) {
        throw ValidationError(fmt::format("duplicate name '{}'", k), {{"name", k}});
      }
    }
    return true;
  };
  json j;
  try {
    j = json::parse(text, reject_duplicates);
  } catch (json::parse_error const &e) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ValidationError(fmt::format("parse error at line {}, column {}: {}", line, column, e.what()),
                          {{"line", line}, {"column", column}});
  }
  try {
    return scenario_from_json(j);
  } catch (json::exception const &e) {
    throw ValidationError(fmt::format("scenario: {}", e.what()));
  }
}

auto load_scenario(std::filesystem::path const &path) -> Scenario
{
  std::ifstream in(path);
  if (!in) { throw ValidationError(fmt::format("cannot open '{}'", path.string()), {{"path", path.string()}}); }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

auto random_scenario(RandomScenarioOptions const &opt) -> Scenario
{
  if (opt.atoms < 1 || opt.horizon < 0 || opt.branching < 1) {
    throw ValidationError("random scenario needs atoms >= 1, horizon >= 0, branching >= 1");
  }
  if (!opt.allow_large && (opt.atoms > kMaxRandomAtoms || opt.horizon > kMaxRandomHorizon)) {
    throw ValidationError(fmt::format("random scenario exceeds the default bounds (atoms <= {}, horizon <= {}); "
                                      "enumerations may be too large, override to proceed",
                                      kMaxRandomAtoms, kMaxRandomHorizon),
                          {{"atoms", opt.atoms}, {"horizon", opt.horizon}});
  }
  Rng                                    rng(derive_seed(opt.seed, "scenario"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int const                              n = opt.atoms, T = opt.horizon;

  std::vector<std::string> labels;
  for (int a = 0; a < n; ++a) { labels.push_back(fmt::format("w{}", a)); }
  std::vector<double> prob(static_cast<std::size_t>(n));
  double              total = 0.0;
  for (auto &p : prob) {
    p = 0.5 + unit(rng);
    total += p;
  }
  for (auto &p : prob) { p /= total; }

  auto merge = [&](std::vector<std::vector<int>> blocks) {
    std::shuffle(blocks.begin(), blocks.end(), rng);
    std::uniform_int_distribution<int> group(1, opt.branching);
    std::vector<std::vector<int>>      out;
    for (std::size_t i = 0; i < blocks.size();) {
      std::vector<int> merged;
      for (int k = group(rng); k > 0 && i < blocks.size(); --k, ++i) {
        merged.insert(merged.end(), blocks[i].begin(), blocks[i].end());
      }
      out.push_back(std::move(merged));
    }
    return out;
  };
  std::vector<std::vector<int>> blocks;
  for (int a = 0; a < n; ++a) { blocks.push_back({a}); }
  // F_T is coarser than the atoms half of the time
  if (T > 0 && unit(rng) < 0.5) { blocks = merge(blocks); }
  std::vector<Partition> parts(static_cast<std::size_t>(T + 1));
  for (int t = T; t >= 1; --t) {
    parts[static_cast<std::size_t>(t)] = Partition(n, blocks);
    blocks                             = merge(blocks);
  }
  parts[0] = Partition::trivial(n);

  Scenario s{FilteredSpace(labels, prob, std::move(parts)), {}, {}, {}, {}, {}, opt.seed};
  s.description = fmt::format("random scenario: {} atoms, horizon {}, seed {}", n, T, opt.seed);
  auto const &space = s.space;

  s.processes["y"] = {random_process(rng, n, T), false, false, std::nullopt};
  s.processes["x"] = {random_adapted(rng, space), true, false, std::nullopt};
  s.processes["m"] = {random_martingale(rng, space), true, true, std::nullopt};
  Process const z  = random_supermartingale(rng, space);
  auto const    d  = doob_decompose(space, z);
  s.processes["z"] = {z, true, false, ClaimedDecomposition{d.M, d.A}};

  MeasurePair raw = MeasurePair::zero(space);
  raw.u           = random_process(rng, n, T);
  if (T > 0) { raw.utilde = random_process(rng, n, T - 1); }
  s.measures["nu"] = {raw, MeasureClass::raw};
  MeasurePair opt_pair = MeasurePair::zero(space);
  opt_pair.u           = random_process(rng, n, T);
  if (T > 0) { opt_pair.utilde = random_process(rng, n, T - 1); }
  s.measures["mu"] = {project_measures(space, opt_pair), MeasureClass::optional};

  s.norms.emplace("l1", SeminormSpec::lp(1));
  s.norms.emplace("l2", SeminormSpec::lp(2));
  s.norms.emplace("linf", SeminormSpec::lp(std::numeric_limits<double>::infinity()));
  s.norms.emplace("orlicz-power", SeminormSpec::orlicz(YoungFunction::power(2)));
  s.norms.emplace("orlicz-exp", SeminormSpec::orlicz(YoungFunction::exponential()));
  s.norms.emplace("spectral", SeminormSpec::spectral(0.5));

  s.variables["xi"]  = random_randvar(rng, n);
  s.variables["eta"] = random_randvar(rng, n);
  return s;
}

auto sha256_hex(std::string const &bytes) -> std::string
{
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int  len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string out;
  for (unsigned int i = 0; i < len; ++i) { out += fmt::format("{:02x}", md[i]); }
  return out;
}

auto digest(Scenario const &s) -> std::string { return sha256_hex(to_json(s).dump()); }

} // namespace optdual
