#include "optdual/checks.hpp"
#include "optdual/doob.hpp"
#include "optdual/duality.hpp"
#include "optdual/errors.hpp"
#include "optdual/processes.hpp"

#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

using namespace optdual;
using nlohmann::json;

namespace {

auto vec(RandVar const &v) -> json { return std::vector<double>(v.data(), v.data() + v.size()); }

auto time_major(Eigen::MatrixXd const &m) -> json
{
  json out = json::array();
  for (int t = 0; t < m.cols(); ++t) { out.push_back(vec(m.col(t))); }
  return out;
}

auto read_text(std::string const &path) -> std::string
{
  std::ifstream in(path);
  if (!in) { throw ValidationError(fmt::format("cannot open '{}'", path), {{"path", path}}); }
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

auto split_ids(std::string const &s) -> std::vector<std::string>
{
  std::vector<std::string> out;
  std::stringstream        in(s);
  std::string              id;
  while (std::getline(in, id, ',')) {
    if (!id.empty()) { out.push_back(id); }
  }
  return out;
}

auto emit(json const &j) -> void { std::cout << j.dump(2) << "\n"; }

} // namespace

auto main(int argc, char **argv) -> int
{
  CLI::App app{"Optional projections, quotient seminorms and their duals on finite filtered spaces"};
  app.require_subcommand(0, 1);
  bool list = false;
  app.add_flag("--list-checks", list, "List the registered checks and exit");

  std::string file, process, norm, rv, checks = "all", format = "json", output;
  std::uint64_t seed = 1;
  int           samples = 20, max_n = -1;
  double        tol = -1.0;
  bool          predictable = false;

  auto *verify_cmd = app.add_subcommand("verify", "Run checks on a scenario file");
  verify_cmd->add_option("file", file, "Scenario JSON")->required();
  verify_cmd->add_option("--checks", checks, "Comma separated check ids, or all");
  verify_cmd->add_option("--tol", tol, "Tolerance overriding every check default");
  verify_cmd->add_option("--seed", seed, "Seed for sampled instances");
  verify_cmd->add_option("--samples", samples, "Random instances per check")->check(CLI::NonNegativeNumber);
  verify_cmd->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "md"}));

  RandomScenarioOptions ropt;
  auto *random_cmd = app.add_subcommand("random", "Write a random scenario");
  random_cmd->add_option("--atoms", ropt.atoms, "Number of atoms");
  random_cmd->add_option("--horizon", ropt.horizon, "Last time index");
  random_cmd->add_option("--seed", ropt.seed, "Generator seed");
  random_cmd->add_option("--branching", ropt.branching, "Largest number of blocks merged into one");
  random_cmd->add_flag("--allow-large", ropt.allow_large, "Exceed the default size bounds");
  random_cmd->add_option("-o,--output", output, "Output file (stdout when omitted)");

  auto *project_cmd = app.add_subcommand("project", "Optional or predictable projection of a process");
  project_cmd->add_option("file", file)->required();
  project_cmd->add_option("--process", process)->required();
  project_cmd->add_flag("--predictable", predictable, "Predictable projection instead of optional");

  auto *norm_cmd  = app.add_subcommand("norm", "Evaluate a norm on a random variable");
  auto *polar_cmd = app.add_subcommand("polar", "Evaluate the polar of a norm on a random variable");
  for (auto *cmd : {norm_cmd, polar_cmd}) {
    cmd->add_option("file", file)->required();
    cmd->add_option("--norm", norm)->required();
    cmd->add_option("--rv", rv)->required();
  }

  auto *quotient_cmd = app.add_subcommand("quotient", "Quotient seminorm of an adapted process");
  quotient_cmd->add_option("file", file)->required();
  quotient_cmd->add_option("--norm", norm)->required();
  quotient_cmd->add_option("--process", process)->required();

  auto *doob_cmd = app.add_subcommand("doob", "Doob decomposition of an adapted process");
  doob_cmd->add_option("file", file)->required();
  doob_cmd->add_option("--process", process)->required();

  auto *varp_cmd = app.add_subcommand("varp", "Variation of an adapted process along stopping chains");
  varp_cmd->add_option("file", file)->required();
  varp_cmd->add_option("--norm", norm)->required();
  varp_cmd->add_option("--process", process)->required();
  varp_cmd->add_option("--max-n", max_n, "Chain length bound (default: horizon)");

  try {
    app.parse(argc, argv);
  } catch (CLI::CallForHelp const &e) {
    return app.exit(e);
  } catch (CLI::ParseError const &e) {
    app.exit(e);
    return 2;
  }

  try {
    if (list) {
      for (auto const &c : list_checks()) { std::cout << fmt::format("{:<22} {}\n", c.id, c.summary); }
      return 0;
    }
    if (verify_cmd->parsed()) {
      VerifyOptions opt;
      opt.checks  = split_ids(checks);
      opt.seed    = seed;
      opt.samples = samples;
      if (tol >= 0.0) { opt.tol = tol; }
      auto const report = verify_text(read_text(file), opt);
      if (format == "md") {
        std::cout << to_markdown(report);
      } else {
        emit(to_json(report));
      }
      if (report.find("scenario-valid") != nullptr) { return 2; }
      return report.exit_code();
    }
    if (random_cmd->parsed()) {
      if (ropt.allow_large && (ropt.atoms > kMaxRandomAtoms || ropt.horizon > kMaxRandomHorizon)) {
        std::cerr << "warning: enumeration-based checks may exceed their bound on this scenario\n";
      }
      auto const text = to_json(random_scenario(ropt)).dump(2) + "\n";
      if (output.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(output);
        if (!out) { throw ValidationError(fmt::format("cannot write '{}'", output)); }
        out << text;
      }
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cout << app.help();
      return 2;
    }

    auto const sc = load_scenario(file);
    if (project_cmd->parsed()) {
      Process const &y = sc.process(process).values;
      Process const  p = predictable ? predictable_projection(sc.space, y) : optional_projection(sc.space, y);
      emit({{"process", process}, {"projection", predictable ? "predictable" : "optional"}, {"values", time_major(p)}});
    } else if (norm_cmd->parsed() || polar_cmd->parsed()) {
      bool const    is_polar = polar_cmd->parsed();
      auto const   &spec     = sc.norm(norm);
      RandVar const &x       = sc.variable(rv);
      json           out{{"norm", norm}, {"rv", rv}};
      if (is_polar) {
        out["polar"]   = polar(spec, sc.space, x);
        out["witness"] = vec(polar_witness(spec, sc.space, x));
      } else {
        out["value"] = seminorm(spec, sc.space, x);
      }
      emit(out);
    } else if (quotient_cmd->parsed()) {
      auto const q  = quotient_norm(sc.space, sc.norm(norm), sc.process(process).values);
      auto const pt = p_T(sc.norm(norm), sc.space, sc.process(process).values);
      emit({{"norm", norm},
            {"process", process},
            {"p_D", q.value},
            {"p_T", pt.value},
            {"preimage", time_major(q.z)},
            {"lp_status", to_string(q.lp.status)}});
    } else if (doob_cmd->parsed()) {
      Process const &z = sc.process(process).values;
      auto const     d = doob_decompose(sc.space, z);
      auto const     e = decomposition_defects(sc.space, z, d);
      emit({{"process", process},
            {"M", time_major(d.M)},
            {"A", time_major(d.A)},
            {"total_variation_A", vec(d.tv_A)},
            {"defects",
             {{"reconstruction", e.reconstruction},
              {"martingale", e.martingale},
              {"predictable", e.predictable},
              {"initial", e.initial},
              {"uniqueness", e.uniqueness}}}});
    } else if (varp_cmd->parsed()) {
      int const  n   = max_n < 0 ? sc.space.horizon() : max_n;
      auto const v   = var_p(sc.space, sc.norm(norm), sc.process(process).values, n);
      json       seq = json::array();
      for (auto const &tau : v.sequence) { seq.push_back(tau.times()); }
      emit({{"norm", norm}, {"process", process}, {"max_n", n}, {"var", v.value}, {"sequence", seq},
            {"evaluated", v.evaluated}});
    }
    return 0;
  } catch (ValidationError const &e) {
    json err{{"error", e.what()}};
    if (!e.witness().is_null()) { err["witness"] = e.witness(); }
    std::cerr << err.dump() << "\n";
    return 2;
  } catch (EnumerationLimit const &e) {
    std::cerr << json{{"error", e.what()}, {"bound", e.bound()}}.dump() << "\n";
    return 2;
  } catch (std::invalid_argument const &e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 2;
  } catch (std::exception const &e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 1;
  }
}
