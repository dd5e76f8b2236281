#include "doctest.h"

#include "optdual/checks.hpp"
#include "optdual/errors.hpp"
#include "defects.hpp"

#include <fstream>
#include <set>
#include <sstream>

using namespace optdual;
using namespace optdual::test;

namespace {

auto fixture_text() -> std::string
{
  std::ifstream     in(std::string(OPTDUAL_FIXTURES) + "/s4.json");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

auto only(std::string id) -> VerifyOptions
{
  VerifyOptions opt;
  opt.checks = {std::move(id)};
  return opt;
}

} // namespace

TEST_CASE("registry")
{
  auto const            checks = list_checks();
  std::set<std::string> ids;
  for (auto const &c : checks) {
    CHECK(!c.summary.empty());
    ids.insert(c.id);
  }
  CHECK(ids.size() == checks.size());
  CHECK(std::is_sorted(checks.begin(), checks.end(), [](auto const &a, auto const &b) { return a.id < b.id; }));
  auto const s = load_scenario(std::string(OPTDUAL_FIXTURES) + "/s4.json");
  CHECK_THROWS_AS(verify(s, only("no-such-check")), std::invalid_argument);
}

TEST_CASE("fixture passes every check")
{
  auto const report = verify_text(fixture_text(), {});
  CHECK(report.records.size() == list_checks().size());
  for (auto const &r : report.records) {
    INFO(r.check, " ", to_json(r).dump());
    CHECK(r.status == Status::pass);
  }
  CHECK(report.exit_code() == 0);
  auto const *left = report.find("left-limit");
  REQUIRE(left != nullptr);
  CHECK(left->margin == 0.0);
}

TEST_CASE("left limit identity is exact on random scenarios")
{
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto const r = verify(random_scenario({6, 3, seed, 2, false}), only("left-limit"));
    CHECK(r.records.front().status == Status::pass);
    CHECK(r.records.front().margin == 0.0);
  }
}

TEST_CASE("single atom scenario")
{
  auto const r = verify(random_scenario({1, 0, 3, 2, false}), {});
  for (auto const &rec : r.records) {
    INFO(rec.check, " ", to_json(rec).dump());
    CHECK(rec.status != Status::fail);
  }
}

TEST_CASE("planted defects fail with a witness")
{
  auto const s = random_scenario({5, 3, 11, 2, false});
  CHECK(verify(s, {}).exit_code() == 0);
  for (auto const &d : planted_defects(s)) {
    INFO(d.name);
    auto const  report = verify_text(d.text, {});
    CHECK(report.exit_code() == 1);
    auto const *rec = report.find(d.check);
    REQUIRE(rec != nullptr);
    CHECK(rec->status == Status::fail);
    CHECK(rec->witness.is_object());
    CHECK(!rec->witness.empty());
  }
}

TEST_CASE("raw measure planted as optional fails the variational check")
{
  auto j = nlohmann::json::parse(fixture_text());
  j["measures"]["spread"]["class"] = "optional";
  auto const report = verify_text(j.dump(), only("variational"));
  auto const &rec   = report.records.front();
  CHECK(rec.status == Status::fail);
  CHECK(rec.witness["measure"] == "spread");
  CHECK(rec.witness.contains("atom"));
}

TEST_CASE("reports are deterministic")
{
  auto const    s = random_scenario({6, 3, 5, 2, false});
  VerifyOptions opt;
  opt.seed = 9;
  auto const a = verify(s, opt);
  auto const b = verify(s, opt);
  CHECK(report_digest(a) == report_digest(b));
  CHECK(to_json(a, false).dump() == to_json(b, false).dump());
  opt.seed = 10;
  CHECK(report_digest(verify(s, opt)) != report_digest(a));
}

TEST_CASE("tolerance override and rendering")
{
  auto const s   = load_scenario(std::string(OPTDUAL_FIXTURES) + "/s4.json");
  auto       opt = only("orlicz-sandwich");
  opt.tol        = 1e3;
  auto const loose = verify(s, opt);
  CHECK(loose.records.front().status == Status::pass);
  auto const md = to_markdown(verify(s, only("tower")));
  CHECK(md.find("| tower | pass |") != std::string::npos);
  auto const j = to_json(verify(s, only("tower")));
  CHECK(j["records"][0]["check"] == "tower");
  CHECK(j["records"][0].contains("runtime_ms"));
  CHECK(!to_json(verify(s, only("tower")), false)["records"][0].contains("runtime_ms"));
}
