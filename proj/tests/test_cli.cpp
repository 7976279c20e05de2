#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ncb/cli.hpp"

using namespace ncb;

namespace {

const std::string kInputs = NCB_CLI_INPUTS;

std::string input(const std::string& name) { return kInputs + "/" + name; }

cli::RunConfig config(const std::string& command, std::vector<std::string> files) {
  cli::RunConfig c;
  c.command = command;
  for (auto& f : files) c.inputs.push_back(input(f));
  c.seed = 3;
  return c;
}

std::string scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "ncb_cli_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("boundary-reps on M_2 lists one boundary class") {
  const auto r = cli::run(config("boundary-reps", {"m2_system.json"}));
  CHECK(r.exit_code == 0);
  const Json& res = r.certificate.at("result");
  CHECK(res.at("boundary_count") == 1);
  CHECK(res.at("classes").size() == 1);
  CHECK(res.at("classes")[0].at("dim") == 2);
}

TEST_CASE("norm-cert on the block example achieves 2 through the 2-dim irrep") {
  const auto r = cli::run(config("norm-cert", {"block_system.json", "block_element.json"}));
  CHECK(r.exit_code == 0);
  const Json& res = r.certificate.at("result");
  CHECK(res.at("achieved").get<double>() == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(res.at("irrep_dim") == 2);
  CHECK(res.at("certificate").at("is_boundary") == true);
  CHECK(res.at("state_level").get<int>() <= 2);
}

TEST_CASE("purity of the tracial state of M_2 is refuted with a witness") {
  const auto r = cli::run(config("purity", {"m2_system.json", "m2_tracial_state.json"}));
  CHECK(r.exit_code == 0);
  const Json& w = r.certificate.at("result").at("witness");
  CHECK(w.at("is_pure") == false);
  CHECK(w.contains("violating_psi"));
}

TEST_CASE("every report embeds the claim, seed, tolerances and status") {
  for (const auto& [cmd, files] : std::vector<std::pair<std::string, std::vector<std::string>>>{
           {"wrange", {"range_query.json"}},
           {"morenz", {"morenz_query.json"}},
           {"recovery-check", {"recovery_query.json"}},
           {"peak-verify", {"block_system.json", "block_element.json"}},
           {"amplify-check", {"block_system.json"}}}) {
    CAPTURE(cmd);
    const auto r = cli::run(config(cmd, files));
    CHECK(r.exit_code == 0);
    CHECK(r.certificate.at("status") == "ok");
    CHECK(r.certificate.at("seed") == 3);
    CHECK(r.certificate.at("tolerances").at("eq") == 1e-9);
    CHECK_FALSE(r.certificate.at("claim").get<std::string>().empty());
  }
  const auto m = cli::run(config("morenz", {"morenz_query.json"})).certificate.at("result");
  CHECK(m.at("reconstruction_residual").get<double>() <= 1e-6);
  CHECK(m.at("terms").size() <= 3);
  CHECK(cli::run(config("amplify-check", {"block_system.json"})).certificate.at("result").at("equal") == true);
  CHECK(cli::run(config("recovery-check", {"recovery_query.json"})).certificate.at("result").at("recovered") ==
        true);
}

TEST_CASE("identical configuration gives byte-identical certificates") {
  auto c = config("morenz", {"morenz_query.json"});
  c.out = scratch("morenz_a.json");
  std::ostringstream out, err;
  REQUIRE(cli::execute(c, out, err) == 0);
  auto d = c;
  d.out = scratch("morenz_b.json");
  REQUIRE(cli::execute(d, out, err) == 0);
  CHECK(slurp(c.out) == slurp(d.out));
  CHECK_FALSE(slurp(cli::summary_path(c.out)).empty());

  auto w = config("boundary-reps", {"block_system.json"});
  w.workers = 2;
  CHECK(cli::run(w).certificate.at("result") == cli::run(config("boundary-reps", {"block_system.json"})).certificate.at("result"));
}

TEST_CASE("exit codes") {
  std::ostringstream out, err;
  const std::string bad = scratch("bad.json");
  std::ofstream(bad) << "{\"ambient_dim\": 2,\n \"generators\": [ {\"rows\":2 \"cols\":2}]}\n";
  cli::RunConfig c;
  c.command = "boundary-reps";
  c.inputs = {bad};
  CHECK(cli::execute(c, out, err) == 1);
  CHECK(err.str().find("bad.json:2:33: parse error") != std::string::npos);

  auto capped = config("morenz", {"morenz_query.json"});
  capped.max_dilation = 1;
  std::ostringstream json;
  CHECK(cli::execute(capped, json, err) == 2);
  CHECK(Json::parse(json.str()).at("status") == "inconclusive");

  CHECK(cli::execute(config("purity", {"m2_system.json"}), out, err) == 1);
  CHECK(cli::execute(config("no-such-command", {}), out, err) == 1);
  auto neg = config("boundary-reps", {"m2_system.json"});
  neg.tol.eq = -1.0;
  CHECK(cli::execute(neg, out, err) == 1);
}

TEST_CASE("seed resolution") {
  CHECK(cli::resolve_seed(5, "9") == 5);
  CHECK(cli::resolve_seed(std::nullopt, "9") == 9);
  CHECK(cli::resolve_seed(std::nullopt, nullptr) == 1);
  CHECK_THROWS_AS(cli::resolve_seed(std::nullopt, "-4"), Error);
  CHECK_THROWS_AS(cli::resolve_seed(std::nullopt, "99999999999999999999999"), Error);
  CHECK(cli::summary_path("out/cert.json") == "out/cert.txt");
  CHECK(cli::summary_path("a.dir/cert") == "a.dir/cert.txt");
}
