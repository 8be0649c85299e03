#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hoc/experiments.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + HOC_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hoc-cli-" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("run a fixture") {
  const fs::path out = scratch("fixture");
  const fs::path log = fs::temp_directory_path() / "hoc-cli-fixture.log";
  CHECK(run("run --fixture gaussian-x1x2-expmoment --samples 100000 --out \"" + out.string() + "\"", log) == 0);
  REQUIRE(fs::exists(out / "report.json"));
  const auto report = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(report.at("certificates").at("exp_moment").at("constants").contains("c"));
  CHECK(report.at("pass") == true);
  CHECK(fs::exists(out / "tail-korr.csv"));
  CHECK(fs::exists(out / "tail-korr.svg"));
  fs::remove_all(out);
}

TEST_CASE("malformed config exits 2 and writes nothing") {
  const fs::path dir = scratch("bad");
  fs::create_directories(dir);
  const fs::path config = dir / "bad.json";
  std::ofstream(config) << "{\n  \"schema\": \"hoc.experiment/1\",\n  \"kind\": \"certify\"\n  \"seed\": 1\n}\n";
  const fs::path out = dir / "out";
  const fs::path log = dir / "log.txt";
  CHECK(run("run --config \"" + config.string() + "\" --out \"" + out.string() + "\"", log) == 2);
  CHECK_FALSE(fs::exists(out));
  CHECK(slurp(log).find("line 4") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("list-fixtures and the oracle") {
  const fs::path log = fs::temp_directory_path() / "hoc-cli-list.log";
  CHECK(run("list-fixtures", log) == 0);
  const std::string inventory = slurp(log);
  CHECK(inventory.find("gaussian-x1x2-expmoment\t1.1\tREFERENCE") != std::string::npos);
  CHECK(inventory.find("wigner-gaussian-n100") != std::string::npos);

  const fs::path out = scratch("oracle");
  CHECK(run("catalog-oracle gaussian --param 1 --out \"" + out.string() + "\"", log) == 0);
  const auto report = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(report.at("sigma2").get<double>() == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(fs::exists(out / "oracle.csv"));
  fs::remove_all(out);
}

TEST_CASE("shipped example configs parse") {
  const fs::path configs = fs::path(HOC_SOURCE_DIR) / "configs";
  REQUIRE(fs::exists(configs));
  const fs::path log = fs::temp_directory_path() / "hoc-cli-configs.log";
  const fs::path tensor = configs / "tensor-3x2.json";
  const fs::path out = scratch("tensor");
  CHECK(run("tensor-norm --config \"" + tensor.string() + "\" --out \"" + out.string() + "\"", log) == 0);
  CHECK(fs::exists(out / "report.json"));
  fs::remove_all(out);
}

TEST_CASE("every example experiment config validates") {
  std::size_t seen = 0;
  for (const auto& entry : fs::directory_iterator(fs::path(HOC_SOURCE_DIR) / "configs")) {
    if (entry.path().filename() == "tensor-3x2.json") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(hoc::load_config(entry.path()));
    ++seen;
  }
  CHECK(seen >= 6);
}
