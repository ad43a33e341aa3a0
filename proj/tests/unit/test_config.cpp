#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "popdyn/config.hpp"
#include "popdyn/experiments.hpp"
#include "popdyn/io.hpp"

using namespace popdyn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("popdyn_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool mentions(const std::vector<std::string>& lines, const std::string& needle) {
  for (const auto& l : lines) {
    if (l.find(needle) != std::string::npos) return true;
  }
  return false;
}

int cli(const std::string& args) {
  const int status = std::system((std::string(POPDYN_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("schema diagnostics") {
    try {
      parse_config(nlohmann::json{{"experiment", "ibm"}, {"bogus", 1}, {"preset", "nope"}});
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(mentions(e.diagnostics(), "bogus"));
      CHECK(mentions(e.diagnostics(), "logistic"));
    }
    CHECK_THROWS_AS(parse_config(nlohmann::json{{"run", {{"horizon", "long"}}}}), ConfigError);
  }

  TEST_CASE("json round trip") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::lookdown;
    cfg.preset = "allen_cahn";
    cfg.seed = 99;
    cfg.params.N = 33.0;
    cfg.run.epsilons = {0.5, 0.25};
    cfg.kernel_gamma_variance = 2.0;
    const nlohmann::json j = to_json(cfg);
    CHECK(to_json(parse_config(j)) == j);
  }

  TEST_CASE("validation") {
    ExperimentConfig cfg;
    auto rep = validate_config(cfg);
    CHECK(rep.ok());
    CHECK(rep.advisories.empty());

    ExperimentConfig same = cfg;
    same.kernel_r_variance = 1.0;
    same.kernel_gamma_variance = 1.0;
    CHECK(mentions(validate_config(same).advisories, "kernel-width"));

    ExperimentConfig crowded = cfg;
    crowded.params.theta = crowded.params.N;
    CHECK(mentions(validate_config(crowded).advisories, "theta/(N eps^d)"));

    ExperimentConfig bad = cfg;
    bad.params.diffusion = -1.0;
    bad.r = 1.5;
    rep = validate_config(bad);
    CHECK(rep.errors.size() == 2);
    CHECK(mentions(rep.errors, "not positive definite"));
  }

  TEST_CASE("plots") {
    const fs::path dir = scratch("plots");
    write_text(dir / "empty.csv", "");
    CHECK_THROWS_WITH(emit_plot(dir / "empty.csv", dir / "empty.svg", {}), "no rows");

    write_csv(dir / "lambda.csv", table_from_columns({"u", "lambda"}, {{0.0, 0.5, 1.0}, {-1.0, 0.2, -3.0}}));
    PlotStyle st;
    st.zero_line = true;
    emit_plot(dir / "lambda.csv", dir / "lambda.svg", st);
    const std::string svg = slurp(dir / "lambda.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("http://www.w3.org/2000/svg") != std::string::npos);

    st.y = {"missing"};
    CHECK_THROWS_WITH(emit_plot(dir / "lambda.csv", dir / "x.svg", st), doctest::Contains("schema mismatch"));
    const Table back = read_csv(dir / "lambda.csv");
    CHECK(back.column("lambda") == std::vector<double>{-1.0, 0.2, -3.0});
  }

  TEST_CASE("experiments are deterministic and replay from the manifest") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::ibm;
    cfg.params.N = 10.0;
    cfg.params.theta = 5.0;
    cfg.run.horizon = 1.0;
    cfg.run.snapshot_every = 0.5;
    cfg.run.initial_count = 50;
    cfg.output = scratch("run_a").string();
    const auto a = run_experiment(cfg);
    cfg.output = scratch("run_b").string();
    cfg.threads = 3;
    const auto b = run_experiment(cfg);
    for (const auto& f : a.files) {
      if (f.ends_with(".csv")) CHECK(slurp(a.directory / f) == slurp(b.directory / f));
    }
    CHECK(a.files.back() == "manifest.json");

    ExperimentConfig replay = load_config(a.directory / "manifest.json");
    replay.output = scratch("run_c").string();
    const auto c = run_experiment(replay);
    CHECK(slurp(a.directory / "mass.csv") == slurp(c.directory / "mass.csv"));
  }

  TEST_CASE("lineage experiment artifacts") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::lineage;
    cfg.preset = "allen_cahn";
    cfg.run.paths = 20;
    cfg.run.horizon = 20.0;
    cfg.run.burn_in = 5.0;
    cfg.output = scratch("lineage").string();
    const auto r = run_experiment(cfg);
    for (const char* f : {"stationary.csv", "occupation.csv", "overlay.svg", "manifest.json"}) {
      CHECK(fs::exists(r.directory / f));
    }
  }

  TEST_CASE("command line exit codes") {
    const fs::path dir = scratch("cli");
    write_text(dir / "bad.json", R"({"experiment": "ibm", "preset": "nope"})");
    CHECK(cli("simulate-ibm --config " + (dir / "bad.json").string()) == 2);
    write_text(dir / "good.json", R"({"experiment": "stability", "preset": "logistic"})");
    CHECK(cli("stability --config " + (dir / "good.json").string() + " --out " + (dir / "out").string()) == 0);
    CHECK(fs::exists(dir / "out" / "manifest.json"));
    CHECK(cli("validate --config " + (dir / "good.json").string()) == 0);
  }
}
