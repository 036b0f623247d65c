#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "../oracles.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Cli {
  fs::path dir = oracle::temp_dir("cli");

  /// Runs the binary with stdout captured; returns the exit status.
  int run(const std::string& args, std::string* out = nullptr) const {
    const auto captured = dir / "stdout.txt";
    const std::string cmd = std::string(HKGC_CLI_PATH) + " --quiet " + args + " > " + captured.string() + " 2> " +
                            (dir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    if (out) *out = slurp(captured);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  ~Cli() { fs::remove_all(dir); }

  std::string data(const std::string& out = "run") const {
    return "--train-dir " + (dir / "synth").string() + " --test-dir " + (dir / "synth_ind").string() + " --out " +
           (dir / out).string();
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("end to end on synthetic data") {
  Cli cli;
  std::string out;
  REQUIRE(cli.run("--seed 1 --out " + cli.dir.string() + " synth") == 0);
  REQUIRE(fs::exists(cli.dir / "synth_ind" / "test.txt"));

  REQUIRE(cli.run(cli.data() + " ingest", &out) == 0);
  CHECK(json::parse(out)["relations_train"] == 5);

  REQUIRE(cli.run(cli.data() + " --seed 1 mine --iterations 3000", &out) == 0);
  CHECK(fs::file_size(cli.dir / "run" / "rules.tsv") > 0);

  REQUIRE(cli.run(cli.data() + " stats", &out) == 0);
  const auto stats = json::parse(out);
  CHECK(stats["rules"].get<int>() > 0);
  CHECK(stats["a_empty_pct"].get<double>() < 100.0);

  REQUIRE(cli.run(cli.data() + " train --arch rgcn --epochs 2 --hidden 8 --layers 2", &out) == 0);
  CHECK(json::parse(out)["epochs"].size() >= 2);
  CHECK(fs::exists(cli.dir / "run" / "rgcn.ckpt"));
  CHECK(fs::exists(cli.dir / "run" / "train_rgcn.json"));

  REQUIRE(cli.run(cli.data() +
                      " train --arch nbf --epochs 1 --hidden 4 --layers 2 --max-train-queries 20 --max-valid-queries 10",
                  &out) == 0);
  CHECK(json::parse(out)["validation_metric"] == "mrr");

  SUBCASE("eval writes json and csv") {
    const auto metrics = (cli.dir / "m.json").string(), csv = (cli.dir / "m.csv").string();
    REQUIRE(cli.run(cli.data() + " eval --strategy rgcn+nbfnet --runs 2 --max-triples 5 --rgcn " +
                        (cli.dir / "run" / "rgcn.ckpt").string() + " --nbf " + (cli.dir / "run" / "nbf.ckpt").string() +
                        " --metrics-json " + metrics + " --metrics-csv " + csv,
                    &out) == 0);
    const auto j = json::parse(Cli::slurp(metrics));
    CHECK(j["strategy"] == "rgcn+nbfnet");
    CHECK(j["queries"] == 10);
    CHECK(j["runs"] == 2);
    const double mrr = j["overall"]["mrr"]["mean"];
    CHECK(mrr > 0.0);
    CHECK(mrr <= 1.0);
    CHECK(Cli::slurp(csv).rfind("dataset,strategy,setting,band,metric,mean,spread\n", 0) == 0);
    CHECK(json::parse(out) == j);
  }

  SUBCASE("config file and command line precedence") {
    std::ofstream(cli.dir / "run.cfg") << "# evaluation defaults\nruns = 4\nmax_triples = 3\nsetting = reduced50\n"
                                       << "arch = compgcn\n";
    REQUIRE(cli.run(cli.data() + " --config " + (cli.dir / "run.cfg").string() + " eval --runs 2", &out) == 0);
    const auto j = json::parse(out);
    CHECK(j["runs"] == 2);
    CHECK(j["queries"] == 6);
    CHECK(j["setting"] == "reduced50");
    std::ofstream(cli.dir / "bad.cfg") << "runs 4\n";
    CHECK(cli.run(cli.data() + " --config " + (cli.dir / "bad.cfg").string() + " eval") != 0);
  }

  SUBCASE("explain emits dot") {
    std::ifstream test(cli.dir / "synth_ind" / "test.txt");
    std::string h, r, t;
    bool explained = false;
    while (!explained && test >> h >> r >> t) {
      if (cli.run(cli.data() + " explain --query " + h + "," + r + ",? --candidate " + t, &out) == 0) {
        explained = true;
        CHECK(out.find("digraph rig {") != std::string::npos);
        CHECK(out.find("xlabel=\"head\"") != std::string::npos);
        CHECK(out.find(" <= ") != std::string::npos);
        const auto dot = (cli.dir / "x.dot").string();
        REQUIRE(cli.run(cli.data() + " explain --query ?," + r + "," + t + " --candidate " + h + " --dot " + dot) == 0);
        CHECK(Cli::slurp(dot).find("digraph rig {") != std::string::npos);
      }
    }
    CHECK(explained);
    CHECK(cli.run(cli.data() + " explain --query nobody,r,? --candidate b1") != 0);
  }

  SUBCASE("topk ablation") {
    REQUIRE(cli.run(cli.data() + " ablate --sweep topk --values 5,10 --epochs 1 --budget-seconds 0.5 "
                                 "--max-triples 4 --runs 1",
                    &out) == 0);
    CHECK(json::parse(out)["rows"].size() == 2);
    const auto csv = Cli::slurp(cli.dir / "run" / "ablate_topk.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(cli.run(cli.data("fresh") + " ablate --sweep budget --values 0.2 --epochs 1 --max-triples 2 --runs 1") == 0);
    CHECK(fs::exists(cli.dir / "fresh" / "ablate_budget.json"));
  }

  SUBCASE("errors exit non-zero") {
    CHECK(cli.run("") != 0);
    CHECK(cli.run(cli.data() + " eval --strategy magic+shuffle") != 0);
    CHECK(cli.run(cli.data() + " train --arch gat") != 0);
    CHECK(cli.run("--dataset nope --data-root " + cli.dir.string() + " ingest") != 0);
    CHECK(cli.run(cli.data() + " --rules " + (cli.dir / "missing.tsv").string() + " stats") != 0);
  }
}

}
