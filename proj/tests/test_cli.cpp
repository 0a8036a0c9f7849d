#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "coprenyi/copula.hpp"
#include "coprenyi/measures.hpp"
#include "coprenyi/marginals.hpp"
#include "coprenyi/quadrature.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace coprenyi;

namespace {

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "coprenyi_cli_tests";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args) {
  const fs::path out_file = work_dir() / "stdout.txt";
  const fs::path err_file = work_dir() / "stderr.txt";
  const std::string cmd = std::string("\"") + COPRENYI_CLI_PATH + "\" " + args +
                          " > " + out_file.string() + " 2> " + err_file.string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

// A trivariate data set drawn from Frank theta=1.3776 and pushed through
// strictly increasing maps, so ranks (and therefore every fit) match the
// copula scale exactly.
fs::path frank_fixture() {
  static fs::path path = [] {
    fs::path p = work_dir() / "frank_724.csv";
    copula::CopulaModel m{copula::Family::Frank, 3, 1.3776};
    std::vector<double> u = copula::sample(m, 724, 101);
    std::ofstream out(p, std::ios::trunc);
    out << "glucose,pressure,mass\n";
    char buf[200];
    for (long r = 0; r < 724; ++r) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n",
                    40.0 + 160.0 * u[r * 3], 50.0 + 70.0 * u[r * 3 + 1],
                    15.0 + 50.0 * u[r * 3 + 2]);
      out << buf;
    }
    return p;
  }();
  return path;
}

}  // namespace

TEST_CASE("measure runs match the library and repeat byte-for-byte", "[cli]") {
  const std::string args =
      "measure --kind mccre --copula-x frank:2:2 --gamma 2 --nodes 48";
  auto a = run_cli(args);
  auto b = run_cli(args);
  REQUIRE(a.exit_code == 0);
  REQUIRE(a.out == b.out);
  REQUIRE(lines_of(a.out).size() == 1);

  auto rec = json::parse(a.out);
  REQUIRE(rec.at("command") == "measure");
  REQUIRE(rec.at("kind") == "mccre");

  measures::MeasureRequest req;
  req.kind = measures::Kind::MCCRE;
  req.gamma = 2.0;
  req.truth_copula = copula::CopulaModel{copula::Family::Frank, 2, 2.0};
  req.distortion = marginals::DistortionProfile::identity(2, marginals::Scale::Cdf);
  req.integration.nodes_per_axis = 48;
  REQUIRE(rec.at("value").get<double>() == measures::evaluate(req).value);
}

TEST_CASE("measure accepts marginal profiles", "[cli]") {
  auto r = run_cli(
      "measure --kind mccri --gamma 2 --copula-x fgm:0.7:2 --copula-y product::2 "
      "--marginals-x exp:1,exp:1 --marginals-y exp:2,exp:2 --nodes 32");
  REQUIRE(r.exit_code == 0);
  auto rec = json::parse(r.out);
  REQUIRE(rec.at("marginals").at("truth") == "exp:1,exp:1");
  REQUIRE(std::isfinite(rec.at("value").get<double>()));
}

TEST_CASE("pretty rendering is plain text", "[cli]") {
  auto r = run_cli("--pretty bounds --gamma 3 --alpha 1 --beta 1 --target mccri");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.find("numeric.lower") != std::string::npos);
  REQUIRE_THROWS(json::parse(r.out));  // aligned table, not a JSON record
}

TEST_CASE("sample then fit round-trips the parameter", "[cli]") {
  const fs::path csv = work_dir() / "gumbel_draws.csv";
  auto s = run_cli("sample --family gumbel --theta 2 --dimension 2 --count 1500 "
                   "--seed 4 --out " + csv.string());
  REQUIRE(s.exit_code == 0);
  {
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    REQUIRE(header == "u1,u2");
  }

  auto fit = run_cli("fit " + csv.string() + " --family gumbel");
  REQUIRE(fit.exit_code == 0);
  auto rec = json::parse(fit.out);
  const double mpl = rec.at("fit").at("theta_hat").get<double>();
  REQUIRE(mpl > 1.85);
  REQUIRE(mpl < 2.15);

  auto tau = run_cli("fit " + csv.string() + " --family gumbel --fit-method tau");
  REQUIRE(tau.exit_code == 0);
  const double tau_hat =
      json::parse(tau.out).at("fit").at("theta_hat").get<double>();
  REQUIRE(std::abs(tau_hat - mpl) < 0.15);
}

TEST_CASE("select ranking ignores the order families are listed in", "[cli]") {
  const fs::path csv = work_dir() / "clayton_draws.csv";
  REQUIRE(run_cli("sample --family clayton --theta 1.5 --dimension 2 --count 600 "
                  "--seed 8 --out " + csv.string()).exit_code == 0);

  const std::string tail = " --gamma 3 --nodes 32 --max-refinements 0";
  auto a = run_cli("select " + csv.string() +
                   " --families clayton,gumbel,frank,joe" + tail);
  auto b = run_cli("select " + csv.string() +
                   " --families joe,frank,gumbel,clayton" + tail);
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  auto ra = json::parse(a.out);
  auto rb = json::parse(b.out);
  REQUIRE(ra.at("baseline") == rb.at("baseline"));
  REQUIRE(ra.at("ranking") == rb.at("ranking"));
  REQUIRE(ra.at("baseline") == "clayton");
}

TEST_CASE("batch runs emit one labelled record per job", "[cli]") {
  const fs::path cfg_path = work_dir() / "batch.json";
  {
    json cfg;
    cfg["jobs"] = json::array();
    cfg["jobs"].push_back({{"task", "measure"},
                           {"label", "entropy-check"},
                           {"kind", "mccre"},
                           {"gamma", 3.0},
                           {"copula_x", {{"family", "product"}, {"dimension", 2}}},
                           {"integration", {{"nodes_per_axis", 24}}}});
    cfg["jobs"].push_back({{"task", "bounds"},
                           {"label", "envelope"},
                           {"gamma", 3.0},
                           {"alpha", 1.0},
                           {"beta", 1.0},
                           {"target", "mccri"}});
    std::ofstream(cfg_path) << cfg.dump(2);
  }
  auto r = run_cli("run " + cfg_path.string());
  REQUIRE(r.exit_code == 0);
  auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 2);
  REQUIRE(json::parse(lines[0]).at("label") == "entropy-check");
  REQUIRE(json::parse(lines[1]).at("label") == "envelope");
  // product at gamma 3: psi log Int (uv)^3 = -log(16)/2
  REQUIRE_THAT(json::parse(lines[0]).at("value").get<double>(),
               Catch::Matchers::WithinAbs(std::log(16.0) / 2.0, 1e-9));
}

TEST_CASE("usage errors exit with code 1", "[cli]") {
  REQUIRE(run_cli("measure --no-such-flag").exit_code == 1);
  REQUIRE(run_cli("measure --kind cci --gamma 2 --copula-x fgm:0.5:2 "
                  "--copula-y product::2").exit_code == 1);
  REQUIRE(run_cli("sample --family nope --count 10").exit_code == 1);
  REQUIRE(run_cli("fit /nonexistent/file.csv --family frank").exit_code == 1);

  // CSV files must carry a header row
  const fs::path headerless = work_dir() / "headerless.csv";
  std::ofstream(headerless) << "0.1,0.2\n0.3,0.4\n0.5,0.6\n0.7,0.8\n0.9,0.1\n"
                               "0.2,0.3\n0.4,0.5\n0.6,0.7\n0.8,0.9\n0.15,0.25\n";
  REQUIRE(run_cli("fit " + headerless.string() + " --family frank").exit_code == 1);

  // unknown keys in a batch config are rejected before any job runs
  const fs::path bad_cfg = work_dir() / "bad.json";
  std::ofstream(bad_cfg)
      << R"({"jobs":[{"task":"bounds","gamma":3,"alpha":1,"beta":1,)"
      << R"("target":"mccri","bogus":7}]})";
  REQUIRE(run_cli("run " + bad_cfg.string()).exit_code == 1);
}

TEST_CASE("frank fixture: fit recovers the generating parameter", "[cli]") {
  auto r = run_cli("fit " + frank_fixture().string() + " --family frank");
  REQUIRE(r.exit_code == 0);
  auto rec = json::parse(r.out);
  REQUIRE(rec.at("rows") == 724);
  REQUIRE(rec.at("columns") == json::array({"glucose", "pressure", "mass"}));
  const double theta = rec.at("fit").at("theta_hat").get<double>();
  REQUIRE(std::abs(theta - 1.3776) / 1.3776 < 0.15);
}

TEST_CASE("frank fixture: select keeps the generating family as baseline", "[cli]") {
  const std::string args = "select " + frank_fixture().string() +
                           " --families frank,gumbel,joe --gamma 3 --nodes 32 "
                           "--max-refinements 1";
  auto a = run_cli(args);
  REQUIRE(a.exit_code == 0);
  auto rec = json::parse(a.out);
  REQUIRE(rec.at("baseline") == "frank");
  REQUIRE(rec.at("baseline_source") == "best_likelihood");
  REQUIRE(rec.at("comparisons").size() == 2);

  auto b = run_cli(args);
  REQUIRE(a.out == b.out);
}
