#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "runners.hpp"
#include "vpl/grid.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(std::initializer_list<const char*> args) {
  std::vector<const char*> argv{"vpl"};
  argv.insert(argv.end(), args.begin(), args.end());
  return vpl::cli::parse_and_run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string sub(const std::string& s) const { return (path / s).string(); }
};

}  // namespace

TEST_CASE("greens-check runs clean and writes residuals below 1e-10") {
  TempDir tmp("vpl_cli_greens");
  CHECK(run_cli({"greens-check", "--out", tmp.sub("g").c_str()}) == 0);
  const std::string csv = slurp(tmp.path / "g" / "greens_check.csv");
  CHECK(csv.find("# vpl greens-check") == 0);
  CHECK(csv.find("identity,max_residual") != std::string::npos);
  CHECK(csv.find("symmetry,") != std::string::npos);
}

TEST_CASE("solve: flags override defaults, outputs carry the resolved config") {
  TempDir tmp("vpl_cli_solve");
  const auto out = tmp.sub("s");
  CHECK(run_cli({"solve", "--lambda", "40", "--omega", "0.1", "--grid", "64x128", "--out",
                 out.c_str()}) == 0);
  const std::string summary = slurp(fs::path(out) / "summary.csv");
  CHECK(summary.find("omega=0.1 lambda=40 grid=64x128") != std::string::npos);
  const std::string conv = slurp(fs::path(out) / "convergence.csv");
  CHECK(conv.find("iteration,energy,mu,patch_mass,symmetric_difference") != std::string::npos);

  // The field dump round-trips through the reader.
  std::ifstream is(fs::path(out) / "w.dump");
  auto w = vpl::read_field<double>(is);
  CHECK(w.grid()->n_r() == 64);
  CHECK(vpl::integrate(w) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("inadmissible lambda is rejected with the class-empty message") {
  CHECK(run_cli({"solve", "--lambda", "0.1"}) == vpl::cli::kUsage);
  CHECK(run_cli({"solve", "--lambda", "0.3183"}) == vpl::cli::kUsage);  // 1/pi boundary
}

TEST_CASE("config file: file overrides defaults, flags override file, unknown keys fail") {
  TempDir tmp("vpl_cli_cfg");
  {
    std::ofstream cfg(tmp.path / "run.cfg");
    cfg << "# comment line\n"
        << "omega = 0.1\n"
        << "lambda = 50\n"
        << "grid = 64x128\n";
  }
  const auto out = tmp.sub("c");
  CHECK(run_cli({"solve", "--config", (tmp.path / "run.cfg").string().c_str(), "--lambda",
                 "60", "--out", out.c_str()}) == 0);
  const std::string summary = slurp(fs::path(out) / "summary.csv");
  CHECK(summary.find("omega=0.1") != std::string::npos);   // from file
  CHECK(summary.find("lambda=60") != std::string::npos);   // flag wins over file

  {
    std::ofstream cfg(tmp.path / "bad.cfg");
    cfg << "omega = 0.1\nunknown_thing = 3\n";
  }
  CHECK(run_cli({"solve", "--config", (tmp.path / "bad.cfg").string().c_str()}) ==
        vpl::cli::kUsage);
  {
    std::ofstream cfg(tmp.path / "mal.cfg");
    cfg << "tol = not-a-number\n";
  }
  CHECK(run_cli({"solve", "--config", (tmp.path / "mal.cfg").string().c_str()}) ==
        vpl::cli::kUsage);
}

TEST_CASE("sweep: deterministic byte-identical reruns, spec CSV header") {
  TempDir tmp("vpl_cli_sweep");
  const auto out1 = tmp.sub("r1"), out2 = tmp.sub("r2");
  auto args = [&](const std::string& out) {
    return std::vector<const char*>{"vpl",    "sweep",       "--lambdas", "50,100",
                                    "--grid", "64x128",      "--no-auto-grid",
                                    "--out",  out.c_str()};
  };
  auto a1 = args(out1);
  CHECK(vpl::cli::parse_and_run(static_cast<int>(a1.size()), a1.data()) == 0);
  auto a2 = args(out2);
  CHECK(vpl::cli::parse_and_run(static_cast<int>(a2.size()), a2.data()) == 0);
  const std::string s1 = slurp(fs::path(out1) / "sweep.csv");
  const std::string s2 = slurp(fs::path(out2) / "sweep.csv");
  CHECK(!s1.empty());
  // Byte-identical apart from the differing output directory (which is not
  // recorded in the file), so full equality must hold.
  CHECK(s1 == s2);
  CHECK(s1.find("lambda,epsilon,energy,mu,core_energy,center_radius,diameter,"
                "diam_over_eps,v_sup_error,zeta_error") != std::string::npos);
}

TEST_CASE("evolve: ledger format and snapshots") {
  TempDir tmp("vpl_cli_evolve");
  const auto out = tmp.sub("e");
  CHECK(run_cli({"evolve", "--lambda", "40", "--grid", "64x128", "--periods", "0.01",
                 "--snapshots", "2", "--out", out.c_str()}) == 0);
  const std::string ledger = slurp(fs::path(out) / "ledger.csv");
  CHECK(ledger.find("time,mass,J,E,lp15,lp2,lp4,dist_p") != std::string::npos);
  CHECK(fs::exists(fs::path(out) / "w0.dump"));
  CHECK(fs::exists(fs::path(out) / "w_final.dump"));
  int snaps = 0;
  for (const auto& entry : fs::directory_iterator(out))
    if (entry.path().filename().string().rfind("w_t", 0) == 0) ++snaps;
  CHECK(snaps >= 1);
}

TEST_CASE("stability: zero-magnitude run starts at zero distance") {
  TempDir tmp("vpl_cli_stab");
  const auto out = tmp.sub("st");
  CHECK(run_cli({"stability", "--lambda", "40", "--grid", "64x128", "--periods", "0.002",
                 "--magnitude", "0", "--out", out.c_str()}) == 0);
  const std::string rows = slurp(fs::path(out) / "stability.csv");
  CHECK(rows.find("time,dist_p") != std::string::npos);
  // first data row is "0,0"
  const auto pos = rows.find("\n0,");
  CHECK(pos != std::string::npos);
}

TEST_CASE("svg emission is deterministic") {
  TempDir tmp("vpl_cli_svg");
  const auto out1 = tmp.sub("v1"), out2 = tmp.sub("v2");
  CHECK(run_cli({"solve", "--lambda", "40", "--grid", "64x128", "--svg", "--out",
                 out1.c_str()}) == 0);
  CHECK(run_cli({"solve", "--lambda", "40", "--grid", "64x128", "--svg", "--out",
                 out2.c_str()}) == 0);
  CHECK(slurp(fs::path(out1) / "patch.svg") == slurp(fs::path(out2) / "patch.svg"));
  CHECK(slurp(fs::path(out1) / "profile.svg") == slurp(fs::path(out2) / "profile.svg"));
  CHECK(slurp(fs::path(out1) / "patch.svg").find("<svg") != std::string::npos);
}
