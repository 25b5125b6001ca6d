#include "dualprox/io.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <sys/wait.h>

using namespace dualprox;
using testing::vec;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(DUALPROX_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  const int raw = pclose(p);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

fs::path outdir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "dualprox_test_cli" / name;
  fs::remove_all(d);
  return d;
}

std::string fixture(const std::string& name) { return (fs::path(DUALPROX_FIXTURE_DIR) / name).string(); }
std::string data(const std::string& name) { return (fs::path(DUALPROX_DATA_DIR) / name).string(); }

double objective_field(const std::string& out, const std::string& key) {
  const auto at = out.find(key + ": ");
  REQUIRE(at != std::string::npos);
  return std::stod(out.substr(at + key.size() + 2));
}

}  // namespace

TEST_CASE("solve") {
  auto d = outdir("box");
  auto r = run("solve " + fixture("01_box_projection.json") + " --out " + d.string());
  CHECK(r.status == 0);
  CHECK(r.out.find("RESULT converged=true") != std::string::npos);
  CHECK((io::read_vector_csv(d / "solution.csv") - vec({1, 0})).norm() <= 1e-8);
  CHECK(fs::exists(d / "trace.csv"));

  d = outdir("soft");
  r = run("solve " + fixture("02_soft_threshold.json") + " --tol 1e-10 --out " + d.string());
  CHECK(r.status == 0);
  CHECK(std::abs(io::read_vector_csv(d / "solution.csv")[0] - 2.0) <= 1e-8);

  r = run("solve " + data("truncated.json") + " --out " + outdir("trunc").string());
  CHECK(r.status == 1);
  CHECK(r.out.find("RESULT converged=false iters=0 primal=nan") != std::string::npos);

  r = run("solve " + fixture("02_soft_threshold.json") + " --max-iter 1 --out " + outdir("cap").string());
  CHECK(r.status == 2);

  r = run("solve " + fixture("02_soft_threshold.json") + " --gamma 5 --out " + outdir("gamma").string());
  CHECK(r.status == 1);
}

TEST_CASE("project") {
  auto d = outdir("disk");
  auto r = run("project " + data("project_disk_halfplane.json") + " --out " + d.string());
  CHECK(r.status == 0);
  CHECK((io::read_vector_csv(d / "solution.csv") - vec({0, 1})).norm() <= 1e-6);

  d = outdir("ball");
  r = run("project " + data("project_single_ball.json") + " --out " + d.string());
  CHECK(r.status == 0);
  CHECK((io::read_vector_csv(d / "solution.csv") - vec({0.6, 0.8})).norm() <= 1e-8);

  r = run("project " + data("project_empty.json") + " --out " + outdir("empty").string());
  CHECK(r.status == 1);
}

TEST_CASE("denoise") {
  auto d = outdir("zero");
  auto r = run("denoise " + data("zero4.csv") + " --out " + d.string());
  CHECK(r.status == 0);
  CHECK(io::read_image_csv(d / "recovered.csv").pixels.isZero());

  d = outdir("pixel");
  r = run("denoise " + data("pixel.csv") + " --weights 0.5,0.25,0.25 --tol 1e-10 --out " + d.string());
  CHECK(r.status == 0);
  CHECK(io::read_image_csv(d / "recovered.csv").pixels[0] == doctest::Approx(0.25).epsilon(1e-8));

  r = run("denoise " + data("square3.csv") + " --basis haar --out " + outdir("haar").string());
  CHECK(r.status == 1);

  d = outdir("blocks");
  r = run("denoise " + data("blocks32.pgm") + " --noise 0.1 --seed 3 --out " + d.string());
  CHECK(r.status == 0);
  CHECK(objective_field(r.out, "objective_out") < objective_field(r.out, "objective_in"));
  CHECK(io::read_pgm(d / "recovered.pgm").width == 32);
}

TEST_CASE("trace-plot-data") {
  const auto src = outdir("plot_src");
  run("solve " + fixture("02_soft_threshold.json") + " --out " + src.string());
  const auto d = outdir("plot");
  const auto r = run("trace-plot-data " + (src / "trace.csv").string() + " --out " + d.string());
  CHECK(r.status == 0);
  const auto text = io::read_text(d / "plot.csv");
  CHECK(text.rfind("n,primal,dual,primal_plus_dual,step_norm,log10_step_norm\n", 0) == 0);
  CHECK(r.out.find("RESULT ") != std::string::npos);
}
