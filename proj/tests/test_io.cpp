#include "dualprox/io.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace dualprox;
using testing::vec;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "dualprox_test_io";
  fs::create_directories(dir);
  return dir / name;
}

std::string error_of(const std::string& text) {
  try {
    io::parse_problem(text, "p.json");
  } catch (const io::ParseError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("vector csv round trip is exact") {
  std::mt19937_64 rng(1);
  const Vector v = testing::random_vector(rng, 20, 1e3);
  const auto p = scratch("v.csv");
  io::write_vector_csv(p, v);
  CHECK(io::read_vector_csv(p) == v);

  std::ofstream(scratch("row.csv")) << "1, 2.5,-3\n";
  CHECK(io::read_vector_csv(scratch("row.csv")) == vec({1, 2.5, -3}));
  std::ofstream(scratch("bad.csv")) << "1\nx\n";
  CHECK_THROWS_AS(io::read_vector_csv(scratch("bad.csv")), io::ParseError);
}

TEST_CASE("matrix csv") {
  const Matrix m = io::parse_matrix_csv("1,2\n3,4\n", "m");
  CHECK(m(1, 0) == 3);
  std::ostringstream os;
  io::write_matrix_csv(os, m);
  CHECK(os.str() == "1,2\n3,4\n");
  try {
    io::parse_matrix_csv("1,2\n3\n", "m.csv");
    FAIL("ragged matrix accepted");
  } catch (const io::ParseError& e) {
    CHECK(std::string(e.what()).rfind("m.csv:2:", 0) == 0);
  }
}

TEST_CASE("image formats") {
  const auto img = io::read_image(fs::path(DUALPROX_DATA_DIR) / "square3.csv");
  CHECK(img.width == 3);
  CHECK(img.height == 3);
  CHECK(img.at(1, 2) == 0.6);

  const auto blocks = io::read_image(fs::path(DUALPROX_DATA_DIR) / "blocks32.pgm");
  CHECK(blocks.width == 32);
  CHECK(blocks.at(0, 0) == doctest::Approx(51.0 / 255.0));

  for (bool binary : {true, false}) {
    const auto p = scratch(binary ? "b.pgm" : "a.pgm");
    io::write_pgm(p, blocks, binary);
    const auto back = io::read_pgm(p);
    CHECK((back.pixels - blocks.pixels).norm() == 0.0);
  }
  // clamping on output
  const auto p = scratch("clamp.pgm");
  io::write_pgm(p, ImageGrid::from_pixels(2, 1, vec({-1, 3})));
  CHECK(io::read_pgm(p).pixels == vec({0, 1}));

  const auto c = scratch("img.csv");
  io::write_image_csv(c, img);
  CHECK(io::read_image_csv(c).pixels == img.pixels);

  std::ofstream(scratch("short.pgm")) << "P2\n2 2\n255\n1 2 3\n";
  CHECK_THROWS_AS(io::read_pgm(scratch("short.pgm")), io::ParseError);
  std::ofstream(scratch("x.png")) << "nope";
  CHECK_THROWS_AS(io::read_image(scratch("x.png")), io::ParseError);
}

TEST_CASE("problem parsing") {
  const auto f = io::parse_problem(R"({
    "z": [1, 2],
    "terms": [
      {"weight": 0.5, "function": "norm1", "operator": {"kind": "matrix", "rows": [[1, 0], [0, 2]]}, "shift": [1, 0]},
      {"weight": 0.5, "function": {"kind": "indicator", "set": {"kind": "box", "lo": ["-inf", 0], "hi": [1, "inf"]}}}
    ],
    "solver": {"tol": 1e-9, "max_iter": 500}
  })",
                                   "p.json");
  CHECK(f.problem.terms.size() == 2);
  CHECK(f.problem.terms[0].op.dim_out() == 2);
  CHECK(f.problem.terms[0].shift == vec({1, 0}));
  CHECK(f.problem.terms[1].shift == vec({0, 0}));
  CHECK(f.problem.terms[1].function.kind() == FunctionKind::indicator);
  SolverConfig cfg;
  io::apply_settings(f.settings, cfg);
  CHECK(cfg.tol == 1e-9);
  CHECK(cfg.max_iter == 500);

  const auto e = io::parse_problem(R"({"z":[0,0,0,0],"terms":[{"weight":1,
      "function":{"kind":"mixed_norm21","groups":2,"group_size":2}}]})",
                                   "q.json");
  CHECK(e.problem.terms[0].function.kind() == FunctionKind::mixed_norm21);
}

TEST_CASE("errors carry a line and a pointer") {
  const std::string text = "{\n  \"z\": [1, 2],\n  \"terms\": [\n    {\"weight\": 2, \"function\": \"norm1\"}\n  ]\n}\n";
  const auto msg = error_of(text);
  CHECK(msg.rfind("p.json:4:", 0) == 0);
  CHECK(msg.find("/terms/0/weight") != std::string::npos);

  CHECK(error_of(R"({"z": [1], "terms": [{"weight": 1, "function": "cube"}]})").find("/terms/0/function") !=
        std::string::npos);
  CHECK(error_of(R"({"terms": []})").find("z") != std::string::npos);
  CHECK_FALSE(error_of(R"({"z": [1], "terms": [{"weight": 1, "function": "norm1", "shift": [1, 2]}]})").empty());

  const auto truncated = io::read_text(fs::path(DUALPROX_DATA_DIR) / "truncated.json");
  const auto t = error_of(truncated);
  CHECK(t.rfind("p.json:", 0) == 0);
  CHECK(t.find("malformed JSON") != std::string::npos);
}

TEST_CASE("constraint files") {
  const auto c = io::load_constraints(fs::path(DUALPROX_DATA_DIR) / "project_halfspace_preimage.json");
  CHECK(c.z == vec({1, 1}));
  REQUIRE(c.constraints.size() == 1);
  CHECK(c.constraints[0].op.dim_out() == 1);
  CHECK_THROWS_AS(io::load_constraints(fs::path(DUALPROX_DATA_DIR) / "project_empty.json"), io::ParseError);
}

TEST_CASE("certificates round trip") {
  const Certificate c{vec({0.1, 1.0 / 3.0}), CertificateMethod::grid, 0.05, {}};
  const auto back = io::certificate_from_json(io::certificate_to_json(c), "c");
  CHECK(back.reference_x == c.reference_x);
  CHECK(back.method == c.method);
  CHECK(back.guaranteed_radius == c.guaranteed_radius);
}

TEST_CASE("fixtures load") {
  const auto all = io::load_fixtures(DUALPROX_FIXTURE_DIR);
  CHECK(all.size() >= 15);
  for (const auto& f : all) {
    CAPTURE(f.name);
    CHECK_FALSE(f.certificates.empty());
    CHECK_NOTHROW(f.file.problem.validate());
  }
  const auto copy = scratch("fixture.json");
  fs::copy_file(fs::path(DUALPROX_FIXTURE_DIR) / "02_soft_threshold.json", copy, fs::copy_options::overwrite_existing);
  io::store_certificates(copy, {Certificate{vec({2}), CertificateMethod::closed_form, 1e-12, {}}});
  const auto f = io::load_fixture(copy);
  REQUIRE(f.certificates.size() == 1);
  CHECK(f.certificates[0].reference_x == vec({2}));
  CHECK(f.file.problem.z == vec({3}));
}
