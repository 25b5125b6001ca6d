// dualprox-certify: recompute low-dimensional certificates for fixture files.
//
// Closed-form certificates already in a fixture are kept (they are derived by
// hand); scalar and grid certificates are recomputed and every pair is
// cross-checked. With --write the fixture files are updated in place.

#include "dualprox/io.hpp"
#include "dualprox/oracle.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace dualprox;

int main(int argc, char** argv) {
  CLI::App app{"Certify fixture problems with the grid and scalar oracles"};
  std::vector<std::string> files;
  bool write = false;
  double resolution = 1e-3;
  int refinements = 1;
  std::size_t max_points = 400000;
  app.add_option("fixtures", files, "Fixture JSON files")->required()->check(CLI::ExistingFile);
  app.add_flag("--write", write, "Store the certificates back into the fixtures");
  app.add_option("--resolution", resolution, "Finest grid spacing")->check(CLI::PositiveNumber);
  app.add_option("--refinements", refinements, "Refinement passes after the coarse sweep");
  app.add_option("--max-points", max_points, "Grid points per level");
  CLI11_PARSE(app, argc, argv);

  int failures = 0;
  for (const auto& f : files) {
    try {
      const io::Fixture fx = io::load_fixture(f);
      std::vector<Certificate> closed;
      for (const auto& c : fx.certificates) {
        if (c.method == CertificateMethod::closed_form) closed.push_back(c);
      }
      GridOptions grid;
      grid.resolution = resolution;
      grid.refinements = refinements;
      grid.max_points = max_points;
      const CertificationReport report = certify(fx.file.problem, closed, grid);
      std::cout << fx.name << ":";
      for (const auto& c : report.certificates) std::cout << " " << to_string(c.method) << "(r=" << c.guaranteed_radius << ")";
      if (report.certificates.size() < 2 && fx.file.problem.dim() <= 2) std::cout << " [single method]";
      std::cout << (report.consistent ? " ok" : " MISMATCH " + report.detail) << "\n";
      if (!report.consistent) {
        ++failures;
        continue;
      }
      if (write) io::store_certificates(f, report.certificates);
    } catch (const std::exception& e) {
      std::cerr << f << ": " << e.what() << "\n";
      ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}
