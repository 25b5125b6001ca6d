#pragma once

#include "dualprox/best_approx.hpp"
#include "dualprox/imaging.hpp"
#include "dualprox/oracle.hpp"
#include "dualprox/solver.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dualprox::io {

/// Input error; the message starts with `source:line:` when a line is known.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vectors are stored one value per line (a single comma-separated line is
// also accepted on input). Matrices and image grids are comma-separated rows.
Vector read_vector_csv(const std::filesystem::path& path);
void write_vector_csv(std::ostream& os, const Vector& v);
void write_vector_csv(const std::filesystem::path& path, const Vector& v);
Matrix read_matrix_csv(const std::filesystem::path& path);
Matrix parse_matrix_csv(const std::string& text, const std::string& source);
void write_matrix_csv(std::ostream& os, const Matrix& m);

ImageGrid read_image_csv(const std::filesystem::path& path);
void write_image_csv(const std::filesystem::path& path, const ImageGrid& image);
/// Writes the horizontal and vertical planes as two grids.
void write_dual_field_csv(const std::filesystem::path& horizontal, const std::filesystem::path& vertical,
                          const DualField& field);

/// PGM (P2 or P5, maxval <= 255). Gray level k maps to k / maxval in [0, 1];
/// on output values are clamped to [0, 1] and rounded to k = round(255 v).
ImageGrid read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const ImageGrid& image, bool binary = true);
/// Dispatches on the extension: .pgm or .csv.
ImageGrid read_image(const std::filesystem::path& path);

/// Solver settings that may appear in a problem file under "solver".
struct SolverSettings {
  std::optional<double> tol;
  std::optional<std::size_t> max_iter;
  std::optional<double> gamma;
  std::optional<double> lambda;
  std::optional<double> epsilon;
};

struct ProblemFile {
  CompositeProxProblem problem;
  std::optional<Vector> slater_point;
  SolverSettings settings;
};

struct ConstraintsFile {
  Vector z;
  std::vector<CompositeConstraint> constraints;
  std::optional<Vector> slater_point;
  SolverSettings settings;
};

/// Problem JSON:
///   { "z": [...],
///     "terms": [ { "weight": w,
///                  "function": "norm1" | { "kind": ..., parameters... },
///                  "operator": "identity" | { "kind": "matrix", "rows": [[...]] } | ...,
///                  "shift": [...] }, ... ],
///     "slater_point": [...], "solver": { "tol": ..., ... } }
/// `source` names the input in messages; relative csv paths resolve against `base_dir`.
ProblemFile parse_problem(const std::string& text, const std::string& source,
                          const std::filesystem::path& base_dir = {});
ProblemFile load_problem(const std::filesystem::path& path);

/// { "z": [...], "constraints": [ { "operator": ..., "shift": [...], "set": { "kind": "ball", ... } } ] }
ConstraintsFile parse_constraints(const std::string& text, const std::string& source,
                                  const std::filesystem::path& base_dir = {});
ConstraintsFile load_constraints(const std::filesystem::path& path);

/// Applies the settings on top of `config`.
void apply_settings(const SolverSettings& settings, SolverConfig& config);

std::string certificate_to_json(const Certificate& c);
Certificate certificate_from_json(const std::string& text, const std::string& source);

/// A certified test problem: the problem file fields plus
///   "name", and "certificates": [ { "method": ..., "reference_x": [...], "guaranteed_radius": r } ].
struct Fixture {
  std::string name;
  ProblemFile file;
  std::vector<Certificate> certificates;
  std::string text;
};
Fixture load_fixture(const std::filesystem::path& path);
std::vector<Fixture> load_fixtures(const std::filesystem::path& dir);
/// Rewrites the fixture file with the given certificates, keeping everything else.
void store_certificates(const std::filesystem::path& path, const std::vector<Certificate>& certificates);

std::string read_text(const std::filesystem::path& path);

}  // namespace dualprox::io
