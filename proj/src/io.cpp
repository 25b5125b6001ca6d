#include "dualprox/io.hpp"

#include "format.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dualprox::io {

using json = nlohmann::ordered_json;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path.string() + ": cannot write");
  out << text;
  if (!out) throw ParseError(path.string() + ": write failed");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& field, const std::string& source, std::size_t line) {
  const std::string t = trim(field);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size()) {
    throw ParseError(source + ":" + std::to_string(line) + ": not a number: '" + t + "'");
  }
  return v;
}

std::vector<std::vector<double>> parse_rows(const std::string& text, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    std::vector<double> row;
    std::istringstream fields(line);
    std::string f;
    while (std::getline(fields, f, ',')) row.push_back(parse_real(f, source, lineno));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(rows.front().size()) +
                       " columns, found " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Vector read_vector_csv(const std::filesystem::path& path) {
  const auto rows = parse_rows(read_text(path), path.string());
  if (rows.empty()) throw ParseError(path.string() + ": empty vector file");
  std::vector<double> flat;
  if (rows.size() == 1) {
    flat = rows.front();
  } else {
    if (rows.front().size() != 1) throw ParseError(path.string() + ": expected one value per line");
    for (const auto& r : rows) flat.push_back(r[0]);
  }
  return Eigen::Map<const Vector>(flat.data(), static_cast<Index>(flat.size()));
}

void write_vector_csv(std::ostream& os, const Vector& v) {
  for (Index i = 0; i < v.size(); ++i) os << detail::format_real(v[i]) << '\n';
}

void write_vector_csv(const std::filesystem::path& path, const Vector& v) {
  std::ostringstream ss;
  write_vector_csv(ss, v);
  write_text(path, ss.str());
}

Matrix parse_matrix_csv(const std::string& text, const std::string& source) {
  const auto rows = parse_rows(text, source);
  if (rows.empty()) throw ParseError(source + ": empty matrix");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return m;
}

Matrix read_matrix_csv(const std::filesystem::path& path) { return parse_matrix_csv(read_text(path), path.string()); }

void write_matrix_csv(std::ostream& os, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << detail::format_real(m(i, j));
    os << '\n';
  }
}

ImageGrid read_image_csv(const std::filesystem::path& path) {
  const Matrix m = read_matrix_csv(path);
  if (!m.allFinite()) throw ParseError(path.string() + ": non-finite pixel");
  ImageGrid g = ImageGrid::zeros(static_cast<int>(m.cols()), static_cast<int>(m.rows()));
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) g.at(r, c) = m(r, c);
  }
  return g;
}

namespace {

Matrix as_matrix(const Vector& flat, int width, int height) {
  Matrix m(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) m(r, c) = flat[static_cast<Index>(r) * width + c];
  }
  return m;
}

}  // namespace

void write_image_csv(const std::filesystem::path& path, const ImageGrid& image) {
  std::ostringstream ss;
  write_matrix_csv(ss, as_matrix(image.pixels, image.width, image.height));
  write_text(path, ss.str());
}

void write_dual_field_csv(const std::filesystem::path& horizontal, const std::filesystem::path& vertical,
                          const DualField& field) {
  const Index n = field.pixel_count();
  std::ostringstream h, v;
  write_matrix_csv(h, as_matrix(field.data.head(n), field.width, field.height));
  write_matrix_csv(v, as_matrix(field.data.tail(n), field.width, field.height));
  write_text(horizontal, h.str());
  write_text(vertical, v.str());
}

ImageGrid read_pgm(const std::filesystem::path& path) {
  const std::string data = read_text(path);
  const std::string src = path.string();
  std::size_t pos = 0;
  // header tokens, skipping whitespace and comments
  auto token = [&]() {
    for (;;) {
      while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
      if (pos < data.size() && data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    const std::size_t start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    if (start == pos) throw ParseError(src + ": truncated PGM header");
    return data.substr(start, pos - start);
  };
  auto integer = [&](const char* what) {
    const std::string t = token();
    if (t.find_first_not_of("0123456789") != std::string::npos) throw ParseError(src + ": bad PGM " + what + " '" + t + "'");
    return std::stoi(t);
  };
  const std::string magic = token();
  if (magic != "P2" && magic != "P5") throw ParseError(src + ": not a P2/P5 PGM file");
  const int width = integer("width");
  const int height = integer("height");
  const int maxval = integer("maxval");
  if (width <= 0 || height <= 0) throw ParseError(src + ": PGM sides must be positive");
  if (maxval <= 0 || maxval > 255) throw ParseError(src + ": PGM maxval must be in 1..255");
  ImageGrid g = ImageGrid::zeros(width, height);
  const Index n = g.size();
  if (magic == "P5") {
    ++pos;  // single whitespace byte after maxval
    if (data.size() < pos + static_cast<std::size_t>(n)) throw ParseError(src + ": truncated PGM raster");
    for (Index i = 0; i < n; ++i) g.pixels[i] = static_cast<unsigned char>(data[pos + i]) / static_cast<double>(maxval);
  } else {
    for (Index i = 0; i < n; ++i) {
      const int k = integer("sample");
      if (k > maxval) throw ParseError(src + ": PGM sample above maxval");
      g.pixels[i] = k / static_cast<double>(maxval);
    }
  }
  return g;
}

void write_pgm(const std::filesystem::path& path, const ImageGrid& image, bool binary) {
  std::ostringstream ss;
  ss << (binary ? "P5" : "P2") << '\n' << image.width << ' ' << image.height << "\n255\n";
  for (Index i = 0; i < image.size(); ++i) {
    const double v = std::clamp(image.pixels[i], 0.0, 1.0);
    const int k = static_cast<int>(std::lround(255.0 * v));
    if (binary) {
      ss.put(static_cast<char>(static_cast<unsigned char>(k)));
    } else {
      ss << k << (((i + 1) % image.width == 0) ? '\n' : ' ');
    }
  }
  write_text(path, ss.str());
}

ImageGrid read_image(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".csv") return read_image_csv(path);
  throw ParseError(path.string() + ": unsupported image format (expected .pgm or .csv)");
}

// ---------------------------------------------------------------------------
// JSON

namespace {

// Approximate source line of a JSON pointer: keys are located in order of the path.
std::size_t line_of(const std::string& text, const json::json_pointer& ptr) {
  std::size_t pos = 0;
  std::string path = ptr.to_string();
  std::istringstream parts(path);
  std::string key;
  std::getline(parts, key, '/');
  while (std::getline(parts, key, '/')) {
    if (!key.empty() && key.find_first_not_of("0123456789") == std::string::npos) continue;
    const auto found = text.find('"' + key + '"', pos);
    if (found == std::string::npos) break;
    pos = found;
  }
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

// Carries the document so semantic errors can be anchored to a line.
struct Doc {
  const std::string& text;
  const std::string& source;
  std::filesystem::path base_dir;

  [[noreturn]] void fail(const json::json_pointer& at, const std::string& msg) const {
    throw ParseError(source + ":" + std::to_string(line_of(text, at)) + ": " + at.to_string() + ": " + msg);
  }

  const json& field(const json& obj, const json::json_pointer& at, const std::string& key) const {
    if (!obj.is_object()) fail(at, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(at, "missing field '" + key + "'");
    return *it;
  }

  double real(const json& j, const json::json_pointer& at) const {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
      const auto s = j.get<std::string>();
      if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
      if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    if (j.is_null()) fail(at, "expected a number, found null");
    fail(at, "expected a number");
  }

  Vector vector(const json& j, const json::json_pointer& at) const {
    if (!j.is_array()) fail(at, "expected an array of numbers");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = real(j[i], at / i);
    return v;
  }

  Vector finite_vector(const json& j, const json::json_pointer& at) const {
    Vector v = vector(j, at);
    if (!v.allFinite()) fail(at, "entries must be finite");
    return v;
  }

  Matrix matrix(const json& j, const json::json_pointer& at) const {
    if (!j.is_array() || j.empty()) fail(at, "expected a non-empty array of rows");
    const Vector first = finite_vector(j[0], at / 0);
    Matrix m(static_cast<Index>(j.size()), first.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
      const Vector row = finite_vector(j[i], at / i);
      if (row.size() != first.size()) fail(at / i, "row length differs from the first row");
      m.row(static_cast<Index>(i)) = row.transpose();
    }
    return m;
  }

  std::size_t count(const json& j, const json::json_pointer& at) const {
    if (!j.is_number_integer() || j.get<long long>() < 0) fail(at, "expected a non-negative integer");
    return j.get<std::size_t>();
  }

  std::string kind(const json& j, const json::json_pointer& at) const {
    if (j.is_string()) return j.get<std::string>();
    const json& k = field(j, at, "kind");
    if (!k.is_string()) fail(at / "kind", "expected a string");
    return k.get<std::string>();
  }

  // parameters may sit inline or under "params"
  const json& param(const json& j, const json::json_pointer& at, const std::string& key) const {
    if (j.is_object() && j.contains("params") && j["params"].contains(key)) return j["params"][key];
    return field(j, at, key);
  }
  json::json_pointer param_at(const json& j, const json::json_pointer& at, const std::string& key) const {
    if (j.is_object() && j.contains("params") && j["params"].contains(key)) return at / "params" / key;
    return at / key;
  }
  double real_param(const json& j, const json::json_pointer& at, const std::string& key) const {
    return real(param(j, at, key), param_at(j, at, key));
  }

  ConvexSetDescriptor set(const json& j, const json::json_pointer& at) const {
    const std::string k = kind(j, at);
    try {
      if (k == "ball") {
        return ConvexSetDescriptor::ball(finite_vector(param(j, at, "center"), param_at(j, at, "center")),
                                         real_param(j, at, "radius"));
      }
      if (k == "box") {
        return ConvexSetDescriptor::box(vector(param(j, at, "lo"), param_at(j, at, "lo")),
                                        vector(param(j, at, "hi"), param_at(j, at, "hi")));
      }
      if (k == "halfspace") {
        return ConvexSetDescriptor::halfspace(finite_vector(param(j, at, "normal"), param_at(j, at, "normal")),
                                              real_param(j, at, "offset"));
      }
      if (k == "affine") {
        return ConvexSetDescriptor::affine(matrix(param(j, at, "matrix"), param_at(j, at, "matrix")),
                                           finite_vector(param(j, at, "rhs"), param_at(j, at, "rhs")));
      }
    } catch (const std::invalid_argument& e) {
      fail(at, e.what());
    }
    fail(at, "unknown set kind '" + k + "' (expected ball, box, halfspace or affine)");
  }

  ProxFunction function(const json& j, const json::json_pointer& at) const {
    const std::string k = kind(j, at);
    try {
      if (k == "zero") return zero_function();
      if (k == "norm1") return norm1();
      if (k == "norm2") return norm2();
      if (k == "elastic_net") return elastic_net(real_param(j, at, "alpha"), real_param(j, at, "beta"));
      if (k == "mixed_norm21") {
        return mixed_norm21(static_cast<Index>(count(param(j, at, "groups"), param_at(j, at, "groups"))),
                            static_cast<Index>(count(param(j, at, "group_size"), param_at(j, at, "group_size"))));
      }
      if (k == "indicator") return make_indicator(set(param(j, at, "set"), param_at(j, at, "set")));
    } catch (const std::invalid_argument& e) {
      fail(at, e.what());
    }
    fail(at, "unknown function kind '" + k + "'");
  }

  LinearOperator op(const json* j, const json::json_pointer& at, Index dim) const {
    if (!j || j->is_null()) return identity_operator(dim);
    const std::string k = kind(*j, at);
    std::optional<double> bound;
    if (j->is_object() && j->contains("norm_bound")) bound = real((*j)["norm_bound"], at / "norm_bound");
    LinearOperator out = identity_operator(dim);
    try {
      if (k == "identity") {
        out = identity_operator(dim);
      } else if (k == "scalar") {
        out = scalar_operator(dim, real_param(*j, at, "value"));
      } else if (k == "diagonal") {
        out = diagonal_operator(finite_vector(param(*j, at, "values"), param_at(*j, at, "values")));
      } else if (k == "matrix") {
        out = matrix_operator(matrix(param(*j, at, "rows"), param_at(*j, at, "rows")));
      } else if (k == "csv") {
        const json& p = param(*j, at, "path");
        if (!p.is_string()) fail(param_at(*j, at, "path"), "expected a path string");
        std::filesystem::path file = p.get<std::string>();
        if (file.is_relative()) file = base_dir / file;
        out = matrix_operator(read_matrix_csv(file));
      } else {
        fail(at, "unknown operator kind '" + k + "' (expected identity, scalar, diagonal, matrix or csv)");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      fail(at, e.what());
    }
    if (out.dim_in() != dim) fail(at, "operator input dimension " + std::to_string(out.dim_in()) + " differs from dim(z) = " + std::to_string(dim));
    if (bound) out = out.with_norm_bound(*bound);
    return out;
  }

  SolverSettings settings(const json& root) const {
    SolverSettings s;
    if (!root.contains("solver")) return s;
    const json& j = root["solver"];
    const auto at = json::json_pointer("/solver");
    if (!j.is_object()) fail(at, "expected an object");
    if (j.contains("tol")) s.tol = real(j["tol"], at / "tol");
    if (j.contains("max_iter")) s.max_iter = count(j["max_iter"], at / "max_iter");
    if (j.contains("gamma")) s.gamma = real(j["gamma"], at / "gamma");
    if (j.contains("lambda")) s.lambda = real(j["lambda"], at / "lambda");
    if (j.contains("epsilon")) s.epsilon = real(j["epsilon"], at / "epsilon");
    return s;
  }

  std::optional<Vector> slater(const json& root, Index dim) const {
    if (!root.contains("slater_point")) return std::nullopt;
    Vector p = finite_vector(root["slater_point"], json::json_pointer("/slater_point"));
    if (p.size() != dim) fail(json::json_pointer("/slater_point"), "dimension differs from z");
    return p;
  }

  Vector shift(const json& obj, const json::json_pointer& at, Index dim_out) const {
    if (!obj.contains("shift") || obj["shift"].is_null()) return Vector::Zero(dim_out);
    Vector r = finite_vector(obj["shift"], at / "shift");
    if (r.size() != dim_out) fail(at / "shift", "length " + std::to_string(r.size()) + " differs from operator output " + std::to_string(dim_out));
    return r;
  }
};

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte ? byte - 1 : 0), '\n');
    throw ParseError(source + ":" + std::to_string(line) + ": malformed JSON: " + e.what());
  }
}

ProblemFile problem_from_json(const json& root, const Doc& doc) {
  const auto top = json::json_pointer("");
  if (!root.is_object()) doc.fail(top, "expected an object");
  ProblemFile out;
  out.problem.z = doc.finite_vector(doc.field(root, top, "z"), json::json_pointer("/z"));
  const Index d = out.problem.z.size();
  if (d == 0) doc.fail(json::json_pointer("/z"), "z must be non-empty");
  const json& terms = doc.field(root, top, "terms");
  const auto terms_at = json::json_pointer("/terms");
  if (!terms.is_array() || terms.empty()) doc.fail(terms_at, "expected a non-empty array");
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto at = terms_at / i;
    const json& t = terms[i];
    const double w = doc.real(doc.field(t, at, "weight"), at / "weight");
    if (!(w > 0.0 && w <= 1.0)) doc.fail(at / "weight", "weight must lie in (0, 1]");
    weight_sum += w;
    ProxFunction g = doc.function(doc.field(t, at, "function"), at / "function");
    LinearOperator L = doc.op(t.contains("operator") ? &t["operator"] : nullptr, at / "operator", d);
    if (g.dim() && *g.dim() != L.dim_out()) {
      doc.fail(at / "function", "function dimension " + std::to_string(*g.dim()) + " differs from operator output " + std::to_string(L.dim_out()));
    }
    if (const auto* s = g.domain_set(); s && s->dim() != L.dim_out()) {
      doc.fail(at / "function", "set dimension " + std::to_string(s->dim()) + " differs from operator output " + std::to_string(L.dim_out()));
    }
    Vector r = doc.shift(t, at, L.dim_out());
    out.problem.terms.push_back({w, std::move(g), std::move(L), std::move(r)});
  }
  if (std::abs(weight_sum - 1.0) > 1e-12) doc.fail(terms_at, "weights sum to " + detail::format_real(weight_sum) + ", not 1");
  try {
    out.problem.validate();
  } catch (const std::invalid_argument& e) {
    doc.fail(terms_at, e.what());
  }
  out.slater_point = doc.slater(root, d);
  out.settings = doc.settings(root);
  return out;
}

}  // namespace

ProblemFile parse_problem(const std::string& text, const std::string& source, const std::filesystem::path& base_dir) {
  const json root = parse_json(text, source);
  return problem_from_json(root, Doc{text, source, base_dir});
}

ProblemFile load_problem(const std::filesystem::path& path) {
  return parse_problem(read_text(path), path.string(), path.parent_path());
}

ConstraintsFile parse_constraints(const std::string& text, const std::string& source,
                                  const std::filesystem::path& base_dir) {
  const json root = parse_json(text, source);
  const Doc doc{text, source, base_dir};
  const auto top = json::json_pointer("");
  if (!root.is_object()) doc.fail(top, "expected an object");
  ConstraintsFile out;
  out.z = doc.finite_vector(doc.field(root, top, "z"), json::json_pointer("/z"));
  const Index d = out.z.size();
  if (d == 0) doc.fail(json::json_pointer("/z"), "z must be non-empty");
  const json& list = doc.field(root, top, "constraints");
  const auto list_at = json::json_pointer("/constraints");
  if (!list.is_array()) doc.fail(list_at, "expected an array");
  if (list.empty()) doc.fail(list_at, "constraint list is empty");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto at = list_at / i;
    const json& c = list[i];
    LinearOperator L = doc.op(c.contains("operator") ? &c["operator"] : nullptr, at / "operator", d);
    ConvexSetDescriptor set = doc.set(doc.field(c, at, "set"), at / "set");
    if (set.dim() != L.dim_out()) {
      doc.fail(at / "set", "set dimension " + std::to_string(set.dim()) + " differs from operator output " + std::to_string(L.dim_out()));
    }
    Vector r = doc.shift(c, at, L.dim_out());
    out.constraints.push_back({std::move(L), std::move(r), std::move(set)});
  }
  out.slater_point = doc.slater(root, d);
  out.settings = doc.settings(root);
  return out;
}

ConstraintsFile load_constraints(const std::filesystem::path& path) {
  return parse_constraints(read_text(path), path.string(), path.parent_path());
}

void apply_settings(const SolverSettings& s, SolverConfig& config) {
  if (s.tol) config.tol = *s.tol;
  if (s.max_iter) config.max_iter = *s.max_iter;
  if (s.gamma) config.gamma = constant_schedule(*s.gamma);
  if (s.lambda) config.lambda = constant_schedule(*s.lambda);
  if (s.epsilon) config.epsilon = *s.epsilon;
}

namespace {

json vector_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json certificate_json(const Certificate& c) {
  json j;
  j["method"] = to_string(c.method);
  j["reference_x"] = vector_json(c.reference_x);
  j["guaranteed_radius"] = c.guaranteed_radius;
  if (!c.reference_duals.empty()) {
    json d = json::array();
    for (const auto& v : c.reference_duals) d.push_back(vector_json(v));
    j["reference_duals"] = d;
  }
  return j;
}

Certificate certificate_from(const json& j, const json::json_pointer& at, const Doc& doc) {
  Certificate c;
  const json& m = doc.field(j, at, "method");
  if (!m.is_string()) doc.fail(at / "method", "expected a string");
  try {
    c.method = certificate_method_from_string(m.get<std::string>());
  } catch (const std::invalid_argument& e) {
    doc.fail(at / "method", e.what());
  }
  c.reference_x = doc.finite_vector(doc.field(j, at, "reference_x"), at / "reference_x");
  c.guaranteed_radius = doc.real(doc.field(j, at, "guaranteed_radius"), at / "guaranteed_radius");
  if (!(c.guaranteed_radius > 0.0)) doc.fail(at / "guaranteed_radius", "radius must be positive");
  if (j.contains("reference_duals")) {
    const json& d = j["reference_duals"];
    for (std::size_t i = 0; i < d.size(); ++i) c.reference_duals.push_back(doc.finite_vector(d[i], at / "reference_duals" / i));
  }
  return c;
}

}  // namespace

std::string certificate_to_json(const Certificate& c) { return certificate_json(c).dump(2); }

Certificate certificate_from_json(const std::string& text, const std::string& source) {
  const json root = parse_json(text, source);
  return certificate_from(root, json::json_pointer(""), Doc{text, source, {}});
}

Fixture load_fixture(const std::filesystem::path& path) {
  Fixture f;
  f.text = read_text(path);
  const std::string source = path.string();
  const json root = parse_json(f.text, source);
  const Doc doc{f.text, source, path.parent_path()};
  f.file = problem_from_json(root, doc);
  f.name = root.contains("name") && root["name"].is_string() ? root["name"].get<std::string>() : path.stem().string();
  if (root.contains("certificates")) {
    const json& list = root["certificates"];
    const auto at = json::json_pointer("/certificates");
    if (!list.is_array()) doc.fail(at, "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      Certificate c = certificate_from(list[i], at / i, doc);
      if (c.reference_x.size() != f.file.problem.dim()) doc.fail(at / i / "reference_x", "dimension differs from z");
      f.certificates.push_back(std::move(c));
    }
  }
  return f;
}

std::vector<Fixture> load_fixtures(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Fixture> out;
  for (const auto& p : files) out.push_back(load_fixture(p));
  return out;
}

void store_certificates(const std::filesystem::path& path, const std::vector<Certificate>& certificates) {
  json root = parse_json(read_text(path), path.string());
  json list = json::array();
  for (const auto& c : certificates) list.push_back(certificate_json(c));
  root["certificates"] = list;
  write_text(path, root.dump(2) + "\n");
}

}  // namespace dualprox::io
