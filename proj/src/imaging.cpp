#include "dualprox/imaging.hpp"

#include "dualprox/convex_set.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace dualprox {

namespace {

void require_grid(int width, int height) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("image grid: sides must be positive");
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Raw kernels on flat storage shared by the typed API and the operators.
Vector gradient_flat(const Vector& x, int w, int h) {
  const Index n = static_cast<Index>(w) * h;
  Vector g = Vector::Zero(2 * n);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const Index i = static_cast<Index>(r) * w + c;
      if (c + 1 < w) g[i] = x[i + 1] - x[i];
      if (r + 1 < h) g[n + i] = x[i + w] - x[i];
    }
  }
  return g;
}

Vector divergence_flat(const Vector& p, int w, int h) {
  const Index n = static_cast<Index>(w) * h;
  Vector d(n);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const Index i = static_cast<Index>(r) * w + c;
      double v = 0.0;
      if (c + 1 < w) v += p[i];
      if (c > 0) v -= p[i - 1];
      if (r + 1 < h) v += p[n + i];
      if (r > 0) v -= p[n + i - w];
      d[i] = v;
    }
  }
  return d;
}

Vector disk_projection_flat(const Vector& p, Index n) {
  Vector out(p.size());
  for (Index i = 0; i < n; ++i) {
    const double f = 1.0 / std::max(1.0, std::hypot(p[i], p[n + i]));
    out[i] = f * p[i];
    out[n + i] = f * p[n + i];
  }
  return out;
}

double tv_flat(const Vector& g, Index n) {
  double s = 0.0;
  for (Index i = 0; i < n; ++i) s += std::hypot(g[i], g[n + i]);
  return s;
}

// In-place orthonormal Haar transform of `len` samples spaced `stride` apart.
void haar_forward_1d(double* x, int len, int stride, std::vector<double>& buf) {
  buf.resize(len);
  for (int span = len; span > 1; span /= 2) {
    const int half = span / 2;
    for (int i = 0; i < half; ++i) {
      const double a = x[(2 * i) * stride];
      const double b = x[(2 * i + 1) * stride];
      buf[i] = (a + b) * std::numbers::sqrt2 / 2.0;
      buf[half + i] = (a - b) * std::numbers::sqrt2 / 2.0;
    }
    for (int i = 0; i < span; ++i) x[i * stride] = buf[i];
  }
}

void haar_inverse_1d(double* x, int len, int stride, std::vector<double>& buf) {
  buf.resize(len);
  for (int span = 2; span <= len; span *= 2) {
    const int half = span / 2;
    for (int i = 0; i < half; ++i) {
      const double s = x[i * stride];
      const double d = x[(half + i) * stride];
      buf[2 * i] = (s + d) * std::numbers::sqrt2 / 2.0;
      buf[2 * i + 1] = (s - d) * std::numbers::sqrt2 / 2.0;
    }
    for (int i = 0; i < span; ++i) x[i * stride] = buf[i];
  }
}

Vector haar_2d(const Vector& in, int w, int h, bool forward) {
  Vector x = in;
  std::vector<double> buf;
  auto pass = forward ? haar_forward_1d : haar_inverse_1d;
  for (int r = 0; r < h; ++r) pass(x.data() + static_cast<Index>(r) * w, w, 1, buf);
  for (int c = 0; c < w; ++c) pass(x.data() + c, h, w, buf);
  return x;
}

}  // namespace

ImageGrid ImageGrid::zeros(int width, int height) {
  require_grid(width, height);
  return {width, height, Vector::Zero(static_cast<Index>(width) * height)};
}

ImageGrid ImageGrid::from_pixels(int width, int height, Vector pixels) {
  require_grid(width, height);
  require_dim(pixels, static_cast<Index>(width) * height, "image pixels");
  require_finite(pixels, "image pixels");
  return {width, height, std::move(pixels)};
}

DualField DualField::zeros(int width, int height) {
  require_grid(width, height);
  return {width, height, Vector::Zero(2 * static_cast<Index>(width) * height)};
}

DualField forward_gradient(const ImageGrid& x) {
  require_dim(x.pixels, x.size(), "gradient input");
  return {x.width, x.height, gradient_flat(x.pixels, x.width, x.height)};
}

ImageGrid backward_divergence(const DualField& y) {
  require_dim(y.data, 2 * y.pixel_count(), "divergence input");
  return {y.width, y.height, divergence_flat(y.data, y.width, y.height)};
}

double tv(const ImageGrid& x) { return tv_flat(gradient_flat(x.pixels, x.width, x.height), x.size()); }

DualField project_disk_field(const DualField& y) {
  require_dim(y.data, 2 * y.pixel_count(), "disk projection input");
  return {y.width, y.height, disk_projection_flat(y.data, y.pixel_count())};
}

double gradient_norm(int width, int height) {
  require_grid(width, height);
  auto top = [](int n) {
    const double s = std::sin(std::numbers::pi * (n - 1) / (2.0 * n));
    return 4.0 * s * s;
  };
  return std::sqrt(top(width) + top(height));
}

LinearOperator gradient_operator(int width, int height) {
  const Index n = static_cast<Index>(width) * height;
  return LinearOperator(
      n, 2 * n, [width, height](const Vector& x) { return gradient_flat(x, width, height); },
      [width, height](const Vector& p) -> Vector { return -divergence_flat(p, width, height); },
      gradient_norm(width, height), "gradient");
}

OrthonormalBasisOp identity_basis(int width, int height) {
  require_grid(width, height);
  const Index n = static_cast<Index>(width) * height;
  return {"identity", identity_operator(n), identity_operator(n)};
}

OrthonormalBasisOp haar_basis(int width, int height) {
  require_grid(width, height);
  if (!is_power_of_two(width) || !is_power_of_two(height)) {
    throw std::invalid_argument("haar basis: grid sides must be powers of two");
  }
  const Index n = static_cast<Index>(width) * height;
  auto fwd = [width, height](const Vector& x) { return haar_2d(x, width, height, true); };
  auto inv = [width, height](const Vector& c) { return haar_2d(c, width, height, false); };
  return {"haar", LinearOperator(n, n, fwd, inv, 1.0, "haar_analysis"),
          LinearOperator(n, n, inv, fwd, 1.0, "haar_synthesis")};
}

OrthonormalBasisOp make_basis(const std::string& name, int width, int height) {
  if (name == "identity") return identity_basis(width, height);
  if (name == "haar") return haar_basis(width, height);
  throw std::invalid_argument("unknown basis '" + name + "' (expected identity or haar)");
}

LinearOperator downsample_operator(int width, int height, int factor) {
  require_grid(width, height);
  if (factor <= 0 || width % factor != 0 || height % factor != 0) {
    throw std::invalid_argument("downsample: factor must divide both sides");
  }
  const int ow = width / factor;
  const int oh = height / factor;
  const double inv_area = 1.0 / (static_cast<double>(factor) * factor);
  auto fwd = [=](const Vector& x) -> Vector {
    Vector y = Vector::Zero(static_cast<Index>(ow) * oh);
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) y[(r / factor) * ow + c / factor] += x[static_cast<Index>(r) * width + c];
    }
    return inv_area * y;
  };
  auto adj = [=](const Vector& y) -> Vector {
    Vector x(static_cast<Index>(width) * height);
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) x[static_cast<Index>(r) * width + c] = inv_area * y[(r / factor) * ow + c / factor];
    }
    return x;
  };
  return LinearOperator(static_cast<Index>(width) * height, static_cast<Index>(ow) * oh, fwd, adj,
                        1.0 / factor, "downsample");
}

Vector degrade(const ImageGrid& x, const LinearOperator& op, const Vector& noise) {
  Vector y = op.apply(x.pixels);
  require_same_dim(y, noise, "degrade noise");
  return y + noise;
}

Vector gaussian_noise(Index size, double amplitude, std::uint64_t seed) {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw std::invalid_argument("noise amplitude must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector s(size);
  for (Index i = 0; i < size; ++i) s[i] = amplitude * normal(rng);
  return s;
}

void MeasurementModel::validate() const {
  require_grid(width, height);
  if (operators.empty()) throw std::invalid_argument("measurement model: no measurements");
  if (operators.size() != data.size()) throw std::invalid_argument("measurement model: one data vector per operator");
  const Index n = static_cast<Index>(width) * height;
  for (std::size_t i = 0; i < operators.size(); ++i) {
    if (operators[i].dim_in() != n) throw DimensionError("measurement operator input differs from the image size");
    require_dim(data[i], operators[i].dim_out(), "measurement data");
    require_finite(data[i], "measurement data");
  }
}

namespace {

void require_recovery_weights(const MeasurementModel& model, const WeightVector& weights) {
  if (weights.size() != model.operators.size() + 2) {
    throw std::invalid_argument("recovery: need one weight per measurement plus two");
  }
}

}  // namespace

double recovery_objective(const MeasurementModel& model, const OrthonormalBasisOp& basis,
                          const WeightVector& weights, const ImageGrid& x) {
  model.validate();
  require_recovery_weights(model, weights);
  const std::size_t p = model.operators.size();
  double total = 0.0;
  for (std::size_t i = 0; i < p; ++i) total += weights[i] * (model.operators[i].apply(x.pixels) - model.data[i]).norm();
  const Vector c = basis.analysis.apply(x.pixels);
  total += weights[p] * c.lpNorm<1>() + 0.5 * c.squaredNorm();
  total += weights[p + 1] * tv(x);
  return total;
}

CompositeProxProblem recovery_problem(const MeasurementModel& model, const OrthonormalBasisOp& basis,
                                      const WeightVector& weights) {
  model.validate();
  require_recovery_weights(model, weights);
  const std::size_t p = model.operators.size();
  const Index n = static_cast<Index>(model.width) * model.height;
  CompositeProxProblem problem;
  problem.z = Vector::Zero(n);
  for (std::size_t i = 0; i < p; ++i) problem.terms.push_back({weights[i], norm2(), model.operators[i], model.data[i]});
  problem.terms.push_back({weights[p], norm1(), basis.analysis, Vector::Zero(n)});
  problem.terms.push_back(
      {weights[p + 1], mixed_norm21(n, 2), gradient_operator(model.width, model.height), Vector::Zero(2 * n)});
  return problem;
}

RecoveryResult recover_image(const MeasurementModel& model, const OrthonormalBasisOp& basis,
                             const WeightVector& weights, const SolverConfig& config) {
  model.validate();
  require_recovery_weights(model, weights);
  const std::size_t p = model.operators.size();
  const int w = model.width;
  const int h = model.height;
  const Index n = static_cast<Index>(w) * h;
  if (basis.analysis.dim_in() != n) throw DimensionError("recovery: basis size differs from the image size");

  std::vector<double> bounds;
  for (const auto& op : model.operators) bounds.push_back(op.norm_upper_bound());
  bounds.push_back(basis.analysis.norm_upper_bound());
  bounds.push_back(gradient_norm(w, h));
  SolverConfig sc = config;
  sc.norm_override.clear();
  const StepSchedule schedule = StepSchedule::resolve(bounds, sc);

  // duals: v[0..p) data terms, nu coefficients, q gradient field
  std::vector<Vector> v;
  Vector nu;
  Vector q;
  if (config.initial_duals.empty()) {
    for (const auto& op : model.operators) v.push_back(Vector::Zero(op.dim_out()));
    nu = Vector::Zero(n);
    q = Vector::Zero(2 * n);
  } else {
    if (config.initial_duals.size() != p + 2) throw ConfigError("initial_duals: one vector per term required");
    for (std::size_t i = 0; i < p; ++i) {
      require_dim(config.initial_duals[i], model.operators[i].dim_out(), "initial dual");
      v.push_back(config.initial_duals[i]);
    }
    nu = config.initial_duals[p];
    q = config.initial_duals[p + 1];
    require_dim(nu, n, "initial coefficient dual");
    require_dim(q, 2 * n, "initial gradient dual");
  }

  auto primal_point = [&]() {
    Vector x = -weights[p] * basis.synthesis.apply(nu) + weights[p + 1] * divergence_flat(q, w, h);
    for (std::size_t i = 0; i < p; ++i) x -= weights[i] * model.operators[i].adjoint(v[i]);
    return x;
  };

  RecoveryResult result;
  Vector x = primal_point();
  Vector previous_x;
  StagnationRule stagnation(config.tol);
  const std::vector<double> w_all = weights.values();
  std::vector<Vector> previous_duals;
  auto all_duals = [&]() {
    std::vector<Vector> d = v;
    d.push_back(nu);
    d.push_back(q);
    return d;
  };
  bool converged = false;
  std::size_t iter = 0;
  std::vector<Vector> y(p);

  for (;; ++iter) {
    for (std::size_t i = 0; i < p; ++i) y[i] = model.operators[i].apply(x) - model.data[i];
    const Vector coeffs = basis.analysis.apply(x);
    const Vector grad = gradient_flat(x, w, h);

    const double half_x_sq = 0.5 * x.squaredNorm();
    double primal = half_x_sq + weights[p] * coeffs.lpNorm<1>() + weights[p + 1] * tv_flat(grad, n);
    ExtendedReal dual = ExtendedReal::finite(half_x_sq);
    // the gap test below only trusts duals inside their balls without slack
    bool strict = true;
    for (std::size_t i = 0; i < p; ++i) {
      primal += weights[i] * y[i].norm();
      const bool inside = v[i].norm() <= 1.0 + kMembershipTolerance;
      strict = strict && v[i].norm() <= 1.0;
      dual += weights[i] * (inside ? ExtendedReal::finite(v[i].dot(model.data[i])) : ExtendedReal::infinity());
    }
    if (nu.size() && nu.lpNorm<Eigen::Infinity>() > 1.0 + kMembershipTolerance) dual = ExtendedReal::infinity();
    strict = strict && (nu.size() == 0 || nu.lpNorm<Eigen::Infinity>() <= 1.0);
    for (Index i = 0; i < n; ++i) {
      const double r = std::hypot(q[i], q[n + i]);
      if (r > 1.0 + kMembershipTolerance) dual = ExtendedReal::infinity();
      strict = strict && r <= 1.0;
    }

    std::optional<double> step_norm;
    if (iter > 0) step_norm = (x - previous_x).norm();
    const double gamma = schedule.gamma(iter);
    const double lambda = schedule.lambda(iter);
    if (config.record_trace) result.trace.append({iter, ExtendedReal::finite(primal), dual, step_norm, gamma, lambda});

    const std::vector<Vector> duals = all_duals();
    if (step_norm && stagnation.update(*step_norm, x.norm(), weighted_dual_norm(duals, previous_duals, w_all),
                                      weighted_dual_norm(duals, {}, w_all))) {
      converged = true;
    }
    if (dual.is_finite() && strict) {
      const double gap = primal + dual.value();
      const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(primal) + std::abs(dual.value()));
      if (gap + roundoff <= 0.5 * config.tol * config.tol) converged = true;
    }
    if (converged || iter >= config.max_iter) break;

    for (std::size_t i = 0; i < p; ++i) {
      Vector t = v[i] + gamma * y[i];
      const double tn = t.norm();
      if (tn > 1.0) t /= tn;
      v[i] += lambda * (t - v[i]);
    }
    const Vector clipped = (nu + gamma * coeffs).cwiseMax(-1.0).cwiseMin(1.0);
    nu += lambda * (clipped - nu);
    q += lambda * (disk_projection_flat(q + gamma * grad, n) - q);

    previous_x = std::move(x);
    previous_duals = duals;
    x = primal_point();
  }

  result.image = ImageGrid{w, h, x};
  result.solution.x = std::move(x);
  result.solution.v = std::move(v);
  result.solution.v.push_back(std::move(nu));
  result.solution.v.push_back(std::move(q));
  result.solution.iterations = iter;
  result.solution.converged = converged;
  return result;
}

}  // namespace dualprox
