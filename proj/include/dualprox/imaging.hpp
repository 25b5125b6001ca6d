#pragma once

#include "dualprox/solver.hpp"
#include "dualprox/spaces.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dualprox {

/// Scalar image, row-major: pixel (row, col) lives at row * width + col.
struct ImageGrid {
  int width = 0;
  int height = 0;
  Vector pixels;

  static ImageGrid zeros(int width, int height);
  static ImageGrid from_pixels(int width, int height, Vector pixels);
  Index size() const { return static_cast<Index>(width) * height; }
  double& at(int row, int col) { return pixels[static_cast<Index>(row) * width + col]; }
  double at(int row, int col) const { return pixels[static_cast<Index>(row) * width + col]; }
};

/// A 2-vector per pixel, stored as two planes: the horizontal components of
/// all pixels first, then the vertical ones.
struct DualField {
  int width = 0;
  int height = 0;
  Vector data;

  static DualField zeros(int width, int height);
  Index pixel_count() const { return static_cast<Index>(width) * height; }
  double& horizontal(int row, int col) { return data[static_cast<Index>(row) * width + col]; }
  double horizontal(int row, int col) const { return data[static_cast<Index>(row) * width + col]; }
  double& vertical(int row, int col) { return data[pixel_count() + static_cast<Index>(row) * width + col]; }
  double vertical(int row, int col) const { return data[pixel_count() + static_cast<Index>(row) * width + col]; }
};

/// Forward differences; the difference across the last column (row) is zero.
DualField forward_gradient(const ImageGrid& x);
/// Backward differences matched to forward_gradient so that
/// <forward_gradient(x), y> = -<x, backward_divergence(y)> exactly.
ImageGrid backward_divergence(const DualField& y);
/// Sum over pixels of the Euclidean norm of the gradient 2-vector.
double tv(const ImageGrid& x);
/// Per pixel: pair / max(1, |pair|).
DualField project_disk_field(const DualField& y);

/// Exact spectral norm of the discrete gradient on a width x height grid
/// (never above sqrt(8)).
double gradient_norm(int width, int height);
/// Gradient as an operator R^N -> R^{2N}; its adjoint is minus the divergence.
LinearOperator gradient_operator(int width, int height);

/// Analysis x -> (<x, e_k>)_k and synthesis (c_k) -> sum_k c_k e_k for an
/// orthonormal basis of the pixel space.
struct OrthonormalBasisOp {
  std::string name;
  LinearOperator analysis;
  LinearOperator synthesis;
};

OrthonormalBasisOp identity_basis(int width, int height);
/// Separable orthonormal Haar wavelets, full depth. Requires power-of-two sides.
OrthonormalBasisOp haar_basis(int width, int height);
OrthonormalBasisOp make_basis(const std::string& name, int width, int height);

/// Block-mean downsampling by `factor` in both directions.
LinearOperator downsample_operator(int width, int height, int factor);

/// T x + noise.
Vector degrade(const ImageGrid& x, const LinearOperator& op, const Vector& noise);
/// Seeded i.i.d. Gaussian samples with standard deviation `amplitude`.
Vector gaussian_noise(Index size, double amplitude, std::uint64_t seed);

/// Measurements r_i = T_i x + s_i of an unknown width x height image.
struct MeasurementModel {
  int width = 0;
  int height = 0;
  std::vector<LinearOperator> operators;
  std::vector<Vector> data;

  void validate() const;
};

/// sum_i w_i ||T_i x - r_i|| + sum_k (w_{p+1} |<x,e_k>| + |<x,e_k>|^2 / 2) + w_{p+2} tv(x)
double recovery_objective(const MeasurementModel& model, const OrthonormalBasisOp& basis,
                          const WeightVector& weights, const ImageGrid& x);

/// The recovery problem written as a composite prox problem at z = 0:
/// norms of the data residuals, an l1 norm on basis coefficients, and the
/// pixelwise 2-1 norm of the gradient. The quadratic comes from Parseval.
CompositeProxProblem recovery_problem(const MeasurementModel& model, const OrthonormalBasisOp& basis,
                                      const WeightVector& weights);

struct RecoveryResult {
  ImageGrid image;
  Solution solution;
  Trace trace;
};

/// Dual splitting with every conjugate prox a projection: unit balls for the
/// data terms, clipping to [-1,1] for the coefficients, and project_disk_field
/// for the gradient term. `weights` has one entry per measurement plus two.
RecoveryResult recover_image(const MeasurementModel& model, const OrthonormalBasisOp& basis,
                             const WeightVector& weights, const SolverConfig& config = {});

}  // namespace dualprox
