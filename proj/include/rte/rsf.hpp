#pragma once

// Recursive skeletonization factorization: a fast direct solver for the
// Nystrom systems with inhomogeneous coefficients. Points (grid centers, or
// (center, mode) pairs in the anisotropic case) are clustered in a complete
// quadtree; per box, the coupling of its active points to the rest of the
// system is compressed by an interpolative decomposition against the
// near-field neighbors plus a proxy circle, the redundant points are
// eliminated by block Gaussian elimination, and the surviving skeletons are
// passed to the parent level. The result is a multiplicative factorization
// of A supporting fast apply and inverse-apply.

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "rte/angular.hpp"
#include "rte/kernel.hpp"

namespace rte {

// A point of the discretized system: spatial cell center plus the index of
// its Fourier mode in the active ModeSet (0 for isotropic systems).
struct GeneralizedPoint {
  Vec2 pos;
  int mode_idx = 0;
};

class ClusterTree {
 public:
  struct Box {
    int level = 0;
    int parent = -1;
    std::array<int, 4> children{-1, -1, -1, -1};
    int ix = 0, iy = 0;  // integer coordinates within the level
    Vec2 center;
    double half = 0.5;  // half side length
    std::vector<int> points;  // leaf boxes only

    bool is_leaf() const { return children[0] < 0; }
  };

  // Complete (uniform-depth) quadtree over [0,1]^2, subdivided until no leaf
  // holds more than leaf_capacity points or leaves reach single-cell size
  // (coincident anisotropic points cannot be separated spatially).
  ClusterTree(std::vector<GeneralizedPoint> points, int leaf_capacity);

  // Number of levels including the root (a single-leaf tree has depth 1).
  int depth() const { return depth_; }
  const std::vector<GeneralizedPoint>& points() const { return points_; }
  const std::vector<Box>& boxes() const { return boxes_; }
  const std::vector<int>& level_boxes(int level) const {
    return level_index_[static_cast<size_t>(level)];
  }
  // Same-level boxes within Chebyshev distance 1, excluding b itself.
  std::vector<int> neighbors(int b) const;

 private:
  std::vector<GeneralizedPoint> points_;
  std::vector<Box> boxes_;
  std::vector<std::vector<int>> level_index_;
  int depth_ = 1;
};

template <class Scalar>
using DenseMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using DenseVec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
struct IdResult {
  std::vector<int> skel;  // local column indices, pivot order
  std::vector<int> red;
  DenseMat<Scalar> T;  // |skel| x |red|: cols[red] ~ cols[skel] * T
};

// Column interpolative decomposition at relative tolerance eps, via
// column-pivoted Householder QR truncated where |R_kk| <= eps*|R_00|.
// Pivoting (largest remaining column norm, first index on ties) makes the
// skeleton selection deterministic.
template <class Scalar>
IdResult<Scalar> interpolative_decomposition(const DenseMat<Scalar>& block,
                                             double eps);

struct ProxyRule {
  double radius_factor = 1.5;  // times the box half-diagonal
  int points = 64;             // spatial proxy points on the circle
};

// Entry generator for the original system matrix A plus the kernel rows
// against proxy circles used to stand in for the far field.
template <class Scalar>
class MatrixSource {
 public:
  virtual ~MatrixSource() = default;
  virtual int size() const = 0;
  // Original entries A(rows, cols); between-box blocks of active points keep
  // exactly these values throughout the elimination.
  virtual DenseMat<Scalar> block(const std::vector<int>& rows,
                                 const std::vector<int>& cols) const = 0;
  // Kernel interactions observed at proxy circle points (rows) from the
  // given generalized points (cols), spanning possible far-field rows.
  virtual DenseMat<Scalar> proxy_rows(const std::vector<Vec2>& proxy,
                                      const std::vector<int>& cols) const = 0;
  // Transposed-side analogue for unsymmetric systems: interactions of the
  // given points observed at the proxy circle, returned transposed so that
  // entry (p, c) couples proxy point p with column point c.
  virtual DenseMat<Scalar> proxy_cols(const std::vector<Vec2>& proxy,
                                      const std::vector<int>& cols) const = 0;
  virtual bool symmetric() const = 0;
};

struct FactorStats {
  double eps = 0.0;
  int levels = 0;
  std::vector<int> level_skeleton;   // surviving skeleton points per level
  std::vector<int> level_redundant;  // eliminated points per level
  int root_size = 0;
  std::size_t stored_scalars = 0;  // memory estimate in matrix elements
};

template <class Scalar>
class SkelFactorization {
 public:
  SkelFactorization(const ClusterTree& tree, const MatrixSource<Scalar>& src,
                    double eps, ProxyRule proxy = {});

  DenseVec<Scalar> apply(const DenseVec<Scalar>& x) const;
  DenseVec<Scalar> solve(const DenseVec<Scalar>& b) const;
  const FactorStats& stats() const { return stats_; }

 private:
  struct BoxFactor {
    std::vector<int> red, skel;  // global point ids
    DenseMat<Scalar> T;          // |skel| x |red|
    DenseMat<Scalar> b_rr;
    Eigen::PartialPivLU<DenseMat<Scalar>> b_rr_lu;
    DenseMat<Scalar> b_rs, b_sr;
  };

  std::vector<BoxFactor> factors_;  // elimination order
  std::vector<int> root_ids_;
  DenseMat<Scalar> root_;
  Eigen::PartialPivLU<DenseMat<Scalar>> root_lu_;
  FactorStats stats_;
  int n_ = 0;
};

extern template class SkelFactorization<double>;
extern template class SkelFactorization<Complex>;
extern template IdResult<double> interpolative_decomposition<double>(
    const DenseMat<double>&, double);
extern template IdResult<Complex> interpolative_decomposition<Complex>(
    const DenseMat<Complex>&, double);

struct RsfOptions {
  double eps = 1e-6;
  int leaf_capacity = 64;
  ProxyRule proxy;
  KernelConfig kernel;
};

struct RsfSolveResult {
  std::vector<double> u;
  std::vector<double> u_tilde;  // symmetric isotropic path only
  std::optional<ModalSolution> modal;
};

// Factorize once, solve for many right-hand sides at apply/solve cost each.
class RsfSolver {
 public:
  // Isotropic: symmetric form when mu_s stays above the floor, otherwise the
  // unsymmetrized fallback.
  RsfSolver(const Grid& grid, const Medium& medium, const RsfOptions& opt = {});
  // Anisotropic (I - K) over (cell, mode) generalized points.
  RsfSolver(const Grid& grid, const Medium& medium, const PhaseFunction& phase,
            const ModeSet& modes, const RsfOptions& opt = {});
  ~RsfSolver();
  RsfSolver(RsfSolver&&) noexcept;

  RsfSolveResult solve(const std::vector<double>& f) const;
  const FactorStats& stats() const;

  // Raw access for oracle tests: apply/solve on system-ordered vectors.
  Eigen::VectorXd apply_iso(const Eigen::VectorXd& x) const;
  Eigen::VectorXd solve_iso(const Eigen::VectorXd& b) const;
  Eigen::VectorXcd apply_aniso(const Eigen::VectorXcd& x) const;
  Eigen::VectorXcd solve_aniso(const Eigen::VectorXcd& b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-shot convenience wrappers.
RsfSolveResult solve_rsf(const Grid& grid, const Medium& medium,
                         const std::vector<double>& f,
                         const RsfOptions& opt = {});
RsfSolveResult solve_rsf(const Grid& grid, const Medium& medium,
                         const PhaseFunction& phase, const ModeSet& modes,
                         const std::vector<double>& f,
                         const RsfOptions& opt = {});

}  // namespace rte
