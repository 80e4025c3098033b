#include "rte/rsf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "rte/dense.hpp"
#include "rte/errors.hpp"

namespace rte {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

long long cell_key(int ix, int iy) {
  return (static_cast<long long>(ix) << 32) | static_cast<unsigned>(iy);
}

int boxes_before_level(int level) {
  // 1 + 4 + ... + 4^(level-1) = (4^level - 1) / 3
  return static_cast<int>(((1LL << (2 * level)) - 1) / 3);
}

}  // namespace

ClusterTree::ClusterTree(std::vector<GeneralizedPoint> points, int leaf_capacity) {
  if (leaf_capacity < 8) {
    throw InputError("cluster tree leaf capacity must be at least 8");
  }
  if (points.empty()) {
    throw InputError("cluster tree needs at least one point");
  }
  for (const auto& p : points) {
    if (!domain::contains(p.pos)) {
      throw InputError("cluster tree point outside the unit square");
    }
  }
  points_ = std::move(points);

  // Coincident positions (same cell, different modes) cannot be separated by
  // spatial splits; depth growth stops once leaves are down to such groups,
  // so a leaf may then exceed the capacity.
  std::vector<std::pair<double, double>> pos;
  pos.reserve(points_.size());
  for (const auto& p : points_) pos.emplace_back(p.pos.x, p.pos.y);
  std::sort(pos.begin(), pos.end());
  int max_coincident = 1;
  for (size_t i = 0, j = 0; i < pos.size(); i = j) {
    for (j = i; j < pos.size() && pos[j] == pos[i]; ++j) {
    }
    max_coincident = std::max(max_coincident, static_cast<int>(j - i));
  }

  auto max_leaf_count = [&](int level) {
    const double scale = static_cast<double>(1 << level);
    const int dim = (1 << level) - 1;
    std::unordered_map<long long, int> counts;
    int worst = 0;
    for (const auto& p : points_) {
      const int ix = std::clamp(static_cast<int>(p.pos.x * scale), 0, dim);
      const int iy = std::clamp(static_cast<int>(p.pos.y * scale), 0, dim);
      worst = std::max(worst, ++counts[cell_key(ix, iy)]);
    }
    return worst;
  };

  int leaf_level = 0;
  while (true) {
    const int worst = max_leaf_count(leaf_level);
    if (worst <= leaf_capacity || worst <= max_coincident) break;
    ++leaf_level;
  }
  depth_ = leaf_level + 1;

  boxes_.resize(static_cast<size_t>(boxes_before_level(depth_)));
  level_index_.resize(static_cast<size_t>(depth_));
  for (int lev = 0; lev < depth_; ++lev) {
    const int dim = 1 << lev;
    const int offset = boxes_before_level(lev);
    const double side = 1.0 / dim;
    level_index_[static_cast<size_t>(lev)].resize(static_cast<size_t>(dim) * dim);
    for (int iy = 0; iy < dim; ++iy) {
      for (int ix = 0; ix < dim; ++ix) {
        const int id = offset + iy * dim + ix;
        Box& b = boxes_[static_cast<size_t>(id)];
        b.level = lev;
        b.ix = ix;
        b.iy = iy;
        b.half = 0.5 * side;
        b.center = Vec2((ix + 0.5) * side, (iy + 0.5) * side);
        level_index_[static_cast<size_t>(lev)][static_cast<size_t>(iy) * dim + ix] = id;
        if (lev > 0) {
          const int pdim = dim / 2;
          b.parent = boxes_before_level(lev - 1) + (iy / 2) * pdim + ix / 2;
          boxes_[static_cast<size_t>(b.parent)]
              .children[static_cast<size_t>((ix & 1) + 2 * (iy & 1))] = id;
        }
      }
    }
  }

  const int leaf_dim = 1 << leaf_level;
  const int leaf_offset = boxes_before_level(leaf_level);
  const double scale = static_cast<double>(leaf_dim);
  for (int i = 0; i < static_cast<int>(points_.size()); ++i) {
    const Vec2& p = points_[static_cast<size_t>(i)].pos;
    const int ix = std::clamp(static_cast<int>(p.x * scale), 0, leaf_dim - 1);
    const int iy = std::clamp(static_cast<int>(p.y * scale), 0, leaf_dim - 1);
    boxes_[static_cast<size_t>(leaf_offset + iy * leaf_dim + ix)].points.push_back(i);
  }
}

std::vector<int> ClusterTree::neighbors(int b) const {
  const Box& box = boxes_[static_cast<size_t>(b)];
  const int dim = 1 << box.level;
  const int offset = boxes_before_level(box.level);
  std::vector<int> out;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const int nx = box.ix + dx;
      const int ny = box.iy + dy;
      if (nx < 0 || ny < 0 || nx >= dim || ny >= dim) continue;
      out.push_back(offset + ny * dim + nx);
    }
  }
  return out;
}

template <class Scalar>
IdResult<Scalar> interpolative_decomposition(const DenseMat<Scalar>& block,
                                             double eps) {
  IdResult<Scalar> out;
  const int w = static_cast<int>(block.cols());
  if (w == 0) {
    out.T.resize(0, 0);
    return out;
  }
  if (block.rows() == 0 || block.norm() == 0.0) {
    out.red.resize(static_cast<size_t>(w));
    for (int j = 0; j < w; ++j) out.red[static_cast<size_t>(j)] = j;
    out.T.resize(0, w);
    return out;
  }

  Eigen::ColPivHouseholderQR<DenseMat<Scalar>> qr(block);
  DenseMat<Scalar> R = qr.matrixQR();
  const int kmax = static_cast<int>(std::min(R.rows(), R.cols()));
  const double r00 = std::abs(R(0, 0));
  int rank = 0;
  while (rank < kmax && std::abs(R(rank, rank)) > eps * r00) ++rank;

  const auto& perm = qr.colsPermutation().indices();
  out.skel.resize(static_cast<size_t>(rank));
  out.red.resize(static_cast<size_t>(w - rank));
  for (int j = 0; j < rank; ++j) out.skel[static_cast<size_t>(j)] = perm(j);
  for (int j = rank; j < w; ++j) out.red[static_cast<size_t>(j - rank)] = perm(j);

  if (rank == 0) {
    out.T.resize(0, w);
  } else {
    out.T = R.topLeftCorner(rank, rank)
                .template triangularView<Eigen::Upper>()
                .solve(R.block(0, rank, rank, w - rank));
  }
  return out;
}

template IdResult<double> interpolative_decomposition<double>(
    const DenseMat<double>&, double);
template IdResult<Complex> interpolative_decomposition<Complex>(
    const DenseMat<Complex>&, double);

namespace {

template <class Scalar>
DenseMat<Scalar> gather(const DenseMat<Scalar>& A, const std::vector<int>& rows,
                        const std::vector<int>& cols) {
  DenseMat<Scalar> out(rows.size(), cols.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < cols.size(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          A(rows[r], cols[c]);
    }
  }
  return out;
}

template <class Scalar>
DenseVec<Scalar> part(const DenseVec<Scalar>& v, const std::vector<int>& ids) {
  DenseVec<Scalar> out(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = v(ids[i]);
  }
  return out;
}

template <class Scalar>
void add_at(DenseVec<Scalar>& v, const std::vector<int>& ids,
            const DenseVec<Scalar>& inc) {
  for (size_t i = 0; i < ids.size(); ++i) {
    v(ids[i]) += inc(static_cast<Eigen::Index>(i));
  }
}

template <class Scalar>
void sub_at(DenseVec<Scalar>& v, const std::vector<int>& ids,
            const DenseVec<Scalar>& inc) {
  for (size_t i = 0; i < ids.size(); ++i) {
    v(ids[i]) -= inc(static_cast<Eigen::Index>(i));
  }
}

template <class Scalar>
void set_at(DenseVec<Scalar>& v, const std::vector<int>& ids,
            const DenseVec<Scalar>& val) {
  for (size_t i = 0; i < ids.size(); ++i) {
    v(ids[i]) = val(static_cast<Eigen::Index>(i));
  }
}

std::vector<Vec2> proxy_circle(const Vec2& center, double radius, int count) {
  std::vector<Vec2> pts;
  pts.reserve(static_cast<size_t>(count));
  for (int j = 0; j < count; ++j) {
    const double phi = kTwoPi * j / count;
    pts.emplace_back(center.x + radius * std::cos(phi),
                     center.y + radius * std::sin(phi));
  }
  return pts;
}

template <class Scalar>
void check_pivot_block(const Eigen::PartialPivLU<DenseMat<Scalar>>& lu,
                       const DenseMat<Scalar>& block, int box, int level) {
  bool bad = !block.allFinite();
  if (!bad && block.rows() > 0) {
    const auto diag = lu.matrixLU().diagonal();
    double dmin = std::abs(diag(0));
    for (Eigen::Index i = 1; i < diag.size(); ++i) {
      dmin = std::min(dmin, std::abs(diag(i)));
    }
    bad = !(dmin > 0.0);
  }
  if (bad) {
    std::ostringstream msg;
    msg << "singular or non-finite pivot block in box " << box << " at level "
        << level;
    throw FactorizationError(msg.str());
  }
}

}  // namespace

template <class Scalar>
SkelFactorization<Scalar>::SkelFactorization(const ClusterTree& tree,
                                             const MatrixSource<Scalar>& src,
                                             double eps, ProxyRule proxy) {
  n_ = src.size();
  if (static_cast<int>(tree.points().size()) != n_) {
    throw InputError("cluster tree and matrix source disagree on point count");
  }
  if (!(eps > 0.0)) throw InputError("skeletonization tolerance must be positive");
  if (proxy.points < 8) throw InputError("proxy circle needs at least 8 points");

  stats_.eps = eps;
  stats_.levels = tree.depth();
  stats_.level_skeleton.assign(static_cast<size_t>(tree.depth()), 0);
  stats_.level_redundant.assign(static_cast<size_t>(tree.depth()), 0);

  const int leaf_level = tree.depth() - 1;
  std::vector<std::vector<int>> active(tree.boxes().size());
  std::vector<DenseMat<Scalar>> remainder(tree.boxes().size());

  for (int lev = leaf_level; lev >= 1; --lev) {
    // Every box of the level needs its active set before any elimination:
    // a box's compression constrains its coupling to all still-active
    // neighbors, including the ones the sweep reaches later.
    for (int b : tree.level_boxes(lev)) {
      std::vector<int>& C = active[static_cast<size_t>(b)];
      if (lev == leaf_level) {
        C = tree.boxes()[static_cast<size_t>(b)].points;
      } else {
        const std::array<int, 4>& kids = tree.boxes()[static_cast<size_t>(b)].children;
        size_t total = 0;
        for (int k : kids) total += active[static_cast<size_t>(k)].size();
        C.reserve(total);
        for (int k : kids) {
          const auto& ak = active[static_cast<size_t>(k)];
          C.insert(C.end(), ak.begin(), ak.end());
        }
      }
    }

    for (int b : tree.level_boxes(lev)) {
      const ClusterTree::Box& box = tree.boxes()[static_cast<size_t>(b)];
      const std::vector<int> C = active[static_cast<size_t>(b)];
      if (C.empty()) continue;
      DenseMat<Scalar> self;
      if (lev == leaf_level) {
        self = src.block(C, C);
      } else {
        // Child self blocks carry the accumulated updates, the cross blocks
        // stay original.
        const std::array<int, 4>& kids = box.children;
        self.resize(static_cast<Eigen::Index>(C.size()),
                    static_cast<Eigen::Index>(C.size()));
        Eigen::Index row0 = 0;
        for (int kr : kids) {
          const auto& ar = active[static_cast<size_t>(kr)];
          if (ar.empty()) continue;
          Eigen::Index col0 = 0;
          for (int kc : kids) {
            const auto& ac = active[static_cast<size_t>(kc)];
            if (ac.empty()) continue;
            if (kr == kc) {
              self.block(row0, col0, ar.size(), ac.size()) =
                  remainder[static_cast<size_t>(kr)];
            } else {
              self.block(row0, col0, ar.size(), ac.size()) = src.block(ar, ac);
            }
            col0 += static_cast<Eigen::Index>(ac.size());
          }
          row0 += static_cast<Eigen::Index>(ar.size());
        }
      }

      const int w = static_cast<int>(C.size());

      // Compression target: rows of A over the near field plus proxy-circle
      // kernel rows standing in for the far field; the transposed-side
      // analogues are appended for unsymmetric systems.
      std::vector<DenseMat<Scalar>> pieces;
      for (int nb : tree.neighbors(b)) {
        const auto& an = active[static_cast<size_t>(nb)];
        if (!an.empty()) pieces.push_back(src.block(an, C));
      }
      const double radius = proxy.radius_factor * box.half * std::sqrt(2.0);
      const std::vector<Vec2> circle = proxy_circle(box.center, radius, proxy.points);
      pieces.push_back(src.proxy_rows(circle, C));
      if (!src.symmetric()) {
        for (int nb : tree.neighbors(b)) {
          const auto& an = active[static_cast<size_t>(nb)];
          if (!an.empty()) pieces.push_back(src.block(C, an).transpose());
        }
        pieces.push_back(src.proxy_cols(circle, C));
      }
      Eigen::Index zrows = 0;
      for (const auto& p : pieces) zrows += p.rows();
      DenseMat<Scalar> Z(zrows, w);
      Eigen::Index at = 0;
      for (const auto& p : pieces) {
        Z.middleRows(at, p.rows()) = p;
        at += p.rows();
      }

      IdResult<Scalar> id = interpolative_decomposition<Scalar>(Z, eps);

      std::vector<int> skel_g(id.skel.size()), red_g(id.red.size());
      for (size_t i = 0; i < id.skel.size(); ++i) {
        skel_g[i] = C[static_cast<size_t>(id.skel[i])];
      }
      for (size_t i = 0; i < id.red.size(); ++i) {
        red_g[i] = C[static_cast<size_t>(id.red[i])];
      }
      stats_.level_skeleton[static_cast<size_t>(lev)] += static_cast<int>(skel_g.size());
      stats_.level_redundant[static_cast<size_t>(lev)] += static_cast<int>(red_g.size());

      if (id.red.empty()) {
        // Nothing to eliminate; the box passes its actives up unchanged.
        remainder[static_cast<size_t>(b)] = std::move(self);
        continue;
      }

      const DenseMat<Scalar> a_rr = gather(self, id.red, id.red);
      const DenseMat<Scalar> a_rs = gather(self, id.red, id.skel);
      const DenseMat<Scalar> a_sr = gather(self, id.skel, id.red);
      const DenseMat<Scalar> a_ss = gather(self, id.skel, id.skel);
      const DenseMat<Scalar>& T = id.T;

      // Interpolate (plain transpose on the row side, also for complex),
      // then eliminate the decoupled redundant block.
      BoxFactor f;
      f.red = std::move(red_g);
      f.skel = std::move(skel_g);
      f.T = T;
      f.b_rr = a_rr - T.transpose() * a_sr - a_rs * T + T.transpose() * a_ss * T;
      f.b_rs = a_rs - T.transpose() * a_ss;
      f.b_sr = a_sr - a_ss * T;
      f.b_rr_lu.compute(f.b_rr);
      check_pivot_block(f.b_rr_lu, f.b_rr, b, lev);
      remainder[static_cast<size_t>(b)] = a_ss - f.b_sr * f.b_rr_lu.solve(f.b_rs);
      stats_.stored_scalars += static_cast<size_t>(f.b_rr.size()) +
                               static_cast<size_t>(f.b_rs.size()) +
                               static_cast<size_t>(f.b_sr.size()) +
                               static_cast<size_t>(f.T.size());
      active[static_cast<size_t>(b)] = f.skel;
      factors_.push_back(std::move(f));
    }
  }

  // Root block: dense factorization of whatever survived.
  if (tree.depth() == 1) {
    root_ids_ = tree.boxes()[0].points;
    root_ = src.block(root_ids_, root_ids_);
  } else {
    const auto& kids = tree.boxes()[0].children;
    size_t total = 0;
    for (int k : kids) total += active[static_cast<size_t>(k)].size();
    root_ids_.reserve(total);
    for (int k : kids) {
      const auto& ak = active[static_cast<size_t>(k)];
      root_ids_.insert(root_ids_.end(), ak.begin(), ak.end());
    }
    root_.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
    Eigen::Index row0 = 0;
    for (int kr : kids) {
      const auto& ar = active[static_cast<size_t>(kr)];
      if (ar.empty()) continue;
      Eigen::Index col0 = 0;
      for (int kc : kids) {
        const auto& ac = active[static_cast<size_t>(kc)];
        if (ac.empty()) continue;
        if (kr == kc) {
          root_.block(row0, col0, ar.size(), ac.size()) =
              remainder[static_cast<size_t>(kr)];
        } else {
          root_.block(row0, col0, ar.size(), ac.size()) = src.block(ar, ac);
        }
        col0 += static_cast<Eigen::Index>(ac.size());
      }
      row0 += static_cast<Eigen::Index>(ar.size());
    }
  }
  if (!root_ids_.empty()) {
    root_lu_.compute(root_);
    check_pivot_block(root_lu_, root_, 0, 0);
  }
  stats_.root_size = static_cast<int>(root_ids_.size());
  stats_.level_skeleton[0] = stats_.root_size;
  stats_.stored_scalars += static_cast<size_t>(root_.size());
}

template <class Scalar>
DenseVec<Scalar> SkelFactorization<Scalar>::apply(const DenseVec<Scalar>& x) const {
  if (static_cast<int>(x.size()) != n_) {
    throw InputError("apply: vector length does not match the system");
  }
  DenseVec<Scalar> v = x;
  for (const BoxFactor& f : factors_) {
    add_at(v, f.skel, DenseVec<Scalar>(f.T * part(v, f.red)));
    add_at(v, f.red, DenseVec<Scalar>(f.b_rr_lu.solve(f.b_rs * part(v, f.skel))));
  }
  for (const BoxFactor& f : factors_) {
    set_at(v, f.red, DenseVec<Scalar>(f.b_rr * part(v, f.red)));
  }
  if (!root_ids_.empty()) {
    set_at(v, root_ids_, DenseVec<Scalar>(root_ * part(v, root_ids_)));
  }
  for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) {
    const BoxFactor& f = *it;
    add_at(v, f.skel, DenseVec<Scalar>(f.b_sr * f.b_rr_lu.solve(part(v, f.red))));
    add_at(v, f.red, DenseVec<Scalar>(f.T.transpose() * part(v, f.skel)));
  }
  return v;
}

template <class Scalar>
DenseVec<Scalar> SkelFactorization<Scalar>::solve(const DenseVec<Scalar>& b) const {
  if (static_cast<int>(b.size()) != n_) {
    throw InputError("solve: vector length does not match the system");
  }
  DenseVec<Scalar> v = b;
  for (const BoxFactor& f : factors_) {
    sub_at(v, f.red, DenseVec<Scalar>(f.T.transpose() * part(v, f.skel)));
    sub_at(v, f.skel, DenseVec<Scalar>(f.b_sr * f.b_rr_lu.solve(part(v, f.red))));
  }
  for (const BoxFactor& f : factors_) {
    set_at(v, f.red, DenseVec<Scalar>(f.b_rr_lu.solve(part(v, f.red))));
  }
  if (!root_ids_.empty()) {
    set_at(v, root_ids_, DenseVec<Scalar>(root_lu_.solve(part(v, root_ids_))));
  }
  for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) {
    const BoxFactor& f = *it;
    sub_at(v, f.red, DenseVec<Scalar>(f.b_rr_lu.solve(f.b_rs * part(v, f.skel))));
    sub_at(v, f.skel, DenseVec<Scalar>(f.T * part(v, f.red)));
  }
  return v;
}

template class SkelFactorization<double>;
template class SkelFactorization<Complex>;

namespace {

// A = diag(1/mu_s) - Ktilde (symmetric form) or A = I - K (fallback when
// mu_s may vanish), over the grid cells.
class IsoSource final : public MatrixSource<double> {
 public:
  IsoSource(const Grid& grid, const Medium& medium, const KernelConfig& cfg,
            bool symmetric_form)
      : grid_(grid), eval_(medium, cfg), sym_(symmetric_form) {
    const int n = grid_.size();
    const double h = grid_.h();
    h2_ = h * h;
    mu_s_.resize(static_cast<size_t>(n));
    diag_.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      const Vec2& c = grid_.center(i);
      mu_s_[static_cast<size_t>(i)] = medium.mu_s(c);
      diag_[static_cast<size_t>(i)] =
          sym_ ? eval_.diag_ktilde(c, h) : eval_.diag_kiso(c, h);
    }
  }

  int size() const override { return grid_.size(); }
  bool symmetric() const override { return sym_; }

  DenseMat<double> block(const std::vector<int>& rows,
                         const std::vector<int>& cols) const override {
    DenseMat<double> out(rows.size(), cols.size());
    for (size_t r = 0; r < rows.size(); ++r) {
      const int i = rows[r];
      const Vec2& xi = grid_.center(i);
      for (size_t c = 0; c < cols.size(); ++c) {
        const int j = cols[c];
        double v;
        if (i == j) {
          v = (sym_ ? 1.0 / mu_s_[static_cast<size_t>(i)] : 1.0) -
              diag_[static_cast<size_t>(i)];
        } else {
          v = -h2_ * eval_.ktilde(xi, grid_.center(j));
          if (!sym_) v *= mu_s_[static_cast<size_t>(j)];
        }
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
      }
    }
    return out;
  }

  DenseMat<double> proxy_rows(const std::vector<Vec2>& proxy,
                              const std::vector<int>& cols) const override {
    DenseMat<double> out(proxy.size(), cols.size());
    for (size_t r = 0; r < proxy.size(); ++r) {
      for (size_t c = 0; c < cols.size(); ++c) {
        const int j = cols[c];
        double v = -h2_ * eval_.ktilde(proxy[r], grid_.center(j));
        if (!sym_) v *= mu_s_[static_cast<size_t>(j)];
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
      }
    }
    return out;
  }

  DenseMat<double> proxy_cols(const std::vector<Vec2>& proxy,
                              const std::vector<int>& cols) const override {
    // Row side of the transposed coupling; per-row weights are immaterial to
    // the column space, so the proxy-side mu_s factor is dropped.
    DenseMat<double> out(proxy.size(), cols.size());
    for (size_t r = 0; r < proxy.size(); ++r) {
      for (size_t c = 0; c < cols.size(); ++c) {
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            -h2_ * eval_.ktilde(grid_.center(cols[c]), proxy[r]);
      }
    }
    return out;
  }

 private:
  Grid grid_;
  KernelEvaluator eval_;
  bool sym_;
  double h2_ = 0.0;
  std::vector<double> mu_s_, diag_;
};

// A = I - K over (cell, mode) points, id = mode_idx * N + cell, matching the
// mode-blocked dense and modal layouts.
class AnisoSource final : public MatrixSource<Complex> {
 public:
  AnisoSource(const Grid& grid, const Medium& medium, const PhaseFunction& phase,
              const ModeSet& modes, const KernelConfig& cfg)
      : grid_(grid),
        modes_(modes),
        eval_(medium, cfg),
        sigma_fn_(phase.sigma_hat_fn()) {
    const int n = grid_.size();
    const int m = modes_.count();
    const double h = grid_.h();
    h2_ = h * h;
    mu_s_.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      mu_s_[static_cast<size_t>(i)] = medium.mu_s(grid_.center(i));
    }
    sig_.resize(static_cast<size_t>(n) * m);
    for (int mi = 0; mi < m; ++mi) {
      for (int i = 0; i < n; ++i) {
        sig_[static_cast<size_t>(mi) * n + i] =
            sigma_fn_(grid_.center(i), modes_.mode(mi));
      }
    }
  }

  int size() const override { return grid_.size() * modes_.count(); }
  bool symmetric() const override { return false; }

  DenseMat<Complex> block(const std::vector<int>& rows,
                          const std::vector<int>& cols) const override {
    const int n = grid_.size();
    std::unordered_map<long long, std::pair<double, double>> pair_cache;
    DenseMat<Complex> out(rows.size(), cols.size());
    for (size_t r = 0; r < rows.size(); ++r) {
      const int i = rows[r] % n;
      const int mi = rows[r] / n;
      const Vec2& xi = grid_.center(i);
      for (size_t c = 0; c < cols.size(); ++c) {
        const int j = cols[c] % n;
        const int mj = cols[c] / n;
        Complex v;
        if (i == j) {
          v = (rows[r] == cols[c] ? 1.0 : 0.0) - diag_entry(i, mi, mj);
        } else {
          // ktilde and the displacement angle are shared by all mode pairs
          // of the same cell pair.
          const long long key = static_cast<long long>(i) * n + j;
          auto it = pair_cache.find(key);
          if (it == pair_cache.end()) {
            it = pair_cache
                     .emplace(key, std::make_pair(eval_.ktilde(xi, grid_.center(j)),
                                                  angle_between(xi, grid_.center(j))))
                     .first;
          }
          const auto& [kt, theta] = it->second;
          v = -h2_ * kt * mu_s_[static_cast<size_t>(j)] *
              sig_[static_cast<size_t>(mj) * n + j] *
              std::polar(1.0, (modes_.mode(mj) - modes_.mode(mi)) * theta);
        }
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
      }
    }
    return out;
  }

  DenseMat<Complex> proxy_rows(const std::vector<Vec2>& proxy,
                               const std::vector<int>& cols) const override {
    const int n = grid_.size();
    const int m = modes_.count();
    DenseMat<Complex> out(static_cast<size_t>(m) * proxy.size(), cols.size());
    for (size_t c = 0; c < cols.size(); ++c) {
      const int j = cols[c] % n;
      const int mj = cols[c] / n;
      const Vec2& xj = grid_.center(j);
      const Complex w = mu_s_[static_cast<size_t>(j)] *
                        sig_[static_cast<size_t>(mj) * n + j];
      for (size_t p = 0; p < proxy.size(); ++p) {
        const double kt = eval_.ktilde(proxy[p], xj);
        const double theta = angle_between(proxy[p], xj);
        for (int mi = 0; mi < m; ++mi) {
          out(static_cast<Eigen::Index>(static_cast<size_t>(mi) * proxy.size() + p),
              static_cast<Eigen::Index>(c)) =
              -h2_ * kt * w *
              std::polar(1.0, (modes_.mode(mj) - modes_.mode(mi)) * theta);
        }
      }
    }
    return out;
  }

  DenseMat<Complex> proxy_cols(const std::vector<Vec2>& proxy,
                               const std::vector<int>& cols) const override {
    const int n = grid_.size();
    const int m = modes_.count();
    DenseMat<Complex> out(static_cast<size_t>(m) * proxy.size(), cols.size());
    for (size_t c = 0; c < cols.size(); ++c) {
      const int j = cols[c] % n;
      const int mj = cols[c] / n;
      const Vec2& xj = grid_.center(j);
      for (size_t p = 0; p < proxy.size(); ++p) {
        const double kt = eval_.ktilde(xj, proxy[p]);
        const double theta = angle_between(xj, proxy[p]);
        for (int mi = 0; mi < m; ++mi) {
          out(static_cast<Eigen::Index>(static_cast<size_t>(mi) * proxy.size() + p),
              static_cast<Eigen::Index>(c)) =
              -h2_ * kt *
              std::polar(1.0, (modes_.mode(mi) - modes_.mode(mj)) * theta);
        }
      }
    }
    return out;
  }

 private:
  Complex diag_entry(int cell, int mi, int mj) const {
    const long long key =
        (static_cast<long long>(cell) * modes_.count() + mi) * modes_.count() + mj;
    auto it = diag_cache_.find(key);
    if (it == diag_cache_.end()) {
      const Complex v = eval_.diag_kaniso(grid_.center(cell), grid_.h(),
                                          modes_.mode(mi), modes_.mode(mj),
                                          sigma_fn_);
      it = diag_cache_.emplace(key, v).first;
    }
    return it->second;
  }

  Grid grid_;
  ModeSet modes_;
  KernelEvaluator eval_;
  SigmaHatFn sigma_fn_;
  double h2_ = 0.0;
  std::vector<double> mu_s_;
  std::vector<Complex> sig_;
  mutable std::unordered_map<long long, Complex> diag_cache_;
};

}  // namespace

struct RsfSolver::Impl {
  Grid grid;
  Medium medium;
  RsfOptions opt;
  bool aniso = false;
  bool symmetric = false;
  std::optional<PhaseFunction> phase;
  std::optional<ModeSet> modes;
  std::vector<double> mu_s;
  std::unique_ptr<KernelEvaluator> eval;  // rhs assembly on the fallback paths
  std::unique_ptr<ClusterTree> tree;
  std::unique_ptr<MatrixSource<double>> src_d;
  std::unique_ptr<MatrixSource<Complex>> src_z;
  std::unique_ptr<SkelFactorization<double>> fac_d;
  std::unique_ptr<SkelFactorization<Complex>> fac_z;

  Impl(const Grid& g, const Medium& med, const RsfOptions& o)
      : grid(g), medium(med), opt(o) {
    medium.validate(grid);
    fill_mu_s();
    symmetric = *std::min_element(mu_s.begin(), mu_s.end()) >= DenseSystem::kMuSFloor;
    std::vector<GeneralizedPoint> pts;
    pts.reserve(static_cast<size_t>(grid.size()));
    for (int i = 0; i < grid.size(); ++i) pts.push_back({grid.center(i), 0});
    tree = std::make_unique<ClusterTree>(std::move(pts), opt.leaf_capacity);
    src_d = std::make_unique<IsoSource>(grid, medium, opt.kernel, symmetric);
    fac_d = std::make_unique<SkelFactorization<double>>(*tree, *src_d, opt.eps,
                                                        opt.proxy);
  }

  Impl(const Grid& g, const Medium& med, const PhaseFunction& ph,
       const ModeSet& ms, const RsfOptions& o)
      : grid(g), medium(med), opt(o), aniso(true), phase(ph), modes(ms) {
    medium.validate(grid);
    fill_mu_s();
    std::vector<GeneralizedPoint> pts;
    pts.reserve(static_cast<size_t>(grid.size()) * ms.count());
    for (int m = 0; m < ms.count(); ++m) {
      for (int i = 0; i < grid.size(); ++i) pts.push_back({grid.center(i), m});
    }
    tree = std::make_unique<ClusterTree>(std::move(pts), opt.leaf_capacity);
    src_z = std::make_unique<AnisoSource>(grid, medium, *phase, *modes, opt.kernel);
    fac_z = std::make_unique<SkelFactorization<Complex>>(*tree, *src_z, opt.eps,
                                                         opt.proxy);
  }

  void fill_mu_s() {
    mu_s.resize(static_cast<size_t>(grid.size()));
    for (int i = 0; i < grid.size(); ++i) {
      mu_s[static_cast<size_t>(i)] = medium.mu_s(grid.center(i));
    }
  }

  KernelEvaluator& evaluator() {
    if (!eval) eval = std::make_unique<KernelEvaluator>(medium, opt.kernel);
    return *eval;
  }

  // Ktilde f by direct summation; only the fallback paths pay this O(N^2).
  Eigen::VectorXd ktilde_apply_direct(const std::vector<double>& f) {
    KernelEvaluator& ev = evaluator();
    const int n = grid.size();
    const double h = grid.h();
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) {
      const Vec2& xi = grid.center(i);
      double acc = ev.diag_ktilde(xi, h) * f[static_cast<size_t>(i)];
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        acc += h * h * ev.ktilde(xi, grid.center(j)) * f[static_cast<size_t>(j)];
      }
      out(i) = acc;
    }
    return out;
  }

  RsfSolveResult solve_iso(const std::vector<double>& f) {
    const int n = grid.size();
    Eigen::VectorXd rhs;
    if (symmetric) {
      // Ktilde f = diag(1/mu_s) f - A f at the factorization's accuracy.
      Eigen::VectorXd fv(n);
      for (int i = 0; i < n; ++i) fv(i) = f[static_cast<size_t>(i)];
      const Eigen::VectorXd af = fac_d->apply(fv);
      rhs.resize(n);
      for (int i = 0; i < n; ++i) {
        rhs(i) = fv(i) / mu_s[static_cast<size_t>(i)] - af(i);
      }
    } else {
      rhs = ktilde_apply_direct(f);
    }
    const Eigen::VectorXd sol = fac_d->solve(rhs);
    RsfSolveResult out;
    out.u.resize(static_cast<size_t>(n));
    if (symmetric) {
      out.u_tilde.resize(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) {
        out.u_tilde[static_cast<size_t>(i)] = sol(i);
        out.u[static_cast<size_t>(i)] = sol(i) / mu_s[static_cast<size_t>(i)];
      }
    } else {
      for (int i = 0; i < n; ++i) out.u[static_cast<size_t>(i)] = sol(i);
    }
    return out;
  }

  RsfSolveResult solve_aniso(const std::vector<double>& f) {
    const int n = grid.size();
    const int m = modes->count();
    const int zero_block = modes->index_of(0);
    Eigen::VectorXcd rhs;
    const double floor = DenseSystem::kMuSFloor;
    if (*std::min_element(mu_s.begin(), mu_s.end()) >= floor) {
      // K g = g - A g with g supported on the k = 0 block.
      Eigen::VectorXcd g = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n) * m);
      for (int i = 0; i < n; ++i) {
        g(static_cast<Eigen::Index>(zero_block) * n + i) =
            f[static_cast<size_t>(i)] / mu_s[static_cast<size_t>(i)];
      }
      rhs = g - fac_z->apply(g);
    } else {
      // mu_s cancels against g entrywise, leaving the phase-carrying Ktilde.
      KernelEvaluator& ev = evaluator();
      const double h = grid.h();
      rhs.resize(static_cast<Eigen::Index>(n) * m);
      for (int mi = 0; mi < m; ++mi) {
        const int k = modes->mode(mi);
        for (int i = 0; i < n; ++i) {
          const Vec2& xi = grid.center(i);
          Complex acc = ev.diag_ktilde_aniso(xi, h, k, 0) * f[static_cast<size_t>(i)];
          for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            acc += h * h * ev.ktilde_aniso(xi, k, grid.center(j), 0) *
                   f[static_cast<size_t>(j)];
          }
          rhs(static_cast<Eigen::Index>(mi) * n + i) = acc;
        }
      }
    }
    const Eigen::VectorXcd sol = fac_z->solve(rhs);
    RsfSolveResult out;
    ModalSolution modal(grid, *modes);
    for (Eigen::Index i = 0; i < sol.size(); ++i) {
      modal.data()[static_cast<size_t>(i)] = sol(i);
    }
    out.u = modal.mode0_real();
    out.modal = std::move(modal);
    return out;
  }
};

RsfSolver::RsfSolver(const Grid& grid, const Medium& medium, const RsfOptions& opt)
    : impl_(std::make_unique<Impl>(grid, medium, opt)) {}

RsfSolver::RsfSolver(const Grid& grid, const Medium& medium,
                     const PhaseFunction& phase, const ModeSet& modes,
                     const RsfOptions& opt)
    : impl_(std::make_unique<Impl>(grid, medium, phase, modes, opt)) {}

RsfSolver::~RsfSolver() = default;
RsfSolver::RsfSolver(RsfSolver&&) noexcept = default;

RsfSolveResult RsfSolver::solve(const std::vector<double>& f) const {
  if (static_cast<int>(f.size()) != impl_->grid.size()) {
    throw InputError("source vector length does not match the grid");
  }
  return impl_->aniso ? impl_->solve_aniso(f) : impl_->solve_iso(f);
}

const FactorStats& RsfSolver::stats() const {
  return impl_->aniso ? impl_->fac_z->stats() : impl_->fac_d->stats();
}

Eigen::VectorXd RsfSolver::apply_iso(const Eigen::VectorXd& x) const {
  if (!impl_->fac_d) throw InputError("isotropic access on an anisotropic solver");
  return impl_->fac_d->apply(x);
}

Eigen::VectorXd RsfSolver::solve_iso(const Eigen::VectorXd& b) const {
  if (!impl_->fac_d) throw InputError("isotropic access on an anisotropic solver");
  return impl_->fac_d->solve(b);
}

Eigen::VectorXcd RsfSolver::apply_aniso(const Eigen::VectorXcd& x) const {
  if (!impl_->fac_z) throw InputError("anisotropic access on an isotropic solver");
  return impl_->fac_z->apply(x);
}

Eigen::VectorXcd RsfSolver::solve_aniso(const Eigen::VectorXcd& b) const {
  if (!impl_->fac_z) throw InputError("anisotropic access on an isotropic solver");
  return impl_->fac_z->solve(b);
}

RsfSolveResult solve_rsf(const Grid& grid, const Medium& medium,
                         const std::vector<double>& f, const RsfOptions& opt) {
  return RsfSolver(grid, medium, opt).solve(f);
}

RsfSolveResult solve_rsf(const Grid& grid, const Medium& medium,
                         const PhaseFunction& phase, const ModeSet& modes,
                         const std::vector<double>& f, const RsfOptions& opt) {
  return RsfSolver(grid, medium, phase, modes, opt).solve(f);
}

}  // namespace rte
