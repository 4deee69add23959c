#include "shiftlab/forster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace shiftlab {

namespace {

constexpr double kUnitTol = 1e-9;
constexpr double kZeroNormTol = 1e-12;
constexpr double kDegenerateEig = 1e-8;
constexpr double kMemberTol = 1e-9;

void require_nonempty(const std::vector<Point>& pts) {
  if (pts.empty()) throw std::invalid_argument("forster: empty point set");
}

std::vector<Point> normalized_copy(const std::vector<Point>& pts) {
  require_nonempty(pts);
  const auto n = pts.front().size();
  std::vector<Point> out;
  out.reserve(pts.size());
  for (const auto& p : pts) {
    if (p.size() != n) throw DimensionMismatch("forster: mixed dimensions");
    const double norm = p.norm();
    if (!(norm >= kZeroNormTol))
      throw NonUnitInput("forster: point norm below 1e-12");
    out.push_back(p / norm);
  }
  return out;
}

Eigen::MatrixXd moment_of(const std::vector<Point>& unit_pts) {
  const int n = static_cast<int>(unit_pts.front().size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const auto& p : unit_pts) m.noalias() += p * p.transpose();
  m /= static_cast<double>(unit_pts.size());
  return m;
}

Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  Eigen::VectorXd inv = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

/// Normalized images {Ax/||Ax||}; false if any image is numerically zero.
bool transformed_images(const Eigen::MatrixXd& a, const std::vector<Point>& pts,
                        std::vector<Point>& out) {
  out.clear();
  out.reserve(pts.size());
  for (const auto& p : pts) {
    Point y = a * p;
    const double norm = y.norm();
    if (!(norm >= kZeroNormTol)) return false;
    out.push_back(y / norm);
  }
  return true;
}

bool eigs_within(const Eigen::VectorXd& eigs, int n, double eps) {
  const double lo = (1.0 - eps) / n;
  const double hi = (1.0 + eps) / n;
  return eigs.minCoeff() >= lo && eigs.maxCoeff() <= hi;
}

Eigen::MatrixXd random_orthogonal(int n, Rng& rng) {
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.gaussian();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  return q;
}

/// Orthonormal basis of the span of the selected points; empty on failure.
Eigen::MatrixXd span_basis(const std::vector<Point>& pts,
                           const std::vector<int>& idx) {
  const int n = static_cast<int>(pts.front().size());
  Eigen::MatrixXd cols(n, static_cast<int>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j)
    cols.col(static_cast<int>(j)) = pts[static_cast<std::size_t>(idx[j])];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cols, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return {};
  int rank = 0;
  const double cutoff = std::max(1e-9 * sv[0], 1e-12);
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > cutoff) ++rank;
  if (rank == 0) return {};
  return svd.matrixU().leftCols(rank);
}

struct IterationResult {
  bool certified = false;
  Eigen::MatrixXd map;
  int iterations = 0;
};

IterationResult iterate_scaling(const std::vector<Point>& unit_pts, double eps,
                                int max_iters, Eigen::MatrixXd a0) {
  const int n = static_cast<int>(unit_pts.front().size());
  IterationResult res;
  Eigen::MatrixXd a = std::move(a0);
  std::vector<Point> images;
  for (int iter = 0; iter <= max_iters; ++iter) {
    if (!transformed_images(a, unit_pts, images)) return res;
    const Eigen::MatrixXd m = moment_of(images);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const Eigen::VectorXd eigs = es.eigenvalues();
    if (eigs_within(eigs, n, eps)) {
      res.certified = true;
      res.map = a;
      res.iterations = iter;
      return res;
    }
    if (eigs.minCoeff() < kDegenerateEig || iter == max_iters) {
      res.map = a;  // last iterate, used by the witness search
      res.iterations = iter;
      return res;
    }
    a = inverse_sqrt(static_cast<double>(n) * m) * a;
    a /= a.norm();  // scale is irrelevant to the normalized images
  }
  return res;
}

bool counting_ok(const std::vector<Point>& pts, const Eigen::MatrixXd& basis,
                 std::vector<int>& members_out) {
  const int n = static_cast<int>(pts.front().size());
  const int d = static_cast<int>(basis.cols());
  if (d <= 0 || d >= n) return false;
  members_out = subspace_members(pts, basis, kMemberTol);
  return counting_condition(members_out.size(), d, pts.size(), n);
}

/// Search for a witness subspace; every candidate is verified against the
/// counting certificate before being returned.
bool find_witness_subspace(const std::vector<Point>& unit_pts,
                           const Eigen::MatrixXd& last_map,
                           ForsterSubspace& out) {
  const int n = static_cast<int>(unit_pts.front().size());
  std::vector<int> members;

  // Span of the whole set: settles any rank-deficient input.
  {
    std::vector<int> all(unit_pts.size());
    std::iota(all.begin(), all.end(), 0);
    Eigen::MatrixXd basis = span_basis(unit_pts, all);
    if (basis.size() > 0 && counting_ok(unit_pts, basis, members)) {
      out = {std::move(basis), std::move(members)};
      return true;
    }
  }

  // Top-eigenvector sweep of the original second moment.
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(moment_of(unit_pts));
    for (int drop = 1; drop < n; ++drop) {
      Eigen::MatrixXd basis = es.eigenvectors().rightCols(n - drop);
      if (counting_ok(unit_pts, basis, members)) {
        out = {std::move(basis), std::move(members)};
        return true;
      }
    }
  }

  // Pull back near-null directions of the last iterate's transformed moment
  // and snap to the span of the points actually found nearby.
  if (last_map.size() > 0) {
    std::vector<Point> images;
    if (transformed_images(last_map, unit_pts, images)) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(moment_of(images));
      for (int small = 1; small < n; ++small) {
        // Rows span the directions to kill: x must satisfy v^T A x = 0.
        Eigen::MatrixXd constraints =
            es.eigenvectors().leftCols(small).transpose() * last_map;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(constraints, Eigen::ComputeFullV);
        const int kernel_dim = n - static_cast<int>(svd.rank());
        if (kernel_dim <= 0 || kernel_dim >= n) continue;
        Eigen::MatrixXd raw = svd.matrixV().rightCols(kernel_dim);
        for (const double snap_tol : {1e-9, 1e-7, 1e-5, 1e-3}) {
          const std::vector<int> nearby =
              subspace_members(unit_pts, raw, snap_tol);
          if (nearby.empty()) continue;
          Eigen::MatrixXd basis = span_basis(unit_pts, nearby);
          if (basis.size() > 0 && counting_ok(unit_pts, basis, members)) {
            out = {std::move(basis), std::move(members)};
            return true;
          }
        }
      }
    }
  }

  // Spans of small point subsets, enumerated pseudo-randomly with a fixed
  // seed so the search stays deterministic in the input.
  {
    Rng seek(0x5eb5eb5eb5eb5ebULL);
    const int subset_trials = 150;
    for (int k = 1; k < n; ++k) {
      if (static_cast<std::size_t>(k) > unit_pts.size()) break;
      for (int trial = 0; trial < subset_trials; ++trial) {
        std::vector<int> idx;
        while (static_cast<int>(idx.size()) < k) {
          const int cand =
              static_cast<int>(seek.below(static_cast<std::uint64_t>(unit_pts.size())));
          if (std::find(idx.begin(), idx.end(), cand) == idx.end())
            idx.push_back(cand);
        }
        Eigen::MatrixXd basis = span_basis(unit_pts, idx);
        if (basis.size() > 0 && static_cast<int>(basis.cols()) == k &&
            counting_ok(unit_pts, basis, members)) {
          out = {std::move(basis), std::move(members)};
          return true;
        }
      }
    }
  }

  return false;
}

ForsterOutcome transform_with_init(const std::vector<Point>& raw, double eps,
                                   int max_iters, const Eigen::MatrixXd& a0) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("forster_transform: eps must lie in (0,1)");
  const std::vector<Point> pts = normalized_copy(raw);
  const int n = static_cast<int>(pts.front().size());
  if (max_iters <= 0) max_iters = 1000 * n;

  IterationResult it = iterate_scaling(pts, eps, max_iters, a0);
  if (it.certified) {
    // Re-verify the certificate on the returned object.
    std::vector<Point> images;
    if (transformed_images(it.map, pts, images) &&
        is_radially_isotropic(images, eps))
      return ForsterTransform{std::move(it.map), it.iterations};
    throw BudgetExceeded("forster_transform: certificate failed re-check");
  }

  ForsterSubspace witness;
  if (find_witness_subspace(pts, it.map, witness)) return witness;
  throw BudgetExceeded("forster_transform: no certificate within budget");
}

}  // namespace

Eigen::MatrixXd second_moment(const std::vector<Point>& unit_points) {
  require_nonempty(unit_points);
  const auto n = unit_points.front().size();
  for (const auto& p : unit_points) {
    if (p.size() != n) throw DimensionMismatch("second_moment: mixed dimensions");
    if (std::abs(p.norm() - 1.0) > kUnitTol)
      throw NonUnitInput("second_moment: non-unit point");
  }
  return moment_of(unit_points);
}

bool is_radially_isotropic(const std::vector<Point>& unit_points, double eps) {
  const Eigen::MatrixXd m = second_moment(unit_points);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return eigs_within(es.eigenvalues(), static_cast<int>(m.rows()), eps);
}

double isotropy_eps(const std::vector<Point>& unit_points) {
  const Eigen::MatrixXd m = second_moment(unit_points);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const int n = static_cast<int>(m.rows());
  double worst = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    worst = std::max(worst, std::abs(n * es.eigenvalues()[i] - 1.0));
  return worst;
}

std::vector<int> subspace_members(const std::vector<Point>& points,
                                  const Eigen::MatrixXd& basis, double tol) {
  std::vector<int> members;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point& p = points[i];
    const Eigen::VectorXd residual = p - basis * (basis.transpose() * p);
    if (residual.norm() <= tol) members.push_back(static_cast<int>(i));
  }
  return members;
}

bool counting_condition(std::size_t member_count, int sub_dim,
                        std::size_t total, int ambient_dim) {
  // |S cap W| * n > d * |S|, exact in integers.
  return member_count * static_cast<std::size_t>(ambient_dim) >
         static_cast<std::size_t>(sub_dim) * total;
}

ForsterOutcome forster_transform(const std::vector<Point>& points, double eps,
                                 int max_iters) {
  require_nonempty(points);
  const int n = static_cast<int>(points.front().size());
  return transform_with_init(points, eps, max_iters,
                             Eigen::MatrixXd::Identity(n, n));
}

Eigen::VectorXd ForsterStage::transformed_unit(const Point& x) const {
  Eigen::VectorXd y = transform * to_subspace(x);
  const double norm = y.norm();
  if (!(norm >= kZeroNormTol))
    throw NonUnitInput("ForsterStage: transformed point has near-zero norm");
  return y / norm;
}

ForsterStage forster_decompose(const std::vector<Point>& points, double delta,
                               Rng& rng, double eps) {
  const std::vector<Point> original = normalized_copy(points);
  const int n = static_cast<int>(original.front().size());
  const int attempts =
      std::max(1, static_cast<int>(std::ceil(std::log(n / std::min(delta, 0.999)))));

  Eigen::MatrixXd basis_total = Eigen::MatrixXd::Identity(n, n);
  std::vector<Point> current = original;

  for (int round = 0; round <= n; ++round) {
    const int d = static_cast<int>(current.front().size());
    ForsterOutcome outcome = [&]() -> ForsterOutcome {
      for (int attempt = 0;; ++attempt) {
        Eigen::MatrixXd a0 = attempt == 0 ? Eigen::MatrixXd::Identity(d, d)
                                          : random_orthogonal(d, rng);
        try {
          return transform_with_init(current, eps, 0, a0);
        } catch (const BudgetExceeded&) {
          if (attempt + 1 >= attempts) throw;
        }
      }
    }();

    if (auto* tr = std::get_if<ForsterTransform>(&outcome)) {
      ForsterStage stage;
      stage.basis = basis_total;
      stage.transform = tr->map;
      stage.transform_inv = tr->map.inverse();
      return stage;
    }

    const auto& sub = std::get<ForsterSubspace>(outcome);
    basis_total = basis_total * sub.basis;
    std::vector<Point> next;
    next.reserve(sub.members.size());
    for (const int idx : sub.members) {
      Eigen::VectorXd coords =
          sub.basis.transpose() * current[static_cast<std::size_t>(idx)];
      next.push_back(coords / coords.norm());
    }
    current = std::move(next);
  }
  throw BudgetExceeded("forster_decompose: dimension chain failed to settle");
}

}  // namespace shiftlab
