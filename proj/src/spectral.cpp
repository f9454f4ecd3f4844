#include "qsync/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <numeric>
#include <sstream>

namespace qsync {

namespace {

Complex bilinear(const VectorXcd& a, const VectorXcd& b) {
  return a.cwiseProduct(b).sum();
}

}  // namespace

EigResult eig_dense(const MatrixXcd& a, const EigOptions& opts) {
  if (a.rows() != a.cols()) throw std::invalid_argument("eig_dense: matrix must be square");
  const int n = static_cast<int>(a.rows());
  const double scale = std::max(a.norm(), 1e-300);

  Eigen::ComplexEigenSolver<MatrixXcd> right(a, true);
  if (right.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eig_dense: eigensolver failed to converge on " << n << "x" << n << " matrix";
    throw NumericalError(os.str());
  }
  Eigen::ComplexEigenSolver<MatrixXcd> adj(a.adjoint(), true);
  if (adj.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eig_dense: adjoint eigensolver failed to converge on " << n << "x" << n << " matrix";
    throw NumericalError(os.str());
  }

  EigResult out;
  out.pairs.resize(n);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    Complex li = right.eigenvalues()(i), lj = right.eigenvalues()(j);
    if (li.real() != lj.real()) return li.real() > lj.real();
    return li.imag() > lj.imag();
  });

  // Match adjoint eigenvalues (conjugates of the spectrum) to the rights.
  std::vector<bool> used(n, false);
  for (int k = 0; k < n; ++k) {
    int ri = order[k];
    Complex lam = right.eigenvalues()(ri);
    int best = -1;
    double bestd = 0;
    for (int j = 0; j < n; ++j) {
      if (used[j]) continue;
      double d = std::abs(std::conj(adj.eigenvalues()(j)) - lam);
      if (best < 0 || d < bestd) { best = j; bestd = d; }
    }
    if (bestd > 1e-6 * scale) {
      std::ostringstream os;
      os << "eig_dense: left/right spectra disagree by " << bestd << " on " << n << "x" << n
         << " matrix";
      throw NumericalError(os.str());
    }
    used[best] = true;
    Eigenpair& p = out.pairs[k];
    p.lambda = lam;
    p.right = right.eigenvectors().col(ri);
    p.left = adj.eigenvectors().col(best).conjugate();  // row w* stored as a plain vector
  }

  // Residual check on the right vectors.
  for (const auto& p : out.pairs) {
    double res = (a * p.right - p.lambda * p.right).norm();
    if (res > opts.residual_tol * scale * p.right.norm()) {
      std::ostringstream os;
      os << "eig_dense: residual " << res << " exceeds tolerance on " << n << "x" << n
         << " matrix (lambda=" << p.lambda << ")";
      throw NumericalError(os.str());
    }
  }

  // Biorthonormalize per eigenvalue cluster.
  int i = 0;
  while (i < n) {
    int j = i + 1;
    while (j < n && std::abs(out.pairs[j].lambda - out.pairs[j - 1].lambda) <=
                        opts.cluster_rel_tol * scale)
      ++j;
    const int k = j - i;
    if (k == 1) {
      Complex g = bilinear(out.pairs[i].left, out.pairs[i].right);
      double rel = std::abs(g) / (out.pairs[i].left.norm() * out.pairs[i].right.norm());
      if (rel < opts.defect_tol) {
        out.defective_clusters.push_back({i});
      } else {
        out.pairs[i].left /= g;
      }
    } else {
      MatrixXcd gram(k, k);
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c)
          gram(r, c) = bilinear(out.pairs[i + r].left, out.pairs[i + c].right);
      Eigen::JacobiSVD<MatrixXcd> svd(gram, Eigen::ComputeFullU | Eigen::ComputeFullV);
      double smin = svd.singularValues()(k - 1), smax = svd.singularValues()(0);
      double vecscale = 0;
      for (int r = 0; r < k; ++r)
        vecscale = std::max(vecscale, out.pairs[i + r].left.norm() *
                                          out.pairs[i + r].right.norm());
      if (smax < opts.defect_tol * vecscale || smin < opts.defect_tol * smax) {
        std::vector<int> cluster(k);
        std::iota(cluster.begin(), cluster.end(), i);
        out.defective_clusters.push_back(cluster);
      } else {
        // Replace lefts with combinations satisfying left_r . right_c = delta_rc.
        MatrixXcd ginv = gram.inverse();
        std::vector<VectorXcd> newleft(k);
        for (int r = 0; r < k; ++r) {
          newleft[r] = VectorXcd::Zero(n);
          for (int b = 0; b < k; ++b) newleft[r] += ginv(b, r) * out.pairs[i + b].left;
        }
        for (int r = 0; r < k; ++r) out.pairs[i + r].left = newleft[r];
      }
    }
    i = j;
  }
  return out;
}

std::array<int, 2> leading_oscillatory_pair(const EigResult& r, double zero_tol) {
  double scale = 0;
  for (const auto& p : r.pairs) scale = std::max(scale, std::abs(p.lambda));
  std::array<int, 2> out{-1, -1};
  int found = 0;
  for (int i = 0; i < static_cast<int>(r.pairs.size()) && found < 2; ++i) {
    Complex l = r.pairs[i].lambda;
    if (std::abs(l) <= zero_tol * scale) continue;
    if (l.imag() <= 0) continue;
    out[found++] = i;
  }
  if (found < 2)
    throw NumericalError("leading_oscillatory_pair: fewer than two oscillatory eigenvalues");
  return out;
}

namespace {

// Continuation weight of a candidate right vector against a tracked branch.
// With the branch's left vector biorthonormally scaled (left . right = 1 and
// zero against the other branches), the pairing itself is the projection
// coefficient: exactly one for an unchanged matrix.  When the pairing scale
// is unusable (defective cluster), fall back to the right-vector angle.
double overlap_score(const Eigenpair& prev, const VectorXcd& right_next) {
  Complex self = prev.left.cwiseProduct(prev.right).sum();
  if (std::abs(self - 1.0) < 0.01)
    return std::abs(prev.left.cwiseProduct(right_next).sum()) / right_next.norm();
  double denom = prev.right.norm() * right_next.norm();
  return denom == 0 ? 0.0 : std::abs(prev.right.dot(right_next)) / denom;
}

}  // namespace

EigSweepTrack track_pair(const std::vector<MatrixXcd>& matrices,
                         const std::vector<double>& parameter_values,
                         const std::array<Eigenpair, 2>& seed_pair,
                         const TrackOptions& opts) {
  if (matrices.empty()) throw std::invalid_argument("track_pair: empty matrix sequence");
  if (matrices.size() != parameter_values.size())
    throw std::invalid_argument("track_pair: matrices/parameters size mismatch");

  EigSweepTrack track;
  track.parameter_values = parameter_values;
  track.tracked_pairs.reserve(matrices.size());

  std::array<Eigenpair, 2> cur = seed_pair;
  cur[0].label = BranchLabel::Plus;
  cur[1].label = BranchLabel::Minus;
  // Verify the seeds against the first matrix.
  const double scale0 = std::max(matrices[0].norm(), 1e-300);
  for (const auto& p : cur) {
    double res = (matrices[0] * p.right - p.lambda * p.right).norm();
    if (res > 1e-6 * scale0 * p.right.norm())
      throw std::invalid_argument("track_pair: seed pair is not an eigenpair of the first matrix");
  }
  track.tracked_pairs.push_back(cur);

  for (std::size_t m = 1; m < matrices.size(); ++m) {
    EigResult er = eig_dense(matrices[m], opts.eig);
    const int n = static_cast<int>(er.pairs.size());
    const double lscale = std::max({std::abs(cur[0].lambda), std::abs(cur[1].lambda), 1e-300});
    // Past an exceptional point the branch labels are arbitrary (the
    // eigenvectors coincide there), so the ambiguity guard is suspended for
    // the step leaving a coalesced pair.
    const bool prev_coalesced =
        std::abs(cur[0].lambda - cur[1].lambda) < opts.coalescence_rel_tol * lscale;

    // Score every candidate for each branch, then pick the best joint
    // assignment with distinct successors.
    Eigen::MatrixXd score(2, n);
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < n; ++c) score(b, c) = overlap_score(cur[b], er.pairs[c].right);
    int bi = -1, bj = -1;
    double best = -1;
    for (int ci = 0; ci < n; ++ci)
      for (int cj = 0; cj < n; ++cj) {
        if (ci == cj) continue;
        double s = score(0, ci) + score(1, cj);
        if (s > best) { best = s; bi = ci; bj = cj; }
      }

    // Entering a coalescence is as label-ambiguous as leaving one.
    const bool next_coalesced =
        std::abs(er.pairs[bi].lambda - er.pairs[bj].lambda) <=
        opts.coalescence_rel_tol *
            std::max({std::abs(er.pairs[bi].lambda), std::abs(er.pairs[bj].lambda), 1e-300});
    const bool guard = !prev_coalesced && !next_coalesced;

    // Ambiguity: a rival successor with nearly the same overlap but a
    // genuinely different eigenvalue.
    for (int b = 0; guard && b < 2; ++b) {
      int chosen = (b == 0) ? bi : bj;
      for (int c = 0; c < n; ++c) {
        if (c == chosen) continue;
        if (std::abs(er.pairs[c].lambda - er.pairs[chosen].lambda) <=
            opts.coalescence_rel_tol * lscale)
          continue;  // same eigenvalue to tolerance; either pick is fine
        if (score(b, c) >= score(b, chosen) * (1.0 - opts.ambiguity_rel) &&
            score(b, c) > opts.min_overlap) {
          std::ostringstream os;
          os << "track_pair: ambiguous successor at parameter index " << m << " (overlaps "
             << score(b, chosen) << " vs " << score(b, c) << ")";
          throw NumericalError(os.str());
        }
      }
    }
    for (int b = 0; guard && b < 2; ++b) {
      int chosen = (b == 0) ? bi : bj;
      if (score(b, chosen) <= opts.min_overlap) {
        std::ostringstream os;
        os << "track_pair: tracking continuity lost at parameter index " << m << " (overlap "
           << score(b, chosen) << " <= " << opts.min_overlap << ")";
        throw NumericalError(os.str());
      }
    }

    cur[0] = er.pairs[bi];
    cur[1] = er.pairs[bj];
    cur[0].label = BranchLabel::Plus;
    cur[1].label = BranchLabel::Minus;
    track.tracked_pairs.push_back(cur);
  }

  for (std::size_t m = 0; m < track.tracked_pairs.size(); ++m) {
    const auto& pr = track.tracked_pairs[m];
    double ls = std::max({std::abs(pr[0].lambda), std::abs(pr[1].lambda), 1e-300});
    if (std::abs(pr[0].lambda - pr[1].lambda) < opts.coalescence_rel_tol * ls)
      track.coalescence_indices.push_back(static_cast<int>(m));
  }
  return track;
}

}  // namespace qsync
