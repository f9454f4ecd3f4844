#pragma once

#include <array>
#include <vector>

#include "qsync/types.hpp"

namespace qsync {

enum class BranchLabel { Plus, Minus, Other };

// One eigenvalue with paired right/left eigenvectors.  After pairing, the
// bilinear product left . right equals one (non-defective case); the left
// vector is stored so no extra conjugation is needed: for a left row vector
// w* with w* A = lambda w*, this stores left = (w*)^T.
struct Eigenpair {
  Complex lambda;
  VectorXcd right;
  VectorXcd left;
  BranchLabel label = BranchLabel::Other;
};

struct EigOptions {
  double residual_tol = 1e-9;   // ||A v - lambda v|| <= tol * ||A|| * ||v||
  double cluster_rel_tol = 1e-9;  // eigenvalues closer than this (rel. ||A||) form a cluster
  double defect_tol = 1e-8;     // pairing Gram considered singular below this
};

struct EigResult {
  std::vector<Eigenpair> pairs;                  // sorted by Re desc, then Im desc
  std::vector<std::vector<int>> defective_clusters;  // indices whose left pairing was skipped
  bool defective() const { return !defective_clusters.empty(); }
};

// Dense eigendecomposition with biorthonormal left/right pairing.
EigResult eig_dense(const MatrixXcd& a, const EigOptions& opts = {});

// Indices into result.pairs of the two leading nontrivial eigenvalues with
// positive imaginary part (greatest real part first), skipping eigenvalues
// within zero_tol * scale of zero.
std::array<int, 2> leading_oscillatory_pair(const EigResult& r, double zero_tol = 1e-9);

struct TrackOptions {
  double coalescence_rel_tol = 1e-6;  // |la - lb| below this (rel.) flags coalescence
  double min_overlap = 0.5;           // continuity requirement per branch
  double ambiguity_rel = 0.01;        // two successor candidates this close -> error
  EigOptions eig;
};

struct EigSweepTrack {
  std::vector<double> parameter_values;
  std::vector<std::array<Eigenpair, 2>> tracked_pairs;
  std::vector<int> coalescence_indices;
};

// Follows two eigenvalue branches through a matrix family by maximal
// eigenvector overlap.  seed_pair must be eigenpairs of matrices.front().
EigSweepTrack track_pair(const std::vector<MatrixXcd>& matrices,
                         const std::vector<double>& parameter_values,
                         const std::array<Eigenpair, 2>& seed_pair,
                         const TrackOptions& opts = {});

}  // namespace qsync
