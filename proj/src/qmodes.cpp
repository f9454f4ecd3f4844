#include "qsync/qmodes.hpp"

#include "qsync/cf_solver.hpp"
#include "qsync/spectra.hpp"
#include "qsync/spectral.hpp"

namespace qsync {

LeadingModes leading_modes(const CoupledModel& m, int ring_J, int ring_M) {
  LeadingModes out;
  out.rho = stationary_density(m, m.is_ring() ? ring_J : 40);

  if (m.is_ring()) {
    RingSpectrumOptions opts;
    opts.n_eigenvectors = 2;
    RingSpectrumResult sp = ring_spectrum(m, 1, ring_J, opts);
    out.lambda_plus = sp.pairs[0].lambda;
    out.lambda_minus = sp.pairs[1].lambda;
    CfField fp = cf_eigenfunction(m, out.lambda_plus, 1, ring_J, ring_M);
    CfField fm = cf_eigenfunction(m, out.lambda_minus, 1, ring_J, ring_M);
    out.cf_fallback = fp.fallback || fm.fallback;
    out.q_plus = normalize_unit_variance(fp.field, out.rho);
    out.q_minus = normalize_unit_variance(fm.field, out.rho);
  } else {
    // Left eigenvectors of the generator carry the backward modes.
    MatrixXcd gt = generator_matrix(m).transpose().cast<Complex>();
    EigResult er = eig_dense(gt);
    auto idx = leading_oscillatory_pair(er);
    auto pack = [&](int i) -> EigenfunctionDescriptor {
      if (m.kind == ModelKind::Linear4D) return LinearForm{Vector4cd(er.pairs[i].right)};
      return StateFunction{er.pairs[i].right};
    };
    out.lambda_plus = er.pairs[idx[0]].lambda;
    out.lambda_minus = er.pairs[idx[1]].lambda;
    out.q_plus = normalize_unit_variance(pack(idx[0]), out.rho);
    out.q_minus = normalize_unit_variance(pack(idx[1]), out.rho);
  }
  out.overlap = stationary_overlap(out.q_plus, out.q_minus, out.rho);
  return out;
}

EigenfunctionDescriptor raw_observable(const CoupledModel& m) {
  switch (m.kind) {
    case ModelKind::Linear4D: {
      LinearForm f;
      f.coeffs << Complex(0, 1), Complex(1, 0), 0, 0;  // x2 + i x1
      return f;
    }
    case ModelKind::Ring2D:
    case ModelKind::RingCos2D: {
      FourierField f{1, 1, VectorXcd::Zero(3)};
      f.z(2) = 1.0;  // exp(i x)
      return f;
    }
    case ModelKind::Discrete9D: {
      StateFunction f;
      f.values.resize(9);
      const Complex w = std::polar(1.0, kTwoPi / 3.0);
      for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) f.values(3 * j + i) = std::pow(w, i);
      return f;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace qsync
