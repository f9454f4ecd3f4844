#include "qsync/spectra.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>
#include <vector>

namespace qsync {

SpectralEstimate lorentzian_power(Complex lambda, const VectorXd& freqs) {
  if (!(lambda.real() < 0))
    throw std::invalid_argument("lorentzian_power: Re(lambda) must be negative");
  SpectralEstimate out;
  out.freqs = freqs;
  out.values.resize(freqs.size());
  const double mu = lambda.real(), om = lambda.imag();
  for (int i = 0; i < freqs.size(); ++i) {
    double d = freqs(i) - om;
    out.values(i) = 2.0 * std::abs(mu) / (mu * mu + d * d);
  }
  out.kind = SpectralEstimate::Kind::Power;
  out.method = SpectralEstimate::Method::Analytic;
  return out;
}

SpectralEstimate analytic_cross(Complex lp, Complex lm, Complex overlap,
                                const VectorXd& freqs) {
  if (!(lp.real() < 0) || !(lm.real() < 0))
    throw std::invalid_argument("analytic_cross: eigenvalues must have negative real parts");
  SpectralEstimate out;
  out.freqs = freqs;
  out.values.resize(freqs.size());
  for (int i = 0; i < freqs.size(); ++i) {
    Complex inu(0, freqs(i));
    out.values(i) = -overlap * (1.0 / (lp - inu) + 1.0 / (std::conj(lm) + inu));
  }
  out.kind = SpectralEstimate::Kind::Cross;
  out.method = SpectralEstimate::Method::Analytic;
  return out;
}

// ---------------------------------------------------------------------------
// Overlaps against stationary densities.

Complex stationary_overlap(const EigenfunctionDescriptor& a, const EigenfunctionDescriptor& b,
                           const StationaryDensity& rho) {
  if (std::holds_alternative<LinearForm>(a)) {
    const auto& u = std::get<LinearForm>(a).coeffs;
    const auto& v = std::get<LinearForm>(b).coeffs;
    const auto& cov = std::get<GaussianStationary>(rho).cov;
    // E[(u.z)(conj(v).z)] for a zero-mean Gaussian z
    return (u.transpose() * cov.cast<Complex>() * v.conjugate()).value();
  }
  if (std::holds_alternative<FourierField>(a)) {
    const auto& fa = std::get<FourierField>(a);
    const auto& fb = std::get<FourierField>(b);
    const auto& p = std::get<RingStationary>(rho).field;
    if (fa.N != fb.N)
      throw std::invalid_argument("stationary_overlap: fields on different lattices");
    Complex acc(0, 0);
    for (int ja = -fa.J; ja <= fa.J; ++ja) {
      Complex ca = fa.coeff(ja);
      if (ca == Complex(0, 0)) continue;
      for (int jb = -fb.J; jb <= fb.J; ++jb) {
        Complex cb = fb.coeff(jb);
        if (cb == Complex(0, 0)) continue;
        acc += ca * std::conj(cb) * p.coeff(jb - ja);
      }
    }
    return 4.0 * kPi * kPi * acc;
  }
  const auto& sa = std::get<StateFunction>(a).values;
  const auto& sb = std::get<StateFunction>(b).values;
  const auto& p = std::get<DiscreteStationary>(rho).p;
  Complex acc(0, 0);
  for (int s = 0; s < sa.size(); ++s) acc += sa(s) * std::conj(sb(s)) * p(s);
  return acc;
}

double stationary_variance(const EigenfunctionDescriptor& a, const StationaryDensity& rho) {
  return stationary_overlap(a, a, rho).real();
}

namespace {

EigenfunctionDescriptor scale_descriptor(const EigenfunctionDescriptor& a, Complex s) {
  if (std::holds_alternative<LinearForm>(a))
    return LinearForm{std::get<LinearForm>(a).coeffs * s};
  if (std::holds_alternative<FourierField>(a)) {
    FourierField f = std::get<FourierField>(a);
    f.z *= s;
    return f;
  }
  StateFunction f = std::get<StateFunction>(a);
  f.values *= s;
  return f;
}

}  // namespace

EigenfunctionDescriptor normalize_unit_variance(const EigenfunctionDescriptor& a,
                                                const StationaryDensity& rho) {
  double var = stationary_variance(a, rho);
  if (!(var > 0)) throw NumericalError("normalize_unit_variance: nonpositive variance");
  return scale_descriptor(a, Complex(1.0 / std::sqrt(var), 0));
}

GaugeResult gauge_align(const EigenfunctionDescriptor& q_plus,
                        const EigenfunctionDescriptor& q_minus, const StationaryDensity& rho) {
  GaugeResult out;
  Complex u = stationary_overlap(q_plus, q_minus, rho);
  if (std::abs(u) < 1e-12) {
    out.degenerate = true;
    out.alpha = 0;
    out.aligned_overlap = Complex(0, 0);
    out.rotated_minus = q_minus;
    return out;
  }
  // Minimizing <|Q+ - Q- e^{i a}|^2> over a picks the principal branch:
  // a = arg <Q+* Q->; the rotated overlap is then |u| >= 0.
  out.alpha = arg_2pi(u);
  out.rotated_minus = scale_descriptor(q_minus, std::polar(1.0, out.alpha));
  out.aligned_overlap = u * std::polar(1.0, -out.alpha);
  return out;
}

// ---------------------------------------------------------------------------
// Welch estimation.

namespace {

std::mutex fftw_planner_mutex;

// Forward DFT of `in` (length n), output fftshifted so frequencies ascend.
class SegmentFft {
 public:
  explicit SegmentFft(int n) : n_(n) {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex);
    in_ = fftw_alloc_complex(n);
    out_ = fftw_alloc_complex(n);
    plan_ = fftw_plan_dft_1d(n, in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  ~SegmentFft() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex);
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  SegmentFft(const SegmentFft&) = delete;
  SegmentFft& operator=(const SegmentFft&) = delete;

  void run(const Complex* x, VectorXcd& shifted) {
    for (int i = 0; i < n_; ++i) {
      in_[i][0] = x[i].real();
      in_[i][1] = x[i].imag();
    }
    fftw_execute(plan_);
    shifted.resize(n_);
    const int half = (n_ + 1) / 2;  // index of the most negative frequency
    for (int k = 0; k < n_; ++k) {
      int src = (k + half) % n_;
      shifted(k) = Complex(out_[src][0], out_[src][1]);
    }
  }

 private:
  int n_;
  fftw_complex* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

VectorXd shifted_freqs(int n, double dt) {
  VectorXd f(n);
  const int half = (n + 1) / 2;
  for (int k = 0; k < n; ++k) {
    int idx = (k + half) % n;
    double cyc = (idx < (n + 1) / 2) ? idx : idx - n;  // FFT bin in cycles
    f(k) = kTwoPi * cyc / (n * dt);
  }
  std::sort(f.data(), f.data() + n);
  return f;
}

void check_welch_args(std::size_t len, int segment_len, double overlap_frac) {
  if (segment_len < 16) throw std::invalid_argument("welch: segment_len must be >= 16");
  if (len < 2 * static_cast<std::size_t>(segment_len))
    throw std::invalid_argument("welch: series shorter than two segments");
  if (!(overlap_frac >= 0) || !(overlap_frac < 1))
    throw std::invalid_argument("welch: overlap fraction must be in [0, 1)");
}

}  // namespace

SpectralEstimate welch_csd(const QSeries& a, const QSeries& b, int segment_len,
                           double overlap_frac) {
  if (a.values.size() != b.values.size() || a.dt != b.dt)
    throw std::invalid_argument("welch_csd: series must share grid and length");
  check_welch_args(a.values.size(), segment_len, overlap_frac);

  const int n = segment_len;
  const double dt = a.dt;
  std::vector<double> w(n);
  double w2 = 0;
  for (int i = 0; i < n; ++i) {
    w[i] = 0.5 * (1.0 - std::cos(kTwoPi * i / n));
    w2 += w[i] * w[i];
  }
  const int hop = std::max(1, static_cast<int>(std::lround(n * (1.0 - overlap_frac))));

  SegmentFft fft(n);
  VectorXcd xa, xb;
  VectorXcd acc = VectorXcd::Zero(n);
  std::vector<Complex> bufa(n), bufb(n);
  long nsegs = 0;
  for (std::size_t start = 0; start + n <= a.values.size(); start += hop) {
    for (int i = 0; i < n; ++i) {
      bufa[i] = a.values[start + i] * w[i];
      bufb[i] = b.values[start + i] * w[i];
    }
    fft.run(bufa.data(), xa);
    fft.run(bufb.data(), xb);
    acc += xa.cwiseProduct(xb.conjugate());
    ++nsegs;
  }
  acc *= dt / (w2 * static_cast<double>(nsegs));

  SpectralEstimate out;
  out.freqs = shifted_freqs(n, dt);
  out.values = acc;
  out.kind = SpectralEstimate::Kind::Cross;
  out.method = SpectralEstimate::Method::Welch;
  out.segment_len = n;
  out.overlap = overlap_frac;
  out.window = "hann";
  return out;
}

SpectralEstimate welch_psd(const QSeries& series, int segment_len, double overlap_frac) {
  SpectralEstimate out = welch_csd(series, series, segment_len, overlap_frac);
  out.kind = SpectralEstimate::Kind::Power;
  out.values = out.values.real().cast<Complex>();
  return out;
}

}  // namespace qsync
