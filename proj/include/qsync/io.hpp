#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "qsync/models.hpp"
#include "qsync/simulate.hpp"
#include "qsync/spectra.hpp"

namespace qsync {

inline constexpr const char* kVersion = "qsync 0.1.0";

// CSV files carry '#'-prefixed metadata lines followed by a header row; the
// body is deterministic for fixed inputs (stable %.17g formatting, no
// timestamps), so identical runs produce byte-identical files.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& metadata,
            const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  void raw_row(const std::string& line);

  static std::string format(double v);

 private:
  std::ofstream out_;
  std::size_t ncols_;
};

void write_spectral_estimate_csv(const std::string& path, const SpectralEstimate& s,
                                 const std::vector<std::string>& extra_metadata = {});

void write_fourier_field_csv(const std::string& path, const FourierField& f,
                             const std::vector<std::string>& extra_metadata = {});

std::string fourier_field_json(const FourierField& f);

// Trajectory exports: CSV rows (t, components... or t, state) and a compact
// binary record.  Binary layout, little-endian:
//   magic "QTRJ0001" (8 bytes)
//   kind (int32), state dimension (int32)
//   dt, t0_discard (float64), seed (uint64)
//   model parameters omega, tau, kappa, eta, diffusion (float64 each)
//   sample count n (int64)
//   payload: n * dim float64 (continuous kinds) or n int32 (discrete states)
void write_trajectory_csv(const std::string& path, const Trajectory& t,
                          const std::vector<std::string>& extra_metadata = {});
void write_trajectory_binary(const std::string& path, const Trajectory& t,
                             const CoupledModel& m);
Trajectory read_trajectory_binary(const std::string& path);

}  // namespace qsync
