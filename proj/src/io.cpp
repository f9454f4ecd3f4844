#include "qsync/io.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace qsync {

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& metadata,
                     const std::vector<std::string>& columns)
    : out_(path), ncols_(columns.size()) {
  if (!out_) throw std::runtime_error("cannot open output file: " + path);
  out_ << "# " << kVersion << "\n";
  for (const auto& m : metadata) out_ << "# " << m << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i)
    out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
}

std::string CsvWriter::format(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != ncols_) throw std::logic_error("CsvWriter: column count mismatch");
  for (std::size_t i = 0; i < values.size(); ++i)
    out_ << format(values[i]) << (i + 1 < values.size() ? "," : "\n");
}

void CsvWriter::raw_row(const std::string& line) { out_ << line << "\n"; }

void write_spectral_estimate_csv(const std::string& path, const SpectralEstimate& s,
                                 const std::vector<std::string>& extra_metadata) {
  std::vector<std::string> meta = extra_metadata;
  meta.push_back(std::string("kind=") +
                 (s.kind == SpectralEstimate::Kind::Power ? "power" : "cross"));
  meta.push_back(std::string("method=") +
                 (s.method == SpectralEstimate::Method::Analytic ? "analytic" : "welch"));
  if (s.method == SpectralEstimate::Method::Welch) {
    std::ostringstream os;
    os << "segment_len=" << s.segment_len << " overlap=" << s.overlap << " window=" << s.window;
    meta.push_back(os.str());
  }
  CsvWriter w(path, meta, {"nu", "re", "im"});
  for (int i = 0; i < s.freqs.size(); ++i)
    w.row({s.freqs(i), s.values(i).real(), s.values(i).imag()});
}

void write_fourier_field_csv(const std::string& path, const FourierField& f,
                             const std::vector<std::string>& extra_metadata) {
  std::vector<std::string> meta = extra_metadata;
  {
    std::ostringstream os;
    os << "lattice N=" << f.N << " J=" << f.J;
    meta.push_back(os.str());
  }
  CsvWriter w(path, meta, {"j", "k", "re", "im"});
  for (int j = -f.J; j <= f.J; ++j)
    w.row({static_cast<double>(j), static_cast<double>(f.N - j), f.coeff(j).real(),
           f.coeff(j).imag()});
}

std::string fourier_field_json(const FourierField& f) {
  nlohmann::json j;
  j["N"] = f.N;
  j["J"] = f.J;
  auto& arr = j["coefficients"] = nlohmann::json::array();
  for (int jj = -f.J; jj <= f.J; ++jj)
    arr.push_back({{"j", jj}, {"k", f.N - jj}, {"re", f.coeff(jj).real()},
                   {"im", f.coeff(jj).imag()}});
  return j.dump(2);
}

void write_trajectory_csv(const std::string& path, const Trajectory& t,
                          const std::vector<std::string>& extra_metadata) {
  const bool discrete = t.kind == ModelKind::Discrete9D;
  std::vector<std::string> cols{"t"};
  if (discrete) {
    cols.push_back("state");
  } else {
    int dim = t.values.empty() ? 0 : static_cast<int>(t.values.front().size());
    for (int i = 0; i < dim; ++i) cols.push_back("x" + std::to_string(i));
  }
  CsvWriter w(path, extra_metadata, cols);
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::vector<double> row{i * t.dt};
    if (discrete) {
      row.push_back(static_cast<double>(t.states[i]));
    } else {
      for (int c = 0; c < t.values[i].size(); ++c) row.push_back(t.values[i](c));
    }
    w.row(row);
  }
}

namespace {

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

constexpr char kTrajMagic[8] = {'Q', 'T', 'R', 'J', '0', '0', '0', '1'};

}  // namespace

void write_trajectory_binary(const std::string& path, const Trajectory& t,
                             const CoupledModel& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out.write(kTrajMagic, sizeof(kTrajMagic));
  const bool discrete = t.kind == ModelKind::Discrete9D;
  put<int32_t>(out, static_cast<int32_t>(t.kind));
  int32_t dim = discrete ? 1 : (t.values.empty() ? 0 : static_cast<int32_t>(t.values[0].size()));
  put<int32_t>(out, dim);
  put<double>(out, t.dt);
  put<double>(out, t.t0_discard);
  put<uint64_t>(out, t.seed);
  for (double p : {m.omega, m.tau, m.kappa, m.eta, m.diffusion}) put<double>(out, p);
  put<int64_t>(out, static_cast<int64_t>(t.size()));
  if (discrete) {
    for (int s : t.states) put<int32_t>(out, static_cast<int32_t>(s));
  } else {
    for (const auto& v : t.values)
      out.write(reinterpret_cast<const char*>(v.data()), sizeof(double) * v.size());
  }
}

Trajectory read_trajectory_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trajectory file: " + path);
  char magic[8];
  in.read(magic, 8);
  if (std::string(magic, 8) != std::string(kTrajMagic, 8))
    throw std::runtime_error("not a trajectory record: " + path);
  Trajectory t;
  t.kind = static_cast<ModelKind>(take<int32_t>(in));
  int32_t dim = take<int32_t>(in);
  t.dt = take<double>(in);
  t.t0_discard = take<double>(in);
  t.seed = take<uint64_t>(in);
  for (int i = 0; i < 5; ++i) take<double>(in);  // model parameters, informational
  int64_t n = take<int64_t>(in);
  if (t.kind == ModelKind::Discrete9D) {
    t.states.resize(n);
    for (int64_t i = 0; i < n; ++i) t.states[i] = take<int32_t>(in);
  } else {
    t.values.assign(n, VectorXd(dim));
    for (int64_t i = 0; i < n; ++i)
      in.read(reinterpret_cast<char*>(t.values[i].data()), sizeof(double) * dim);
  }
  if (!in) throw std::runtime_error("truncated trajectory record: " + path);
  return t;
}

}  // namespace qsync
