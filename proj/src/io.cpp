#include "softnet/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace softnet::io {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::uint64_t content_hash(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string content_hash_hex(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(content_hash(bytes)));
  return buf;
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  const std::filesystem::path partial = path.string() + ".partial";
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericError("write_file_atomic: cannot open " +
                                 partial.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw NumericError("write_file_atomic: short write to " +
                                 partial.string());
  }
  std::filesystem::rename(partial, path);
}

std::string trace_csv(const TrainTrace& trace) {
  std::ostringstream out;
  out << "step,loss,max_drift,max_grad,ratio,C0,C1,C2,C3,v2_norm\n";
  for (const TrainStep& row : trace.steps) {
    out << row.step << ',' << format_double(row.loss) << ','
        << format_double(row.max_drift) << ',' << format_double(row.max_grad)
        << ',' << format_double(row.ratio) << ',';
    if (row.has_decomposition) {
      const DecompositionRecord& d = row.decomposition;
      out << format_double(d.C0) << ',' << format_double(d.C1) << ','
          << format_double(d.C2) << ',' << format_double(d.C3) << ','
          << format_double(d.v2_norm);
    } else {
      out << ",,,,";
    }
    out << '\n';
  }
  return out.str();
}

std::string perturb_csv(const PerturbReport& report) {
  std::ostringstream out;
  out << "trial,stat,value,bound,violated\n";
  for (std::size_t t = 0; t < report.trials.size(); ++t) {
    const PerturbTrial& trial = report.trials[t];
    out << t << ",frob," << format_double(trial.frob_dev) << ','
        << format_double(report.frob_bound) << ','
        << (trial.frob_violated ? 1 : 0) << '\n';
    out << t << ",entry," << format_double(trial.max_entry_dev) << ','
        << format_double(report.entry_bound) << ','
        << (trial.entry_violated ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string audit_csv(const AuditReport& report) {
  std::ostringstream out;
  out << "part,trials,violations,max_stat,bound\n";
  for (const AuditPart& part : report.parts) {
    out << part.part << ',' << part.trials << ',' << part.violations << ','
        << format_double(part.max_stat) << ',' << format_double(part.bound)
        << '\n';
  }
  return out.str();
}

std::string coupling_csv(const std::vector<CouplingTrace>& traces) {
  std::ostringstream out;
  out << "m,step,sup_gap,eps_H,max_eps_test\n";
  for (const CouplingTrace& trace : traces) {
    for (const CouplingStep& row : trace.steps) {
      out << trace.m << ',' << row.step << ',' << format_double(row.sup_gap)
          << ',' << format_double(row.eps_H) << ','
          << format_double(row.max_eps_test) << '\n';
    }
  }
  return out.str();
}

std::string score_dataset_csv(const ScoreDataset& dataset) {
  const int d = static_cast<int>(dataset.raw_x0.rows());
  const int n = static_cast<int>(dataset.raw_x0.cols());
  std::ostringstream out;
  out << "# scaler_T=" << format_double(dataset.scaler.T)
      << " scaler_rho=" << format_double(dataset.scaler.rho) << '\n';
  out << "t";
  for (int k = 0; k < d; ++k) out << ",x_" << (k + 1);
  for (int k = 0; k < d; ++k) out << ",y_" << (k + 1);
  out << '\n';
  for (int i = 0; i < n; ++i) {
    out << format_double(dataset.raw_t[i]);
    for (int k = 0; k < d; ++k)
      out << ',' << format_double(dataset.raw_xt(k, i));
    for (int k = 0; k < d; ++k)
      out << ',' << format_double(dataset.raw_x0(k, i));
    out << '\n';
  }
  return out.str();
}

}  // namespace softnet::io
