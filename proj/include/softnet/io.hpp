#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "softnet/diffusion.hpp"
#include "softnet/kernel.hpp"
#include "softnet/ntk.hpp"
#include "softnet/training.hpp"

namespace softnet::io {

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

/// FNV-1a hash of raw bytes, used as the content hash in manifests.
std::uint64_t content_hash(const std::string& bytes);
std::string content_hash_hex(const std::string& bytes);

/// Writes to <path>.partial, then renames into place, so an aborted run
/// never leaves a well-named but truncated file behind.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

// Fixed-layout CSV renderers, one per experiment family.

/// Columns: step,loss,max_drift,max_grad,ratio,C0,C1,C2,C3,v2_norm.
/// Decomposition cells are empty on rows that did not record one.
std::string trace_csv(const TrainTrace& trace);

/// Columns: trial,stat,value,bound,violated with stat in {frob,entry}.
std::string perturb_csv(const PerturbReport& report);

/// Columns: part,trials,violations,max_stat,bound.
std::string audit_csv(const AuditReport& report);

/// Columns: m,step,sup_gap,eps_H,max_eps_test.
std::string coupling_csv(const std::vector<CouplingTrace>& traces);

/// Columns: t,x_1..x_d,y_1..y_d plus a scaler comment line.
std::string score_dataset_csv(const ScoreDataset& dataset);

}  // namespace softnet::io
