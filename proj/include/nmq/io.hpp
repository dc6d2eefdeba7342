// io.hpp -- config parsing, field snapshots (binary, CRC-checked), the
// energy.csv series and the run manifest.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nmq/diagnostics.hpp"
#include "nmq/dynamics.hpp"

namespace nmq {

/// Line-based `key = value` format; '#' starts a comment. Unknown and
/// duplicate keys are errors (ParseError with line number); missing optional
/// keys take the documented defaults; constraint violations raise
/// ValidationError naming the field.
SimConfig parse_config_text(const std::string& text);
SimConfig parse_config(const std::string& path);

struct Snapshot {
  int dim = 0;
  int n = 0;
  int channels = 0;
  double Lambda = 0;
  double t = 0;
  std::vector<double> data;  // channel-major, row-major
};

/// Binary layout: "NMQ1", dim u8, n u32 per axis, channels u8, Lambda f64,
/// t f64, payload f64 LE, crc32(payload) u32. Round trips bit-exactly.
void write_snapshot(const std::string& path, const Snapshot& s);
Snapshot read_snapshot(const std::string& path);  // CorruptFile on damage

template <int D>
void write_state_snapshot(const std::string& path, const Stepper<D>& st,
                          const State<D>& s);
/// Snapshot from explicit real fields (the bytes produced by quantize(), so
/// the file regenerates the in-memory state exactly).
void write_state_snapshot(const std::string& path, const Grid& g, double t,
                          const RealField& q, const RealField& u);
/// GridMismatch if the snapshot grid differs from the stepper's.
template <int D>
State<D> read_state_snapshot(const std::string& path, const Stepper<D>& st,
                             double* t_out = nullptr);

/// Streaming energy.csv writer. Rows lag one record so each carries the
/// central-difference dissipation residual; the final row (on finish) uses a
/// backward difference. Column order is frozen.
class EnergyCsvWriter {
 public:
  explicit EnergyCsvWriter(const std::string& path);
  ~EnergyCsvWriter();
  void push(const EnergyRecord& r);
  void finish();

  static constexpr const char* kHeader =
      "t,E,F,dissipation,residual,lambda_min,lambda_max,margin,psi_sup,"
      "convexity_integral";

 private:
  void write_row(const EnergyRecord& r, double residual);
  std::string path_;
  void* f_ = nullptr;  // FILE*
  std::vector<EnergyRecord> tail_;
  bool finished_ = false;
};

std::vector<EnergyRecord> read_energy_csv(const std::string& path);

struct RunManifest {
  SimConfig config;
  std::string code_version;
  std::string started, finished;
  std::vector<std::string> checkpoints;  // snapshot file names, step order
  std::string exit_status;               // "running" / "ok" / error text
};

void write_manifest(const std::string& dir, const RunManifest& m);
RunManifest read_manifest(const std::string& dir);

const char* code_version();

}  // namespace nmq
