#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>

#include "scalespace/spectral.hpp"

namespace scalespace {

enum class SignalFormat { Csv, Json };

/// By extension: .csv or .json. ConfigError otherwise.
SignalFormat format_from_path(const std::string& path);

struct IngestOptions {
  /// The padded window is at least padding * the input length.
  double padding = 1.0;
  /// Target N; 0 picks the next power of two.
  std::size_t n = 0;
  double uniform_rel_tol = 1e-9;
  double edge_rel_tol = 1e-10;

  void validate() const;
};

/// Two columns x,value; a non-numeric first line is taken as a header and
/// lines starting with # are skipped. MalformedInput on anything else.
/// NonUniformSampling when a step differs from the mean step by more than
/// rel_tol of it.
SignalGrid parse_signal_csv(std::istream& in, double rel_tol = 1e-9);
/// {"x0": ..., "dx": ..., "samples": [...]}.
SignalGrid parse_signal_json(const std::string& text);

/// NotTransient when either end sample exceeds edge_rel_tol * max|f|; then
/// zero-pads symmetrically to a power of two.
SignalGrid prepare_signal(const SignalGrid& raw, const IngestOptions& opt = {});

SignalGrid ingest(const std::string& path, SignalFormat format, const IngestOptions& opt = {});
SignalGrid ingest(const std::string& path, const IngestOptions& opt = {});

std::string signal_json(const SignalGrid& sig);
std::string signal_csv(const SignalGrid& sig);

/// "# key=value" metadata lines, then sigma_index,sigma,x,value rows.
std::string field_csv(const FieldGrid& field);
/// Inverse of field_csv, bit for bit.
FieldGrid parse_field_csv(std::istream& in);

/// printf("%.17g").
std::string fmt17(double v);

}  // namespace scalespace
