#pragma once

#include <string>

#include "shelab/config.hpp"

namespace shelab {

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_g17(double v);

/// Creates dir (and parents). Throws on failure.
void ensure_directory(const std::string& dir);

/// Resolve the output run directory: explicit config dir, else the
/// SHELAB_OUT_DIR environment variable, else ./runs; a subdirectory name is
/// appended by the caller.
std::string resolve_out_root(const RunConfig& cfg);

/// Common report header fields: schema version, tool version, generator id,
/// config hash, master seed, resolved config.
nlohmann::json report_header(const RunConfig& cfg);

/// Writes text to path atomically enough for our purposes (truncate+write).
void write_file(const std::string& path, const std::string& text);

/// report.json + levels.csv for an order estimate. The CSV is long-format
/// `study,level,delta,metric,value,stderr`.
void write_order_report(const std::string& dir, const RunConfig& cfg,
                        const OrderEstimate& est,
                        const nlohmann::json& extra_fields);

/// report.json + rows.csv for the asymptotics table.
void write_asymptotics_report(const std::string& dir, const RunConfig& cfg,
                              const AsymptoticsResult& result);

/// report.json + kernel_table.csv (`t,x,y,bc,repr,value`).
void write_kernel_checks_report(const std::string& dir, const RunConfig& cfg,
                                const KernelChecksReport& report);

/// Dispatches the configured study, writes its report files into dir, and
/// returns a one-line summary. Output bytes depend only on the resolved
/// config and seed, never on the thread count.
std::string run_study_to_dir(const RunConfig& cfg, int threads,
                             const std::string& dir);

} // namespace shelab
