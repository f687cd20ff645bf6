#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "qneq/cli/config.hpp"
#include "qneq/cli/events.hpp"
#include "qneq/error.hpp"

namespace qneq::cli {

inline constexpr int kReportVersion = 1;

/// Version line prefixed to every CSV payload.
std::string header_line(const std::string& command);

inline constexpr const char* kVerdictQuantum = "consistent with quantum";
inline constexpr const char* kVerdictSignature = "nonequilibrium signature detected";

/// theta, p_plus_equilibrium, p_plus_model over the protocol angles.
std::string predict_csv(const RunConfig& config);

/// Runs the protocol and writes the event stream.
void simulate(const RunConfig& config, std::ostream& out, EventFormat format, unsigned threads = 0);

/// Fit, sinusoid goodness of fit, harmonic excess and (when the probe angles
/// are configured and present in the data) the additivity test. The verdict is
/// a Bonferroni combination: min p < significance / number of tests.
nlohmann::ordered_json analyze(const RunConfig& config, std::span<const PhotonEvent> events);

/// Exact and Monte Carlo additivity for the configured triad and coefficients.
/// Arrangement i (m1, m2, m3, m) draws from seed derive_seed(seed, i).
nlohmann::ordered_json additivity(const RunConfig& config, unsigned threads = 0);

struct RelaxOutput {
  std::string checkpoints_csv;  // time, h, divergent
  std::string histogram_csv;    // final coarse-grained rho and |psi|^2 per cell
};
RelaxOutput relax(const RunConfig& config, unsigned threads = 0);

/// 0 success, 2 config, 3 data, 4 numeric. Precondition failures count as data
/// errors for commands that read event data and as config errors otherwise.
int exit_code(ErrorKind kind, bool reads_data);

/// Machine-readable error document written to stderr on failure.
std::string error_json(const std::string& kind, const std::string& message, int code);

}  // namespace qneq::cli
