#include "qneq/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "qneq/analysis.hpp"
#include "qneq/random.hpp"

#ifndef QNEQ_VERSION
#define QNEQ_VERSION "0.0.0"
#endif

namespace qneq::cli {

namespace {

using ojson = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no infinities; they are written as null.
ojson number(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

ojson test_json(const TestReport& t) {
  return {{"name", t.name},         {"statistic", number(t.statistic)}, {"dof", t.dof},
          {"p_value", t.p_value},   {"significance", t.significance},   {"reject", t.reject}};
}

ojson fit_json(const HarmonicFit& f) {
  return {{"order", f.order},           {"a0", f.a0},
          {"a", f.a},                   {"b", f.b},
          {"chi2", f.chi2},             {"dof", f.dof},
          {"amplitude1", f.amplitude1}, {"amplitude1_se", number(f.amplitude1_se)},
          {"phase1", f.phase1}};
}

ojson additivity_json(const AdditivityReport& r) {
  return {{"test", test_json(r.test)},
          {"means", r.means},
          {"delta", r.delta},
          {"standard_error", r.standard_error},
          {"exact", r.exact}};
}

ojson envelope(const char* kind, const RunConfig& config) {
  return {{"format", kind}, {"version", kReportVersion}, {"generator", std::string("qneq ") + QNEQ_VERSION},
          {"config", to_json(config)}};
}

double angular_distance(double a, double b) {
  const double d = std::fabs(fold_angle(a) - fold_angle(b));
  return std::min(d, std::numbers::pi - d);
}

OutcomeSummary summary_at(std::span<const PhotonEvent> events, double theta) {
  OutcomeSummary s;
  for (const auto& e : events) {
    if (angular_distance(e.theta, theta) < 1e-9) {
      ++s.n;
      s.n_plus += e.outcome > 0;
    }
  }
  return s;
}

}  // namespace

std::string header_line(const std::string& command) { return std::string("# qneq ") + QNEQ_VERSION + " " + command; }

std::string predict_csv(const RunConfig& config) {
  const auto model = config.model();
  const auto equilibrium = LambdaDensity::equilibrium(model);
  const auto density = config.lambda_density();
  std::string out = header_line("predict") + "\ntheta,p_plus_equilibrium,p_plus_model\n";
  for (double theta : config.protocol_spec().angles) {
    const auto axis = polariser_axis(theta);
    out += fmt(theta) + "," + fmt(exact_prob_plus(axis, equilibrium, model)) + "," +
           fmt(exact_prob_plus(axis, density, model)) + "\n";
  }
  return out;
}

void simulate(const RunConfig& config, std::ostream& out, EventFormat format, unsigned threads) {
  const auto events = run_protocol(config.model(), config.lambda_density(), config.protocol_spec(), threads);
  out << header_line("simulate") << "\n";
  write_events(out, events, format);
}

nlohmann::ordered_json analyze(const RunConfig& config, std::span<const PhotonEvent> events) {
  const double alpha = config.analysis.significance;
  auto table = tabulate(events);
  if (config.analysis.bins > 0) table = rebin(table, config.analysis.bins);

  const auto fit = fit_harmonics(table, 1);
  const auto gof = sinusoid_gof(fit, alpha);
  const auto excess = harmonic_excess_test(table, 1, config.analysis.k_alt, alpha);

  ojson report = envelope("qneq-analysis-report", config);
  report["events"] = events.size();
  ojson rows = ojson::array();
  for (const auto& r : table.rows()) rows.push_back({{"theta", r.theta}, {"n_plus", r.n_plus}, {"n", r.n}});
  report["table"] = rows;
  report["fit"] = fit_json(fit);

  std::vector<double> p{gof.p_value, excess.p_value};
  ojson tests{{"sinusoid_gof", test_json(gof)}, {"harmonic_excess", test_json(excess)}, {"additivity", nullptr}};
  if (config.analysis.additivity_theta1) {
    const double t1 = *config.analysis.additivity_theta1;
    const auto& c = config.analysis.additivity_coefficients;
    const double probe = t1 + std::atan2(c[1], c[0]) / 2;
    const std::array<OutcomeSummary, 4> sets{summary_at(events, t1), summary_at(events, t1 + std::numbers::pi / 4),
                                             OutcomeSummary{}, summary_at(events, probe)};
    if (sets[0].n > 0 && sets[1].n > 0 && sets[3].n > 0) {
      const auto add = additivity_test(sets, {c[0], c[1], 0.0}, alpha);
      ojson a = additivity_json(add);
      a["angles"] = {fold_angle(t1), fold_angle(t1 + std::numbers::pi / 4), fold_angle(probe)};
      tests["additivity"] = a;
      p.push_back(add.test.p_value);
    }
  }
  report["tests"] = tests;
  const double min_p = *std::min_element(p.begin(), p.end());
  const double threshold = alpha / static_cast<double>(p.size());
  report["verdict"] = {{"result", min_p < threshold ? kVerdictSignature : kVerdictQuantum},
                       {"min_p_value", min_p},
                       {"tests", p.size()},
                       {"threshold", threshold}};
  return report;
}

nlohmann::ordered_json additivity(const RunConfig& config, unsigned threads) {
  const auto model = config.model();
  const auto density = config.lambda_density();
  const auto triad = config.triad();
  const Vec3& c = config.additivity.coefficients;
  const UnitAxis probe = UnitAxis::normalized(triad.combine(c));

  std::array<double, 4> exact{};
  std::array<OutcomeSummary, 4> sets;
  for (int i = 0; i < 4; ++i) {
    const UnitAxis& m = i < 3 ? triad[i] : probe;
    exact[static_cast<std::size_t>(i)] = exact_mean(m, density, model);
    sets[static_cast<std::size_t>(i)] = summarize(
        run_arrangement(m, model, density, config.additivity.photons, derive_seed(config.seed, i), threads));
  }
  const double residual = additivity_residual(density, model, triad, c);
  const auto test = additivity_test(sets, c, config.analysis.significance);

  ojson report = envelope("qneq-additivity-report", config);
  report["probe_axis"] = probe.components();
  report["exact"] = {{"means", exact}, {"residual", residual}};
  report["monte_carlo"] = additivity_json(test);
  ojson counts = ojson::array();
  for (const auto& s : sets) counts.push_back({{"n_plus", s.n_plus}, {"n", s.n}});
  report["monte_carlo"]["counts"] = counts;
  report["verdict"] = test.test.reject ? kVerdictSignature : kVerdictQuantum;
  return report;
}

RelaxOutput relax(const RunConfig& config, unsigned threads) {
  const auto run = run_relaxation(config.relaxation_spec(), threads);
  RelaxOutput out;
  out.checkpoints_csv = header_line("relax") + "\ntime,h,divergent\n";
  for (const auto& k : run.checkpoints)
    out.checkpoints_csv += fmt(k.time) + "," + fmt(k.h.value) + "," + (k.h.divergent ? "1" : "0") + "\n";
  out.histogram_csv = header_line("relax") + "\ncell_lo,cell_hi,rho,born\n";
  const auto& g = run.final_grain;
  for (std::size_t i = 0; i < g.cells; ++i) {
    const double lo = static_cast<double>(i) / static_cast<double>(g.cells);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(g.cells);
    out.histogram_csv += fmt(lo) + "," + fmt(hi) + "," + fmt(g.rho[i]) + "," + fmt(g.born[i]) + "\n";
  }
  return out;
}

int exit_code(ErrorKind kind, bool reads_data) {
  switch (kind) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Data: return 3;
    case ErrorKind::Numeric: return 4;
    case ErrorKind::Precondition: return reads_data ? 3 : 2;
  }
  return 1;
}

std::string error_json(const std::string& kind, const std::string& message, int code) {
  ojson j{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
  return j.dump() + "\n";
}

}  // namespace qneq::cli
