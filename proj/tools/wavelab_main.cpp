// Command-line driver: certify / run / fit / plot a scenario.
#include <wavelab/harness.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>

namespace {

using namespace wavelab;

struct Overrides {
  std::optional<int> k_max;
  std::optional<long> grid_m;
  std::optional<Scalar> cfl, t_end, delta, margin;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, std::string& scenario_path, std::string& out_dir,
                Overrides& ov) {
  cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  cmd->add_option("--out", out_dir, "output directory")->required();
  cmd->add_option("--k-max", ov.k_max, "override cascade depth");
  cmd->add_option("--grid", ov.grid_m, "override radial grid size");
  cmd->add_option("--cfl", ov.cfl, "override CFL number");
  cmd->add_option("--t-end", ov.t_end, "override final time");
  cmd->add_option("--delta", ov.delta, "override rate slack delta");
  cmd->add_option("--margin", ov.margin, "override verdict margin");
  cmd->add_option("--seed", ov.seed, "override RNG seed");
}

Scenario load_with_overrides(const std::string& path, const Overrides& ov) {
  Scenario sc = load_scenario(path);
  if (ov.k_max) sc.k_max = *ov.k_max;
  if (ov.grid_m) sc.grid_m = Index(*ov.grid_m);
  if (ov.cfl) sc.cfl = *ov.cfl;
  if (ov.t_end) sc.t_end = *ov.t_end;
  if (ov.delta) sc.delta = *ov.delta;
  if (ov.margin) sc.margin = *ov.margin;
  if (ov.seed) sc.seed = *ov.seed;
  validate_scenario(sc);
  return sc;
}

void print_verdicts(const RunOutcome& out) {
  std::printf("mu = %s, T0 = %s, fit window [%s, %s]\n", format_short(out.mu).c_str(),
              format_short(out.T0).c_str(), format_short(out.fit_lo).c_str(),
              format_short(out.fit_hi).c_str());
  for (const ComparisonVerdict& v : out.verdicts)
    std::printf("  [%s] %-22s fitted %8s  predicted %8s  (margin %s, %s)\n",
                v.pass ? "pass" : "FAIL", v.quantity.c_str(), format_short(v.fitted).c_str(),
                format_short(v.predicted).c_str(), format_short(v.margin).c_str(),
                v.direction == Direction::AtLeastAsFast ? "at least as fast" : "two sided");
  for (const std::string& s : out.skipped) std::printf("  [skip] %s\n", s.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for damped variable-coefficient waves"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir;
  Overrides ov;

  CLI::App* certify = app.add_subcommand("certify", "check analytic certificates only");
  CLI::App* run = app.add_subcommand("run", "full pipeline: certify, evolve, audit, fit");
  CLI::App* fit = app.add_subcommand("fit", "refit decay rates from an existing energy.csv");
  CLI::App* plot = app.add_subcommand("plot", "regenerate plots from an existing energy.csv");
  for (CLI::App* cmd : {certify, run, fit, plot}) add_common(cmd, scenario_path, out_dir, ov);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const Scenario sc = load_with_overrides(scenario_path, ov);
    if (certify->parsed()) {
      const CertifyOutcome out = certify_scenario(sc, out_dir);
      std::printf("certificates: admissibility %s, weight %s, subsolution %s, "
                  "sup-norm side %s\n",
                  out.certs.admissibility.pass ? "pass" : "FAIL",
                  out.certs.weight_built && out.certs.wver.found ? "pass" : "FAIL",
                  out.certs.subaudit.pass ? "pass" : "FAIL",
                  out.certs.supnorm_ok ? "pass" : "not claimed");
      std::printf("%s\n", out.pass ? "CERTIFY PASS" : "CERTIFY FAIL");
      return out.pass ? 0 : 1;
    }
    if (run->parsed()) {
      const RunOutcome out = run_scenario(sc, out_dir);
      print_verdicts(out);
      std::printf("audits: inequalities %s, cone %s, pointwise %s\n",
                  out.audit_pass ? "pass" : "FAIL", out.cone_pass ? "pass" : "FAIL",
                  out.pointwise_pass ? "pass" : "FAIL");
      std::printf("%s\n", out.all_pass ? "RUN PASS" : "RUN FAIL");
      return out.all_pass ? 0 : 1;
    }
    if (fit->parsed()) {
      const RunOutcome out = fit_existing(sc, out_dir);
      print_verdicts(out);
      std::printf("%s\n", out.all_pass ? "FIT PASS" : "FIT FAIL");
      return out.all_pass ? 0 : 1;
    }
    plot_existing(out_dir, &sc);
    std::printf("plots written to %s\n", out_dir.c_str());
    return 0;
  } catch (const wavelab::StageError& e) {
    std::fprintf(stderr, "error [%s]: %s\n", e.stage().c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
