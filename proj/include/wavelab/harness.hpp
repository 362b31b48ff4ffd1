#pragma once

#include <wavelab/certificates.hpp>
#include <wavelab/energetics.hpp>
#include <wavelab/io.hpp>
#include <wavelab/support.hpp>

#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace wavelab {

/// Flat scenario configuration. Unknown keys in the JSON document are errors;
/// omega/w0/theta accept a number or the string "auto".
struct Scenario {
  std::string name = "scenario";
  PowerLawEnvelope env;
  std::string profile = "pure_power";          // pure_power | smoothed_power
  std::string initial_data = "gaussian_bump";  // gaussian_bump | hat | ring
  // A radius-4 bump keeps the initial spectrum concentrated at low
  // frequencies, so the oscillatory (wave) component that every time
  // derivative amplifies has died by the time the fit window opens and the
  // higher-order energies show their parabolic rates at desk scale.
  Scalar amplitude = 1, data_radius = 4;
  Scalar ring_center = 3, ring_half_width = 1;
  int dimension = 3;
  std::string geometry = "radial";
  Index grid_m = 4096;
  Scalar cfl = 0.45;
  Scalar t_end = 400;
  int k_max = 4;
  Scalar delta = 0.1, margin = 0.3;
  std::optional<Scalar> omega, w0, theta;  // nullopt = choose automatically
  Scalar C0 = 1.0;
  std::uint64_t seed = 12345;
  Scalar snapshots_per_decade = 64;
};

inline void validate_scenario(const Scenario& s) {
  auto fail = [](const std::string& msg) { throw StageError("config", msg); };
  if (s.profile != "pure_power" && s.profile != "smoothed_power")
    fail("profile must be pure_power or smoothed_power, got '" + s.profile + "'");
  if (s.initial_data != "gaussian_bump" && s.initial_data != "hat" && s.initial_data != "ring")
    fail("initial_data must be gaussian_bump, hat, or ring, got '" + s.initial_data + "'");
  if (s.geometry != "radial") fail("geometry must be 'radial', got '" + s.geometry + "'");
  if (s.dimension < 1 || s.dimension > 7) fail("dimension must be in [1, 7]");
  if (s.grid_m < 64) fail("grid_m must be >= 64");
  if (!(s.cfl > 0 && s.cfl <= 1)) fail("cfl must lie in (0, 1]");
  if (!(s.t_end > 0)) fail("t_end must be positive");
  if (s.k_max < 0 || s.k_max > 8) fail("k_max must be in [0, 8]");
  if (!(s.delta > 0)) fail("delta must be positive");
  if (!(s.margin >= 0)) fail("margin must be nonnegative");
  if (!(s.amplitude != 0)) fail("amplitude must be nonzero");
  if (!(s.data_radius > 0)) fail("data_radius must be positive");
  if (!(s.ring_half_width > 0) || !(s.ring_center > 0))
    fail("ring_center and ring_half_width must be positive");
  if (!(s.snapshots_per_decade >= 4)) fail("snapshots_per_decade must be >= 4");
  if (s.omega && !(*s.omega > 0 && *s.omega < 1)) fail("omega must lie in (0, 1) or be \"auto\"");
  if (s.w0 && !(*s.w0 > 0)) fail("w0 must be positive or \"auto\"");
  if (s.theta && !(*s.theta > 0)) fail("theta must be positive or \"auto\"");
  try {
    s.env.validate();
  } catch (const std::exception& e) {
    fail(e.what());
  }
}

inline Scenario scenario_from_json(const Json& j) {
  if (!j.is_object()) throw StageError("config", "scenario document must be a JSON object");
  Scenario s;
  auto num = [](const Json& v, const std::string& key) -> Scalar {
    if (!v.is_number()) throw StageError("config", "key '" + key + "' must be a number");
    return v.get<Scalar>();
  };
  auto integer = [&](const Json& v, const std::string& key) -> long {
    if (!v.is_number_integer()) throw StageError("config", "key '" + key + "' must be an integer");
    return v.get<long>();
  };
  auto str = [](const Json& v, const std::string& key) -> std::string {
    if (!v.is_string()) throw StageError("config", "key '" + key + "' must be a string");
    return v.get<std::string>();
  };
  auto auto_or_num = [&](const Json& v, const std::string& key) -> std::optional<Scalar> {
    if (v.is_string()) {
      if (v.get<std::string>() != "auto")
        throw StageError("config", "key '" + key + "' must be a number or \"auto\"");
      return std::nullopt;
    }
    return num(v, key);
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "name") s.name = str(value, key);
    else if (key == "alpha") s.env.alpha = num(value, key);
    else if (key == "beta") s.env.beta = num(value, key);
    else if (key == "gamma") s.env.gamma = num(value, key);
    else if (key == "a0") s.env.a0 = num(value, key);
    else if (key == "a1") s.env.a1 = num(value, key);
    else if (key == "b0") s.env.b0 = num(value, key);
    else if (key == "b1") s.env.b1 = num(value, key);
    else if (key == "c0") s.env.c0 = num(value, key);
    else if (key == "c1") s.env.c1 = num(value, key);
    else if (key == "profile") s.profile = str(value, key);
    else if (key == "initial_data") s.initial_data = str(value, key);
    else if (key == "amplitude") s.amplitude = num(value, key);
    else if (key == "data_radius") s.data_radius = num(value, key);
    else if (key == "ring_center") s.ring_center = num(value, key);
    else if (key == "ring_half_width") s.ring_half_width = num(value, key);
    else if (key == "dimension") s.dimension = int(integer(value, key));
    else if (key == "geometry") s.geometry = str(value, key);
    else if (key == "grid_m") s.grid_m = Index(integer(value, key));
    else if (key == "cfl") s.cfl = num(value, key);
    else if (key == "t_end") s.t_end = num(value, key);
    else if (key == "k_max") s.k_max = int(integer(value, key));
    else if (key == "delta") s.delta = num(value, key);
    else if (key == "margin") s.margin = num(value, key);
    else if (key == "omega") s.omega = auto_or_num(value, key);
    else if (key == "w0") s.w0 = auto_or_num(value, key);
    else if (key == "theta") s.theta = auto_or_num(value, key);
    else if (key == "C0") s.C0 = num(value, key);
    else if (key == "seed") s.seed = std::uint64_t(integer(value, key));
    else if (key == "snapshots_per_decade") s.snapshots_per_decade = num(value, key);
    else throw StageError("config", "unknown key '" + key + "'");
  }
  validate_scenario(s);
  return s;
}

inline Json scenario_to_json(const Scenario& s) {
  Json j;
  j["name"] = s.name;
  j["alpha"] = s.env.alpha;
  j["beta"] = s.env.beta;
  j["gamma"] = s.env.gamma;
  j["a0"] = s.env.a0;
  j["a1"] = s.env.a1;
  j["b0"] = s.env.b0;
  j["b1"] = s.env.b1;
  j["c0"] = s.env.c0;
  j["c1"] = s.env.c1;
  j["profile"] = s.profile;
  j["initial_data"] = s.initial_data;
  j["amplitude"] = s.amplitude;
  j["data_radius"] = s.data_radius;
  j["ring_center"] = s.ring_center;
  j["ring_half_width"] = s.ring_half_width;
  j["dimension"] = s.dimension;
  j["geometry"] = s.geometry;
  j["grid_m"] = s.grid_m;
  j["cfl"] = s.cfl;
  j["t_end"] = s.t_end;
  j["k_max"] = s.k_max;
  j["delta"] = s.delta;
  j["margin"] = s.margin;
  if (s.omega) j["omega"] = *s.omega; else j["omega"] = "auto";
  if (s.w0) j["w0"] = *s.w0; else j["w0"] = "auto";
  if (s.theta) j["theta"] = *s.theta; else j["theta"] = "auto";
  j["C0"] = s.C0;
  j["seed"] = s.seed;
  j["snapshots_per_decade"] = s.snapshots_per_decade;
  return j;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  Json j;
  try {
    j = read_json(path);
  } catch (const std::exception& e) {
    throw StageError("config", e.what());
  }
  return scenario_from_json(j);
}

inline CoefficientField scenario_field(const Scenario& s) {
  const ProfileKind kind =
      s.profile == "pure_power" ? ProfileKind::PurePower : ProfileKind::SmoothedPower;
  return make_power_law(s.env, kind);
}

inline InitialData scenario_data(const Scenario& s) {
  if (s.initial_data == "gaussian_bump") return make_gaussian_bump(s.amplitude, s.data_radius);
  if (s.initial_data == "hat") return make_hat(s.amplitude, s.data_radius);
  return make_ring(s.amplitude, s.ring_center, s.ring_half_width);
}

/// Constant mass density with no spatial weight selects the sharper
/// homogeneous admissibility test; anything else uses the general one.
inline AdmissibilityMode scenario_mode(const Scenario& s) {
  return (s.env.gamma == 0 && s.env.c0 == s.env.c1) ? AdmissibilityMode::HomogeneousC1
                                                    : AdmissibilityMode::General;
}

struct HardyCertificate {
  bool checked = false;  // only meaningful in dimension 3
  bool pass = false;
  Scalar worst_ratio = 0;
  int n_profiles = 0;
};

/// Randomized smooth compactly supported radial profiles; each must satisfy
/// the constant-4 quadratic inequality within 1.25% quadrature slack.
inline HardyCertificate hardy_certificate(int dim, std::uint64_t seed, int n_profiles = 8,
                                          Index m = 2048) {
  HardyCertificate cert;
  if (dim != 3) return cert;
  cert.checked = true;
  cert.n_profiles = n_profiles;
  const Grid g = Grid::radial(3, 10.0, m);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Scalar> amp(-1, 1), center(0, 6), width(1, 3);
  cert.pass = true;
  for (int p = 0; p < n_profiles; ++p) {
    ArrayX f = ArrayX::Zero(g.m);
    const int bumps = 1 + int(rng() % 5);
    for (int b = 0; b < bumps; ++b) {
      const Scalar A = amp(rng), c = center(rng), w = width(rng);
      for (Index i = 0; i < g.m; ++i) f[i] += A * smooth_bump((g.r(i) - c) / w);
    }
    const Scalar ratio = hardy_ratio(g, f);
    cert.worst_ratio = std::max(cert.worst_ratio, ratio);
    if (ratio > 4.05) cert.pass = false;
  }
  return cert;
}

struct CertificateBundle {
  AdmissibilityReport admissibility;
  OmegaWindow window;
  bool weight_built = false;
  std::string weight_error;
  WeightSpec weight;
  WeightVerification wver;
  SubsolutionSpec subsol;
  SubsolutionAudit subaudit;
  MConditions mcond;
  BMatrixReport bmat;
  HardyCertificate hardy;
  Scalar mu = 0;
  bool supnorm_ok = false;  // gates only the sup-norm deliverables
  bool decay_ok = false;    // admissibility + weight + subsolution audits
};

/// Builds every analytic certificate for a scenario. When `strict` is set, a
/// failed decay-side gate raises a stage error (the run pipeline); otherwise
/// failures are recorded and returned (the certify pipeline).
inline CertificateBundle build_certificates(const Scenario& sc, const CoefficientField& field,
                                            const SupportSpec& support, Scalar grid_r_max,
                                            bool strict) {
  CertificateBundle cb;
  cb.admissibility = check_admissibility(sc.env, scenario_mode(sc));
  if (!cb.admissibility.pass) {
    std::string failing;
    for (const AdmissibilityCheck& c : cb.admissibility.checks)
      if (c.enforced && !c.pass) failing += (failing.empty() ? "" : "; ") + c.name;
    if (strict) throw StageError("admissibility", "failed: " + failing);
  }

  cb.window = omega_window(sc.env);
  cb.mu = (2 - sc.env.alpha) / (2 - sc.env.alpha - sc.env.beta);
  const Scalar cert_t_max = std::max(Scalar(4), sc.t_end);
  try {
    const Scalar omega = sc.omega ? *sc.omega : (cb.window.lo + 1) / 2;
    const Scalar w0 = sc.w0 ? *sc.w0 : auto_w0(field, support, omega, cert_t_max);
    const Scalar theta =
        sc.theta ? *sc.theta : auto_theta(cb.mu, sc.delta, w0, omega, cert_t_max);
    cb.weight = build_weight(sc.env, omega, w0, theta + omega, sc.C0);
    cb.weight_built = true;
    cb.wver = verify_weight(cb.weight, field, support, cert_t_max);
    if (!cb.wver.found) {
      cb.weight_error = "no start time T0 verified all weight inequalities through t_end";
      if (strict) throw StageError("certificates", cb.weight_error);
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    cb.weight_error = e.what();
    if (strict) throw StageError("certificates", cb.weight_error);
  }

  SubsolutionPlan plan;
  plan.r_hi = std::max(Scalar(1000), Scalar(1.05) * grid_r_max);
  cb.subsol = construct_radial_subsolution(field, sc.dimension, sc.delta, plan);
  cb.subaudit = audit_subsolution(cb.subsol, field);
  if (!cb.subaudit.pass && strict)
    throw StageError("certificates", "stationary subsolution audit failed");

  cb.mcond = lambda_exponents(field, support, cert_t_max, sc.dimension);

  ArrayX rs(256);
  const Scalar r_lo = 1e-2, r_hi = std::max(Scalar(100), grid_r_max);
  for (Index i = 0; i < rs.size(); ++i)
    rs[i] = r_lo * std::pow(r_hi / r_lo, Scalar(i) / Scalar(rs.size() - 1));
  cb.bmat = check_b_matrix_condition(field, sc.dimension, rs);
  cb.hardy = hardy_certificate(sc.dimension, sc.seed);

  cb.supnorm_ok = sc.dimension == 3 && cb.bmat.pass && cb.hardy.pass;
  cb.decay_ok = cb.admissibility.pass && cb.weight_built && cb.wver.found && cb.subaudit.pass;
  return cb;
}

// ---- JSON serialization ----

inline Json json_of(const AdmissibilityReport& r) {
  Json checks = Json::array();
  for (const AdmissibilityCheck& c : r.checks) {
    Json jc;
    jc["name"] = c.name;
    jc["value"] = c.value;
    jc["bound"] = c.bound;
    jc["strict"] = c.strict;
    jc["pass"] = c.pass;
    jc["enforced"] = c.enforced;
    if (!c.note.empty()) jc["note"] = c.note;
    checks.push_back(jc);
  }
  Json j;
  j["mode"] = r.mode == AdmissibilityMode::General ? "general" : "homogeneous_c1";
  j["pass"] = r.pass;
  j["checks"] = checks;
  return j;
}

inline Json json_of(const CertificateBundle& cb, const SupportSpec& support, const Grid& grid) {
  Json j;
  j["admissibility"] = json_of(cb.admissibility);
  j["omega_window"] = {{"lo", cb.window.lo}, {"hi", cb.window.hi}, {"empty", cb.window.empty}};
  Json w;
  w["built"] = cb.weight_built;
  if (!cb.weight_error.empty()) w["error"] = cb.weight_error;
  if (cb.weight_built) {
    w["omega"] = cb.weight.omega;
    w["w0"] = cb.weight.w0;
    w["nu"] = cb.weight.nu;
    w["theta"] = cb.weight.theta;
    w["C0"] = cb.weight.C0;
    w["T0_found"] = cb.wver.found;
    if (cb.wver.found) w["T0"] = cb.wver.T0;
    Json recs = Json::array();
    for (const InequalityRecord& r : cb.wver.records)
      recs.push_back({{"name", r.name},
                      {"worst_margin", r.worst_margin},
                      {"worst_t", r.worst_t},
                      {"worst_x", r.worst_x},
                      {"pass", r.pass}});
    w["inequalities"] = recs;
  }
  j["weight"] = w;
  j["subsolution"] = {{"mu_formula", cb.subsol.mu_formula},
                      {"mu_numeric", cb.subsol.mu_numeric},
                      {"min_ratio_radius", cb.subsol.min_ratio_radius},
                      {"delta", cb.subsol.delta},
                      {"nonneg", cb.subaudit.nonneg},
                      {"growth_ok", cb.subaudit.growth_ok},
                      {"growth_slope", cb.subaudit.growth_slope},
                      {"growth_bound", cb.subaudit.growth_bound},
                      {"equation_ok", cb.subaudit.equation_ok},
                      {"worst_residual", cb.subaudit.worst_residual},
                      {"max_abs_residual", cb.subaudit.max_abs_residual},
                      {"pass", cb.subaudit.pass}};
  j["m_conditions"] = {{"lambda1", cb.mcond.lambda1}, {"lambda2", cb.mcond.lambda2},
                       {"K1", cb.mcond.K1},           {"K2", cb.mcond.K2},
                       {"n_times", cb.mcond.n_times}, {"note", cb.mcond.note}};
  j["b_matrix"] = {{"bounded_ok", cb.bmat.bounded_ok},
                   {"derivative_ok", cb.bmat.derivative_ok},
                   {"matrix_ok", cb.bmat.matrix_ok},
                   {"deriv_K", cb.bmat.deriv_K},
                   {"deriv_slope", cb.bmat.deriv_slope},
                   {"min_eigenvalue", cb.bmat.min_eigenvalue},
                   {"min_eig_radius", cb.bmat.min_eig_radius},
                   {"pass", cb.bmat.pass}};
  j["hardy"] = {{"checked", cb.hardy.checked},
                {"pass", cb.hardy.pass},
                {"worst_ratio", cb.hardy.worst_ratio},
                {"n_profiles", cb.hardy.n_profiles}};
  j["mu"] = cb.mu;
  j["supnorm_ok"] = cb.supnorm_ok;
  j["decay_ok"] = cb.decay_ok;
  j["support"] = {{"K", support.K}, {"p", support.p},   {"q0", support.q0},
                  {"R", support.R}, {"qR", support.qR}};
  j["grid"] = {{"m", grid.m}, {"r_max", grid.r_max}, {"dx", grid.dx}};
  return j;
}

inline Json json_of(const ComparisonVerdict& v) {
  Json j;
  j["quantity"] = v.quantity;
  j["fitted"] = v.fitted;
  j["predicted"] = v.predicted;
  j["margin"] = v.margin;
  j["direction"] = v.direction == Direction::AtLeastAsFast ? "at_least_as_fast" : "two_sided";
  j["pass"] = v.pass;
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

inline Json json_of(const AuditReport& rep) {
  Json entries = Json::array();
  for (const AuditEntry& e : rep.entries) {
    Json je;
    je["name"] = e.name;
    je["skipped"] = e.skipped;
    if (!e.skipped) {
      je["lhs"] = e.lhs;
      je["rhs"] = e.rhs;
      je["ratio"] = e.ratio;
      je["ratio_max"] = e.ratio_max;
      je["worst_t"] = e.worst_t;
      je["slope"] = e.slope;
      je["vacuous"] = e.vacuous;
      je["pass"] = e.pass;
    }
    if (!e.note.empty()) je["note"] = e.note;
    entries.push_back(je);
  }
  Json j;
  j["T0"] = rep.T0;
  j["t_final"] = rep.t_final;
  j["entries"] = entries;
  return j;
}

inline Json json_of(const ConeReport& rep) {
  Json checks = Json::array();
  for (const ConeCheck& c : rep.checks)
    checks.push_back({{"snapshot_t", c.t},
                      {"predicted_radius", c.predicted},
                      {"measured_radius", c.measured},
                      {"outside_fraction", c.outside_fraction},
                      {"inconclusive", c.inconclusive},
                      {"pass", c.pass}});
  Json j;
  j["pass"] = rep.pass;
  j["inconclusive"] = rep.inconclusive;
  j["checks"] = checks;
  return j;
}

// ---- pipelines ----

struct RunOutcome {
  bool all_pass = false;
  Scalar mu = 0, T0 = 0;
  Scalar fit_lo = 0, fit_hi = 0;
  std::vector<ComparisonVerdict> verdicts;
  std::vector<std::string> skipped;
  bool audit_pass = true, cone_pass = true, pointwise_pass = true;
  CertificateBundle certs;
  std::vector<EnergyRecord> records;
  std::filesystem::path out_dir;
};

namespace detail {

inline CsvTable records_to_csv(const std::vector<EnergyRecord>& recs) {
  CsvTable table;
  const int k_max = int(recs.at(0).E.size()) - 1;
  table.header.push_back("t");
  for (int k = 0; k <= k_max; ++k) table.header.push_back("E" + std::to_string(k));
  table.header.insert(table.header.end(),
                      {"damping", "linf", "M_norm", "M2_norm", "support_radius"});
  for (const EnergyRecord& r : recs) {
    std::vector<Scalar> row{r.t};
    for (Scalar e : r.E) row.push_back(e);
    row.insert(row.end(), {r.damping, r.linf, r.M_norm, r.M2_norm, r.support_radius});
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline std::vector<EnergyRecord> records_from_csv(const CsvTable& table) {
  int k_max = -1;
  while (true) {
    bool found = false;
    for (const std::string& h : table.header)
      if (h == "E" + std::to_string(k_max + 1)) found = true;
    if (!found) break;
    ++k_max;
  }
  if (k_max < 0) throw std::runtime_error("csv: no energy columns E0..Ek found");
  const Index ct = table.column("t");
  std::vector<Index> ce;
  for (int k = 0; k <= k_max; ++k) ce.push_back(table.column("E" + std::to_string(k)));
  const Index cd = table.column("damping"), cl = table.column("linf"),
              cm = table.column("M_norm"), cm2 = table.column("M2_norm"),
              cs = table.column("support_radius");
  std::vector<EnergyRecord> recs;
  for (const auto& row : table.rows) {
    EnergyRecord r;
    r.t = row[ct];
    for (Index c : ce) r.E.push_back(row[c]);
    r.damping = row[cd];
    r.linf = row[cl];
    r.M_norm = row[cm];
    r.M2_norm = row[cm2];
    r.support_radius = row[cs];
    recs.push_back(std::move(r));
  }
  return recs;
}

/// Fits verdicts from the record series over [max(20, 2 T0), 0.9 t_end].
inline void fit_verdicts(RunOutcome& out, const std::vector<EnergyRecord>& recs,
                         const Scenario& sc) {
  out.fit_lo = std::max(Scalar(20), 2 * out.T0);
  out.fit_hi = 0.9 * sc.t_end;
  if (!(out.fit_lo < out.fit_hi))
    throw StageError("fit", "empty fit window [" + std::to_string(out.fit_lo) + ", " +
                                std::to_string(out.fit_hi) + "]; increase t_end");
  std::vector<Scalar> ts;
  for (const EnergyRecord& r : recs) ts.push_back(r.t);
  auto fit_series = [&](auto&& get) {
    std::vector<Scalar> v;
    for (const EnergyRecord& r : recs) v.push_back(get(r));
    return fit_decay_rate(ts, v, out.fit_lo, out.fit_hi);
  };

  const int k_avail = int(recs.at(0).E.size()) - 1;
  const int k_fit = std::min(2, k_avail);
  const PredictedExponents pred = predicted_exponents(out.mu, sc.delta, k_fit);
  std::vector<Scalar> energy_rates;
  for (int k = 0; k <= k_fit; ++k) {
    const DecayFit f = fit_series([k](const EnergyRecord& r) { return r.E[k]; });
    energy_rates.push_back(f.rate);
    out.verdicts.push_back(compare_to_theory("E" + std::to_string(k), f.rate, pred.energy_k[k],
                                             Direction::AtLeastAsFast, sc.margin));
  }
  {
    const DecayFit f = fit_series([](const EnergyRecord& r) { return r.damping; });
    out.verdicts.push_back(
        compare_to_theory("damping", f.rate, pred.damping, Direction::AtLeastAsFast, sc.margin));
  }
  if (out.certs.supnorm_ok) {
    const DecayFit f = fit_series([](const EnergyRecord& r) { return r.linf * r.linf; });
    out.verdicts.push_back(compare_to_theory("linf2", f.rate, out.mu + 1.5 - sc.delta,
                                             Direction::AtLeastAsFast, sc.margin));
  } else {
    out.skipped.push_back("linf2: sup-norm certificates did not pass; no claim made");
  }
  // derivative gain study: each extra time derivative should buy two orders
  for (int k = 0; k + 1 <= k_fit; ++k)
    out.verdicts.push_back(compare_to_theory(
        "gain.E" + std::to_string(k + 1) + "_over_E" + std::to_string(k),
        energy_rates[k + 1] - energy_rates[k], 2.0, Direction::TwoSided, 0.5));
}

inline Json verdicts_json(const RunOutcome& out, const Scenario& sc) {
  Json j;
  j["scenario"] = scenario_to_json(sc);
  j["mu"] = out.mu;
  j["delta"] = sc.delta;
  j["T0"] = out.T0;
  j["fit_window"] = {{"t_lo", out.fit_lo}, {"t_hi", out.fit_hi}};
  Json verdicts = Json::array();
  for (const ComparisonVerdict& v : out.verdicts) verdicts.push_back(json_of(v));
  j["verdicts"] = verdicts;
  j["skipped"] = out.skipped;
  j["audit_pass"] = out.audit_pass;
  j["cone_pass"] = out.cone_pass;
  j["pointwise_pass"] = out.pointwise_pass;
  j["all_pass"] = out.all_pass;
  return j;
}

inline void emit_plots(const std::filesystem::path& dir, const std::vector<EnergyRecord>& recs,
                       Scalar mu, Scalar delta) {
  if (recs.size() < 2) return;  // single snapshot: nothing to draw
  const int k_max = int(recs.at(0).E.size()) - 1;
  std::vector<PlotSeries> all;
  for (int k = 0; k <= k_max; ++k) {
    PlotSeries s;
    s.label = "E" + std::to_string(k);
    for (const EnergyRecord& r : recs) {
      s.x.push_back(r.t);
      s.y.push_back(r.E[k]);
    }
    Scalar xa = 0, ya = 0;
    for (size_t i = 0; i < s.x.size(); ++i)
      if (s.x[i] > 0 && s.y[i] > 0) {
        xa = s.x[i];
        ya = s.y[i];
      }
    const Scalar rate = mu + 1 + 2 * k - delta;
    GuideLine guide{"guide slope -" + format_short(rate), -rate, xa, ya};
    write_loglog_svg(dir / ("plot_E" + std::to_string(k) + ".svg"), s.label + " vs t", {s},
                     {guide});
    all.push_back(std::move(s));
  }
  PlotSeries damp;
  damp.label = "damping";
  for (const EnergyRecord& r : recs) {
    damp.x.push_back(r.t);
    damp.y.push_back(r.damping);
  }
  all.push_back(std::move(damp));
  write_loglog_svg(dir / "plot_overview.svg", "energy functionals vs t", all, {});
}

}  // namespace detail

/// Full pipeline: certificates, cascade evolution, functional series, audits,
/// fits, verdicts, and artifacts (certificate.json, energy.csv, audit.json,
/// verdicts.json, SVG plots) under out_dir.
inline RunOutcome run_scenario(const Scenario& sc, const std::filesystem::path& out_dir,
                               bool plots = true) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw StageError("config", "cannot create output directory: " + out_dir.string());

  RunOutcome out;
  out.out_dir = out_dir;

  CoefficientField field;
  try {
    field = scenario_field(sc);
  } catch (const std::exception& e) {
    throw StageError("coefficients", e.what());
  }
  SupportSpec support;
  try {
    support = build_q(sc.env, sc.data_radius);
  } catch (const std::exception& e) {
    throw StageError("support", e.what());
  }
  Grid grid;
  std::optional<DiscreteField> dfield;
  try {
    const Scalar r_max = 1.1 * predicted_radius(support, sc.t_end);
    grid = Grid::radial(sc.dimension, r_max, sc.grid_m);
    dfield.emplace(grid, field);
  } catch (const std::exception& e) {
    throw StageError("grid", e.what());
  }

  try {
    out.certs = build_certificates(sc, field, support, grid.r_max, /*strict=*/true);
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("certificates", e.what());
  }
  out.mu = out.certs.mu;
  out.T0 = out.certs.wver.T0;
  write_json(out_dir / "certificate.json", json_of(out.certs, support, grid));

  std::vector<Trajectory> trajs;
  try {
    const InitialData data = scenario_data(sc);
    ArrayX u0(grid.m), u1(grid.m);
    for (Index i = 0; i < grid.m; ++i) {
      u0[i] = data.u0(grid.r(i));
      u1[i] = data.u1(grid.r(i));
    }
    Cadence cad;
    cad.kind = Cadence::Kind::Geometric;
    cad.per_decade = sc.snapshots_per_decade;
    trajs = run_cascade(grid, *dfield, SourceField::zero(), u0, u1, sc.k_max, sc.t_end, sc.cfl,
                        cad);
  } catch (const std::exception& e) {
    throw StageError("solver", e.what());
  }

  AuditReport audit;
  ConeReport cone;
  try {
    out.records = energy_records(grid, *dfield, trajs);
    write_csv(out_dir / "energy.csv", detail::records_to_csv(out.records));

    audit = audit_inequalities(out.records, out.certs.weight, out.certs.mcond, out.T0,
                               out.certs.supnorm_ok);
    for (const AuditEntry& e : audit.entries)
      if (!e.skipped && !e.pass) out.audit_pass = false;
    cone = verify_cone(trajs[0], support, grid, *dfield);
    out.cone_pass = cone.pass;

    Json audit_json;
    audit_json["inequalities"] = json_of(audit);
    audit_json["cone"] = json_of(cone);
    if (sc.k_max >= 1) {
      const PointwiseMBound pw =
          check_pointwise_M(grid, *dfield, trajs[0], trajs[1], SourceField::zero());
      out.pointwise_pass = pw.pass;
      audit_json["pointwise_M"] = {{"pass", pw.pass},
                                   {"max_excess", pw.max_excess},
                                   {"worst_t", pw.worst_t},
                                   {"worst_r", pw.worst_r},
                                   {"n_snapshots", pw.n_snapshots}};
    }
    Json diag;
    Json mismatch = Json::array();
    for (const auto& [t, v] : diffusion_mismatch(grid, *dfield, trajs[0]))
      mismatch.push_back({{"t", t}, {"value", v}});
    diag["diffusion_mismatch"] = mismatch;
    Json expw = Json::array();
    for (Scalar frac : {0.25, 0.5, 0.75, 1.0}) {
      const size_t j = std::min(out.records.size() - 1,
                                size_t(frac * Scalar(out.records.size() - 1)));
      const Scalar t = out.records[j].t;
      if (!(t > out.T0)) continue;
      expw.push_back({{"t", t},
                      {"kappa", out.mu - sc.delta},
                      {"value", exp_weighted_l2(grid, *dfield, out.certs.subsol,
                                                trajs[0].snaps[j].u, t, out.mu - sc.delta)}});
    }
    diag["exp_weighted_l2"] = expw;
    if (sc.k_max >= 4) {
      size_t j_mid = 0;
      while (j_mid + 1 < out.records.size() && out.records[j_mid].t < 2) ++j_mid;
      diag["m2_expansion_mismatch"] = {
          {"t", out.records[j_mid].t},
          {"value", m2_expansion_mismatch(grid, *dfield, trajs, j_mid)}};
    }
    audit_json["diagnostics"] = diag;
    write_json(out_dir / "audit.json", audit_json);
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("audit", e.what());
  }

  try {
    detail::fit_verdicts(out, out.records, sc);
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("fit", e.what());
  }

  bool verdicts_pass = true;
  for (const ComparisonVerdict& v : out.verdicts) verdicts_pass = verdicts_pass && v.pass;
  out.all_pass =
      verdicts_pass && out.audit_pass && out.cone_pass && out.pointwise_pass;
  write_json(out_dir / "verdicts.json", detail::verdicts_json(out, sc));

  if (plots) {
    try {
      detail::emit_plots(out_dir, out.records, out.mu, sc.delta);
    } catch (const std::exception& e) {
      throw StageError("plot", e.what());
    }
  }
  return out;
}

struct CertifyOutcome {
  CertificateBundle certs;
  bool pass = false;
};

/// Certificates only: records gate failures (weight construction, coefficient
/// and subsolution audits) instead of aborting; pass reflects the decay-side
/// gates.
inline CertifyOutcome certify_scenario(const Scenario& sc,
                                       const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw StageError("config", "cannot create output directory: " + out_dir.string());
  CoefficientField field;
  try {
    field = scenario_field(sc);
  } catch (const std::exception& e) {
    throw StageError("coefficients", e.what());
  }
  SupportSpec support;
  try {
    support = build_q(sc.env, sc.data_radius);
  } catch (const std::exception& e) {
    throw StageError("support", e.what());
  }
  const Scalar r_max = 1.1 * predicted_radius(support, sc.t_end);
  const Grid grid = Grid::radial(sc.dimension, r_max, sc.grid_m);

  CertifyOutcome out;
  out.certs = build_certificates(sc, field, support, grid.r_max, /*strict=*/false);
  out.pass = out.certs.decay_ok;
  write_json(out_dir / "certificate.json", json_of(out.certs, support, grid));
  return out;
}

/// Re-fits verdicts from an existing energy.csv (certificates are recomputed;
/// the evolution is not rerun). Writes verdicts.json next to the CSV.
inline RunOutcome fit_existing(const Scenario& sc, const std::filesystem::path& out_dir) {
  RunOutcome out;
  out.out_dir = out_dir;
  CoefficientField field;
  try {
    field = scenario_field(sc);
  } catch (const std::exception& e) {
    throw StageError("coefficients", e.what());
  }
  SupportSpec support;
  try {
    support = build_q(sc.env, sc.data_radius);
  } catch (const std::exception& e) {
    throw StageError("support", e.what());
  }
  const Scalar r_max = 1.1 * predicted_radius(support, sc.t_end);
  try {
    out.certs = build_certificates(sc, field, support, r_max, /*strict=*/true);
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("certificates", e.what());
  }
  out.mu = out.certs.mu;
  out.T0 = out.certs.wver.T0;
  try {
    out.records = detail::records_from_csv(read_csv(out_dir / "energy.csv"));
    detail::fit_verdicts(out, out.records, sc);
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("fit", e.what());
  }
  bool verdicts_pass = true;
  for (const ComparisonVerdict& v : out.verdicts) verdicts_pass = verdicts_pass && v.pass;
  out.all_pass = verdicts_pass;
  write_json(out_dir / "verdicts.json", detail::verdicts_json(out, sc));
  return out;
}

/// Replots from an existing energy.csv; guide slopes need mu and delta, taken
/// from the scenario when provided.
inline void plot_existing(const std::filesystem::path& out_dir, const Scenario* sc) {
  std::vector<EnergyRecord> recs;
  try {
    recs = detail::records_from_csv(read_csv(out_dir / "energy.csv"));
  } catch (const std::exception& e) {
    throw StageError("plot", e.what());
  }
  Scalar mu = 1, delta = 0.1;
  if (sc) {
    mu = (2 - sc->env.alpha) / (2 - sc->env.alpha - sc->env.beta);
    delta = sc->delta;
  }
  detail::emit_plots(out_dir, recs, mu, delta);
}

}  // namespace wavelab
