#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "aqc/afree.hpp"
#include "aqc/catalog.hpp"
#include "aqc/config.hpp"
#include "aqc/envelope.hpp"
#include "aqc/errors.hpp"
#include "aqc/pseudodiff.hpp"
#include "aqc/relaxation.hpp"
#include "aqc/reporting.hpp"
#include "aqc/rng.hpp"
#include "aqc/symbols.hpp"

namespace fs = std::filesystem;
using namespace aqc;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitVerdictFail = 2;
constexpr int kExitConfigError = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitIo = 5;

std::string out_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.output_dir);
  return (fs::path(cfg.output_dir) / name).string();
}

void stamp(CsvWriter& csv, const RunConfig& cfg) {
  csv.add_comment("config: " + cfg.canonical());
  csv.add_comment("seed: " + std::to_string(cfg.seed));
}

class Report {
 public:
  Report(const RunConfig& cfg, const std::string& name) : path_(out_path(cfg, name)) {
    os_ << "# config: " << cfg.canonical() << "\n";
    os_ << "# seed: " << cfg.seed << "\n";
  }
  template <typename T>
  Report& operator<<(const T& v) {
    os_ << v;
    return *this;
  }
  ~Report() {
    std::ofstream out(path_, std::ios::binary);
    out << os_.str();
  }

 private:
  std::string path_;
  std::ostringstream os_;
};

std::string vec_string(const Eigen::VectorXd& v) {
  std::string s;
  for (int i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
  return s;
}

// --- check-rank ---------------------------------------------------------------

int run_check_rank(const RunConfig& cfg) {
  const CoefficientField op = make_operator(cfg.get("operator", "name", "div2d"));
  const int per_axis = cfg.get_int("operator", "x_samples", 8);
  const int det = cfg.get_int("operator", "lambda_deterministic", 512);
  const int rnd = cfg.get_int("operator", "lambda_random", 512);
  const double gap = cfg.get_double("operator", "gap_threshold", 1e3);

  const auto xs = lattice_samples(op.dims().space_dim, per_axis);
  const auto lams = sphere_samples(op.dims().space_dim, det, rnd, cfg.seed);
  const RankCertificate cert = verify_constant_rank(op, xs, lams, gap);

  // Lipschitz invariant alongside the rank sweep
  const double lip = op.sampled_lipschitz(xs);
  const bool lip_ok = lip <= op.lipschitz_bound() * (1.0 + 1e-6) + 1e-12;

  CsvWriter csv({"operator", "rank", "min_gap", "samples", "verdict", "lipschitz", "lipschitz_bound"});
  stamp(csv, cfg);
  csv.add_row({op.label(), std::to_string(cert.rank), format_double(cert.min_gap),
               std::to_string(cert.sample_count), cert.pass && lip_ok ? "pass" : "fail",
               format_double(lip), format_double(op.lipschitz_bound())});
  csv.write(out_path(cfg, "check_rank_certificate.csv"));

  Report rep(cfg, "check_rank_report.txt");
  rep << "operator: " << op.label() << "\n";
  rep << "consensus rank: " << cert.rank << "\n";
  rep << "min gap: " << format_double(cert.min_gap) << "\n";
  rep << "samples: " << cert.sample_count << "\n";
  rep << "lipschitz estimate: " << format_double(lip) << " (bound "
      << format_double(op.lipschitz_bound()) << ")\n";
  rep << "verdict: " << (cert.pass && lip_ok ? "pass" : "fail") << "\n";
  if (cert.failure) {
    rep << "witness: x = " << vec_string(cert.failure->x)
        << "  lambda = " << vec_string(cert.failure->lambda) << "  rank = " << cert.failure->rank
        << "\n";
  }
  std::cout << "check-rank " << op.label() << ": " << (cert.pass && lip_ok ? "pass" : "fail")
            << " (rank " << cert.rank << ")\n";
  return cert.pass && lip_ok ? kExitPass : kExitVerdictFail;
}

// --- envelope -----------------------------------------------------------------

EnvelopeOptions envelope_options(const RunConfig& cfg, const std::string& section) {
  EnvelopeOptions opts;
  opts.grid_ladder = cfg.get_ints(section, section == "relax" ? "cell_ladder" : "ladder",
                                  {8, 16, 32});
  opts.random_starts = cfg.get_int(section, "random_starts", section == "relax" ? 2 : 4);
  opts.max_iterations = cfg.get_int(section, "max_iterations", 2000);
  opts.relative_tolerance = cfg.get_double(section, "tolerance", 1e-8);
  opts.start_amplitude = cfg.get_double(section, "start_amplitude", 1.0);
  opts.seed = cfg.seed;
  return opts;
}

std::vector<Eigen::VectorXd> xi_list(const RunConfig& cfg, const std::string& section, int d) {
  if (cfg.has(section, "xi_grid")) {
    const auto specs = parse_axis_specs(cfg.get(section, "xi_grid", ""));
    if (static_cast<int>(specs.size()) != d)
      throw ConfigError("xi_grid axis count must equal the field dimension");
    std::vector<Eigen::VectorXd> out;
    long long total = 1;
    for (const auto& [lo, hi, n] : specs) total *= n;
    for (long long i = 0; i < total; ++i) {
      Eigen::VectorXd xi(d);
      long long rem = i;
      for (int a = d - 1; a >= 0; --a) {
        const auto& [lo, hi, n] = specs[a];
        const int idx = static_cast<int>(rem % n);
        rem /= n;
        xi[a] = lo + (hi - lo) * idx / (n - 1);
      }
      out.push_back(xi);
    }
    return out;
  }
  if (!cfg.has(section, "xi")) throw ConfigError("[" + section + "] needs xi or xi_grid");
  Eigen::VectorXd xi = cfg.get_vector(section, "xi", Eigen::VectorXd());
  if (xi.size() != d) throw ConfigError("xi has wrong dimension");
  return {xi};
}

int run_envelope(const RunConfig& cfg) {
  const CoefficientField op = make_operator(cfg.get("operator", "name", "div2d"));
  const EnergyDensity density = make_density(cfg.get("density", "name", "quad"));
  const int d = op.dims().field_dim;
  const Eigen::VectorXd x0 =
      cfg.get_vector("envelope", "x0", Eigen::VectorXd::Constant(op.dims().space_dim, 0.5));
  const Eigen::VectorXd u0 = cfg.get_vector("envelope", "u0", Eigen::VectorXd::Zero(1));

  const double grad_err = gradient_check(density, 64, 1e-4, op.dims().space_dim,
                                         static_cast<int>(u0.size()), d, cfg.seed);
  if (grad_err > 1e-4)
    throw UsageError("envelope: density fails the gradient check (" + format_double(grad_err) +
                     ")");

  EnvelopeOptions opts = envelope_options(cfg, "envelope");
  CsvWriter csv({"xi", "value", "laminate_bound", "density_at_xi", "converged"});
  stamp(csv, cfg);

  Report rep(cfg, "envelope_report.txt");
  rep << "operator: " << op.label() << "\ndensity: " << density.label() << "\n";
  rep << "x0: " << vec_string(x0) << "\nu0: " << vec_string(u0) << "\n";

  for (const Eigen::VectorXd& xi : xi_list(cfg, "envelope", d)) {
    EnvelopeQuery q{&density, &op, x0, u0, xi, opts};
    q.options.seed = derive_seed(cfg.seed, hash_string(vec_string(xi)));
    const EnvelopeResult res = minimize_cell(q);
    csv.add_row({vec_string(xi), format_double(res.value), format_double(res.laminate.value),
                 format_double(density(x0, u0, xi)), res.converged ? "1" : "0"});
    rep << "xi = " << vec_string(xi) << "  value = " << format_double(res.value)
        << "  laminate = " << format_double(res.laminate.value) << "\n";
  }
  csv.write(out_path(cfg, "envelope_slice.csv"));
  std::cout << "envelope: wrote " << out_path(cfg, "envelope_slice.csv") << "\n";
  return kExitPass;
}

// --- relax ---------------------------------------------------------------------

PeriodicField field_from_spec(const RunConfig& cfg, const std::string& spec,
                              const CoefficientField& op, const TorusGrid& grid, int components,
                              const Eigen::VectorXd& x0) {
  if (spec == "zero") return PeriodicField(grid, components);
  std::string name;
  std::vector<double> params;
  parse_label(spec, &name, &params);
  if (name == "laminate") {
    if (params.size() < 3) throw ConfigError("laminate(v) needs k1,k2,amplitude");
    Eigen::VectorXi k(grid.dim);
    for (int a = 0; a < grid.dim; ++a) k[a] = static_cast<int>(params[a]);
    const FrozenSymbol frozen = freeze_certified(op, x0);
    const Eigen::VectorXd a = frozen.kernel_basis(k.cast<double>().normalized()).col(0);
    return laminate_field(grid, k, a, 0.5, 2.0 * params[grid.dim]);
  }
  if (name == "file") throw ConfigError("field file inputs take the form file:<path>");
  if (spec.rfind("file:", 0) == 0) {
    std::ifstream in(spec.substr(5), std::ios::binary);
    if (!in) throw IoError("cannot open field file " + spec.substr(5));
    return read_field_csv(in);
  }
  throw ConfigError("unknown field spec '" + spec + "'");
}

int run_relax(const RunConfig& cfg, bool no_cache) {
  const CoefficientField op = make_operator(cfg.get("operator", "name", "div2d"));
  const EnergyDensity density = make_density(cfg.get("density", "name", "dwell"));
  const int G = cfg.get_int("relax", "grid", 64);
  const TorusGrid grid(op.dims().space_dim, G);
  const Eigen::VectorXd x0 =
      cfg.get_vector("relax", "x0", Eigen::VectorXd::Constant(op.dims().space_dim, 0.5));

  RelaxationQuery query;
  query.density = &density;
  query.coeffs = &op;
  query.u = field_from_spec(cfg, cfg.get("relax", "u", "zero"), op, grid, 1, x0);
  query.v = field_from_spec(cfg, cfg.get("relax", "v", "zero"), op, grid, op.dims().field_dim, x0);
  query.x0 = x0;
  query.r_ladder = cfg.get_doubles("relax", "r_ladder", {1.0, 0.5, 0.25});
  query.m_ladder = cfg.get_ints("relax", "m_ladder", {2, 4, 8});
  query.mu = cfg.get_double("relax", "mu", 0.05);
  query.quadrature_per_axis = cfg.get_int("relax", "quadrature", 3);
  query.admissibility_threshold = cfg.get_double("relax", "admissibility_threshold", 1e-8);
  query.envelope = envelope_options(cfg, "relax");

  EnvelopeCache cache;
  const TheoremGapReport report = theorem_gap(query, no_cache ? nullptr : &cache);

  CsvWriter rhs_csv({"r", "x", "weight", "envelope_value", "laminate_bound"});
  stamp(rhs_csv, cfg);
  for (std::size_t ri = 0; ri < query.r_ladder.size(); ++ri)
    for (const auto& row : report.rhs_detail[ri].rows)
      rhs_csv.add_row({format_double(query.r_ladder[ri]), vec_string(row.x),
                       format_double(row.weight), format_double(row.value),
                       format_double(row.laminate_bound)});
  rhs_csv.write(out_path(cfg, "relax_rhs.csv"));

  CsvWriter ladder_csv(
      {"r", "m", "energy", "residual", "shell_measure", "samples_per_period"});
  stamp(ladder_csv, cfg);
  for (const auto& e : report.ladder)
    ladder_csv.add_row({format_double(e.r), std::to_string(e.m), format_double(e.energy),
                        format_double(e.residual), format_double(e.shell_measure),
                        format_double(e.samples_per_period)});
  ladder_csv.write(out_path(cfg, "relax_ladder.csv"));

  Report rep(cfg, "relax_report.txt");
  rep << "operator: " << op.label() << "\ndensity: " << density.label() << "\n";
  rep << "x0: " << vec_string(x0) << "\n";
  rep << "admissibility of v (wm1 over 1+|v|): " << format_double(report.admissibility_v) << "\n";
  rep << "rhs (envelope integral over final cube): " << format_double(report.rhs) << "\n";
  rep << "lhs liminf estimate (min over final rung): " << format_double(report.lhs_liminf)
      << "\n";
  rep << "gap: " << format_double(report.gap) << "  tolerances: [-"
      << format_double(report.tol_lower) << ", " << format_double(report.tol_upper) << "]\n";
  rep << "residual rate (log-log slope in r at largest m): "
      << format_double(report.residual_rate) << "  analytic target "
      << format_double(report.residual_rate_target)
      << " (finite-grid fit; conflates discretization error with the analytic rate)\n";
  rep << "lower bound direction: " << (report.lower_bound_ok ? "ok" : "violated") << "\n";
  rep << "verdict: " << (report.pass ? "pass" : "fail") << "\n";
  std::cout << "relax: gap = " << format_double(report.gap) << " verdict "
            << (report.pass ? "pass" : "fail") << "\n";
  return report.pass ? kExitPass : kExitVerdictFail;
}

// --- verify-prop22 ---------------------------------------------------------------

int run_prop22(const RunConfig& cfg) {
  const CoefficientField op = make_operator(cfg.get("operator", "name", "div2d"));
  const std::vector<double> qs = cfg.get_doubles("prop22", "qs", {1.5, 2.0, 3.0});
  const std::vector<int> ladder = cfg.get_ints("prop22", "ladder", {8, 16, 32});
  const int ensemble = cfg.get_int("prop22", "ensemble", 9);
  const std::string eta_name = cfg.get("prop22", "eta", "one");
  const SpatialWindow eta =
      eta_name == "one"
          ? SpatialWindow::one()
          : SpatialWindow::bump(Eigen::VectorXd::Constant(op.dims().space_dim, 0.5));

  const Prop22Report report = verify_prop22(op, eta, qs, ensemble, ladder, cfg.seed);

  CsvWriter csv({"grid", "q", "lq_bound", "wm1_bound", "approx_identity", "constraint_bound"});
  stamp(csv, cfg);
  bool finite = true;
  for (const auto& row : report.rows) {
    csv.add_row({std::to_string(row.grid_points), format_double(row.q),
                 format_double(row.lq_bound), format_double(row.wm1_bound),
                 format_double(row.approx_identity), format_double(row.constraint_bound)});
    finite = finite && std::isfinite(row.lq_bound) && std::isfinite(row.wm1_bound) &&
             std::isfinite(row.approx_identity) && std::isfinite(row.constraint_bound);
  }
  csv.write(out_path(cfg, "prop22_ratios.csv"));

  // ladder growth per inequality and q: max over later grids / value at first
  bool stable = true;
  for (double q : qs) {
    double first[4] = {0, 0, 0, 0}, worst[4] = {0, 0, 0, 0};
    bool seen = false;
    for (const auto& row : report.rows) {
      if (row.q != q) continue;
      const double vals[4] = {row.lq_bound, row.wm1_bound, row.approx_identity,
                              row.constraint_bound};
      if (!seen) {
        for (int i = 0; i < 4; ++i) first[i] = vals[i];
        seen = true;
      }
      for (int i = 0; i < 4; ++i) worst[i] = std::max(worst[i], vals[i]);
    }
    for (int i = 0; i < 4; ++i) stable = stable && worst[i] < 2.0 * first[i] + 1e-12;
  }

  Report rep(cfg, "prop22_report.txt");
  rep << "operator: " << op.label() << "\neta: " << report.eta_label << "\n";
  rep << "ratios finite: " << (finite ? "yes" : "no") << "\n";
  rep << "ladder growth below factor 2: " << (stable ? "yes" : "no") << "\n";
  rep << "verdict: " << (finite && stable ? "pass" : "fail") << "\n";
  std::cout << "verify-prop22 " << op.label() << "/" << report.eta_label << ": "
            << (finite && stable ? "pass" : "fail") << "\n";
  return finite && stable ? kExitPass : kExitVerdictFail;
}

// --- decompose -------------------------------------------------------------------

std::vector<DecompositionInput> decompose_ensemble(const RunConfig& cfg,
                                                   const CoefficientField& op,
                                                   const TorusGrid& grid,
                                                   const Eigen::VectorXd& x0, double q) {
  const std::string kind = cfg.get("decompose", "kind", "concentration");
  const std::vector<int> labels = cfg.get_ints("decompose", "labels", {4, 8, 16, 32});
  const FrozenSymbol frozen = freeze_certified(op, x0);
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(grid.dim);
  e1[0] = 1.0;
  const Eigen::VectorXd a = frozen.kernel_basis(e1).col(0);

  std::vector<DecompositionInput> ensemble;
  const AFreeTestSpace space = build_test_space(op, x0, grid);
  for (int n : labels) {
    if (kind == "concentration") {
      const double amp = std::pow(n, grid.dim / q);
      PeriodicField bump = PeriodicField::sample(
          grid, static_cast<int>(a.size()), [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
            double d2 = 0.0;
            for (int ax = 0; ax < grid.dim; ++ax) {
              const double t = wrap_periodic(x[ax] - x0[ax]);
              d2 += t * t;
            }
            if (std::sqrt(d2) < 1.0 / n) return amp * a;
            return Eigen::VectorXd::Zero(a.size());
          });
      ensemble.push_back({n, project_afree(space, bump)});
    } else if (kind == "oscillation") {
      Eigen::VectorXi k = Eigen::VectorXi::Zero(grid.dim);
      k[grid.dim - 1] = n;
      ensemble.push_back({n, laminate_field(grid, k, a, 0.5, 2.0)});
    } else if (kind == "smooth") {
      PeriodicField f = PeriodicField::sample(
          grid, static_cast<int>(a.size()), [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
            return std::cos(2.0 * M_PI * 3.0 * x[grid.dim - 1]) * a;
          });
      ensemble.push_back({n, f});
    } else {
      throw ConfigError("unknown decompose kind '" + kind + "'");
    }
  }
  return ensemble;
}

int run_decompose(const RunConfig& cfg) {
  const CoefficientField op = make_operator(cfg.get("operator", "name", "div2d"));
  const int G = cfg.get_int("decompose", "grid", 64);
  const double q = cfg.get_double("decompose", "q", 2.0);
  const TorusGrid grid(op.dims().space_dim, G);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(grid.dim, 0.5);
  const std::string eta_name = cfg.get("decompose", "eta", "one");
  const SpatialWindow eta = eta_name == "one" ? SpatialWindow::one()
                                              : SpatialWindow::bump(x0);

  const auto ensemble = decompose_ensemble(cfg, op, grid, x0, q);
  const Eigen::VectorXd mean_target = Eigen::VectorXd::Zero(op.dims().field_dim);
  const DecompositionResult result =
      decompose_equiintegrable(op, eta, ensemble, q, mean_target);

  CsvWriter csv({"label", "truncation_level", "lq_before", "lq_after", "diff_ls",
                 "tail_before_8med", "tail_after_8med", "residual_input", "residual_truncated",
                 "residual_output", "mean_error"});
  stamp(csv, cfg);
  const std::size_t m8 = 6;  // index of 8 x pooled median in the gauge ladder
  double sup_before = 0.0, sup_after = 0.0;
  for (const auto& m : result.members) {
    sup_before = std::max(sup_before, m.tails_before[m8]);
    sup_after = std::max(sup_after, m.tails_after[m8]);
    csv.add_row({std::to_string(m.label), format_double(m.truncation_level),
                 format_double(m.lq_before), format_double(m.lq_after),
                 format_double(m.diff_ls[0]), format_double(m.tails_before[m8]),
                 format_double(m.tails_after[m8]), format_double(m.residual_input),
                 format_double(m.residual_truncated), format_double(m.residual_output),
                 format_double(m.mean_error)});
  }
  csv.write(out_path(cfg, "decompose_members.csv"));

  bool pass = sup_after <= 0.1 * sup_before + 1e-15;
  for (const auto& m : result.members) {
    pass = pass && m.mean_error <= 1e-12;
    pass = pass && m.residual_output <= 2.0 * m.residual_truncated + 1e-12;
  }

  Report rep(cfg, "decompose_report.txt");
  rep << "operator: " << op.label() << "\nkind: " << cfg.get("decompose", "kind", "concentration")
      << "\n";
  rep << "pooled nonzero median: " << format_double(result.pooled_median) << "\n";
  rep << "sup tail before (M = 8 median): " << format_double(sup_before) << "\n";
  rep << "sup tail after:  " << format_double(sup_after) << "\n";
  rep << "verdict: " << (pass ? "pass" : "fail") << "\n";
  std::cout << "decompose: " << (pass ? "pass" : "fail") << "\n";
  return pass ? kExitPass : kExitVerdictFail;
}

// --- oracle-compare ----------------------------------------------------------------

int run_oracle_compare(const RunConfig& cfg) {
  const CoefficientField op = make_operator(cfg.get("operator", "name", "div2d"));
  const EnergyDensity density = make_density(cfg.get("density", "name", "dwell"));
  const int d = op.dims().field_dim;
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(op.dims().space_dim, 0.5);
  const Eigen::VectorXd u0 = Eigen::VectorXd::Zero(1);

  const auto specs = parse_axis_specs(cfg.get("oracle", "xi_grid", "-2:2:9,-2:2:9"));
  if (static_cast<int>(specs.size()) != d)
    throw ConfigError("oracle-compare: xi_grid axis count must equal the field dimension");
  const int fine_n = cfg.get_int("oracle", "slice_points", 129);

  XiGrid fine;
  fine.lo.resize(d);
  fine.hi.resize(d);
  for (int a = 0; a < d; ++a) {
    fine.lo[a] = std::get<0>(specs[a]);
    fine.hi[a] = std::get<1>(specs[a]);
    fine.n.push_back(fine_n);
  }
  Eigen::VectorXd sampled(fine.size());
  for (long long i = 0; i < fine.size(); ++i) sampled[i] = density(x0, u0, fine.point(i));
  const Eigen::VectorXd envelope_oracle = convex_biconjugate(fine, sampled);

  EnvelopeOptions opts = envelope_options(cfg, "oracle");
  CsvWriter csv({"xi", "density", "biconjugate", "laminate_bound", "cell_value", "sandwich"});
  stamp(csv, cfg);
  bool pass = true;
  for (const Eigen::VectorXd& xi : xi_list(cfg, "oracle", d)) {
    // locate xi on the fine grid
    std::vector<int> idx(d);
    for (int a = 0; a < d; ++a) {
      const double t = (xi[a] - fine.lo[a]) / (fine.hi[a] - fine.lo[a]) * (fine_n - 1);
      idx[a] = static_cast<int>(std::lround(t));
      if (std::abs(t - idx[a]) > 1e-9)
        throw ConfigError("oracle-compare: xi_grid points must lie on the oracle slice grid");
    }
    const double biconj = envelope_oracle[fine.flatten(idx)];
    EnvelopeQuery q{&density, &op, x0, u0, xi, opts};
    q.options.seed = derive_seed(cfg.seed, hash_string(vec_string(xi)));
    const EnvelopeResult res = minimize_cell(q);
    const double fxi = density(x0, u0, xi);
    const bool ok = biconj - 1e-3 <= res.value &&
                    res.value <= std::min(fxi, res.laminate.value) + 1e-8;
    pass = pass && ok;
    csv.add_row({vec_string(xi), format_double(fxi), format_double(biconj),
                 format_double(res.laminate.value), format_double(res.value), ok ? "1" : "0"});
  }
  csv.write(out_path(cfg, "oracle_compare.csv"));

  Report rep(cfg, "oracle_compare_report.txt");
  rep << "operator: " << op.label() << "\ndensity: " << density.label() << "\n";
  rep << "verdict: " << (pass ? "pass" : "fail") << "\n";
  std::cout << "oracle-compare: " << (pass ? "pass" : "fail") << "\n";
  return pass ? kExitPass : kExitVerdictFail;
}

int dispatch(const std::string& command, const RunConfig& cfg, bool no_cache) {
  if (command == "check-rank") return run_check_rank(cfg);
  if (command == "envelope") return run_envelope(cfg);
  if (command == "relax") return run_relax(cfg, no_cache);
  if (command == "verify-prop22") return run_prop22(cfg);
  if (command == "decompose") return run_decompose(cfg);
  if (command == "oracle-compare") return run_oracle_compare(cfg);
  throw ConfigError("unknown command '" + command + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical toolkit for constrained relaxation on the torus"};
  app.require_subcommand(1);

  std::string config_path, output_override;
  std::uint64_t seed_override = 0;
  bool have_seed_override = false;
  bool no_cache = false;

  std::vector<CLI::App*> subs;
  for (const char* name : {"check-rank", "envelope", "relax", "verify-prop22", "decompose",
                           "oracle-compare"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("config", config_path, "run configuration file")->required();
    sub->add_option("--output", output_override, "output directory override");
    sub->add_option("--seed", seed_override, "seed override")
        ->each([&](const std::string&) { have_seed_override = true; });
    if (std::string(name) == "relax")
      sub->add_flag("--no-cache", no_cache, "disable the envelope cache");
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = load_config_file(config_path);
    const std::string command = app.get_subcommands().front()->get_name();
    if (!cfg.command.empty() && cfg.command != command)
      throw ConfigError("config requests command '" + cfg.command + "' but '" + command +
                        "' was invoked");
    cfg.command = command;
    if (const char* env = std::getenv("AQC_OUTPUT_DIR")) cfg.output_dir = env;
    if (!output_override.empty()) cfg.output_dir = output_override;
    if (have_seed_override) cfg.seed = seed_override;
    return dispatch(command, cfg, no_cache);
  } catch (const ConfigError& e) {
    std::cerr << "config error:\n" << e.what() << "\n";
    return kExitConfigError;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const ResolutionError& e) {
    std::cerr << "resolution error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const RankViolationError& e) {
    std::cerr << "constant-rank violation: " << e.what() << "\n";
    return kExitVerdictFail;
  } catch (const DivergedError& e) {
    std::cerr << "numeric divergence: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
}
