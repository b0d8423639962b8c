#include "aqc/pseudodiff.hpp"

#include <algorithm>
#include <cmath>

#include "aqc/rng.hpp"

namespace aqc {

namespace {

double smoothstep5(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

// e^{2 pi i m n / G} lookup shared by the quantization loops
struct PhaseTable {
  int G;
  std::vector<std::complex<double>> w;  // w[m] = e^{2 pi i m / G}
  explicit PhaseTable(int G_) : G(G_), w(G_) {
    for (int m = 0; m < G_; ++m) {
      const double a = 2.0 * M_PI * m / G_;
      w[m] = {std::cos(a), std::sin(a)};
    }
  }
  std::complex<double> phase(const int* freq_idx, const int* node_idx, int dim,
                             const TorusGrid& grid) const {
    long long acc = 0;
    for (int a = 0; a < dim; ++a)
      acc += static_cast<long long>(grid.frequency(freq_idx[a])) * node_idx[a];
    int m = static_cast<int>(((acc % G) + G) % G);
    return w[m];
  }
};

}  // namespace

double CutoffChi::operator()(double t) const { return smoothstep5((t - lo) / (hi - lo)); }

SpatialWindow SpatialWindow::one() {
  return SpatialWindow("one", [](const Eigen::VectorXd&) { return 1.0; }, true);
}

SpatialWindow SpatialWindow::bump(Eigen::VectorXd center, double inner, double outer) {
  if (!(0.0 < inner && inner < outer && outer < 0.5))
    throw UsageError("SpatialWindow::bump: need 0 < inner < outer < 1/2");
  return SpatialWindow(
      "bump",
      [center = std::move(center), inner, outer](const Eigen::VectorXd& x) {
        double d2 = 0.0;
        for (int a = 0; a < x.size(); ++a) {
          const double t = wrap_periodic(x[a] - center[a]);
          d2 += t * t;
        }
        const double d = std::sqrt(d2);
        return 1.0 - smoothstep5((d - inner) / (outer - inner));
      },
      false);
}

PeriodicField quantize(const SymbolFunction& sigma, const PeriodicField& v) {
  if (sigma.cols != v.components()) throw UsageError("quantize: symbol/field component mismatch");
  const TorusGrid& grid = v.grid();
  const long long n = grid.cell_count();
  const Eigen::MatrixXcd& sp = v.spectrum();

  if (sigma.x_independent) {
    // pure Fourier multiplier
    Eigen::MatrixXcd out(n, sigma.rows);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(grid.dim);
    for (long long j = 0; j < n; ++j) {
      const Eigen::MatrixXcd m = sigma.eval(x0, grid.frequency_vector(j));
      out.row(j) = (m * sp.row(j).transpose()).transpose();
    }
    return PeriodicField::from_spectrum(grid, out);
  }
  if (sigma.k_independent) {
    // pointwise multiplication
    PeriodicField out(grid, sigma.rows);
    auto& vals = out.mutable_values();
    const Eigen::VectorXd k0 = Eigen::VectorXd::Zero(grid.dim);
    for (long long i = 0; i < n; ++i) {
      const Eigen::MatrixXcd m = sigma.eval(grid.node(i), k0);
      vals.row(i) = (m.real() * v.values().row(i).transpose()).transpose();
    }
    return out;
  }

  PhaseTable phases(grid.points);
  PeriodicField out(grid, sigma.rows);
  auto& vals = out.mutable_values();
  int xi[3], kj[3];
  for (long long i = 0; i < n; ++i) {
    grid.unflatten(i, xi);
    const Eigen::VectorXd x = grid.node(i);
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(sigma.rows);
    for (long long j = 0; j < n; ++j) {
      grid.unflatten(j, kj);
      const Eigen::MatrixXcd m = sigma.eval(x, grid.frequency_vector(j));
      acc += m * sp.row(j).transpose() * phases.phase(kj, xi, grid.dim, grid);
    }
    vals.row(i) = acc.real().transpose();
  }
  return out;
}

PeriodicField apply_A(const CoefficientField& coeffs, const PeriodicField& v) {
  if (v.components() != coeffs.dims().field_dim)
    throw UsageError("apply_A: field component mismatch");
  const TorusGrid& grid = v.grid();
  const int l = coeffs.dims().equation_dim;
  std::vector<PeriodicField> dv;
  dv.reserve(grid.dim);
  for (int a = 0; a < grid.dim; ++a) dv.push_back(spectral_derivative(v, a));
  PeriodicField out(grid, l);
  auto& vals = out.mutable_values();
  for (long long i = 0; i < grid.cell_count(); ++i) {
    const auto mats = coeffs.coefficients(grid.node(i));
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(l);
    for (int a = 0; a < grid.dim; ++a) acc += mats[a] * dv[a].values().row(i).transpose();
    vals.row(i) = acc.transpose();
  }
  return out;
}

ApproxProjection::ApproxProjection(const CoefficientField& coeffs, SpatialWindow eta,
                                   const TorusGrid& grid, double k_ref, CutoffChi chi)
    : coeffs_(&coeffs), eta_(std::move(eta)), grid_(grid), k_ref_(k_ref), chi_(chi) {
  if (!(k_ref > 0.0)) throw UsageError("ApproxProjection: k_ref must be positive");
  const long long n = grid.cell_count();
  const int d = coeffs.dims().field_dim;

  eta_sq_.resize(n);
  for (long long i = 0; i < n; ++i) {
    const double e = eta_(grid.node(i));
    eta_sq_[i] = e * e;
  }
  chi_k_.resize(n);
  int idx[3];
  for (long long j = 0; j < n; ++j) {
    chi_k_[j] = chi_(grid.frequency_vector(j).norm() / k_ref_);
    // self-paired -G/2 rows alias their mirror; keep the projection inside
    // the open band (same convention as the test-space projection)
    grid.unflatten(j, idx);
    for (int a = 0; a < grid.dim; ++a)
      if (idx[a] == grid.points / 2) chi_k_[j] = 0.0;
  }

  // Rank consensus at a representative point inside supp eta.
  Eigen::VectorXd x_rank = Eigen::VectorXd::Constant(grid.dim, 0.5);
  if (!eta_.constant_one()) {
    long long best = 0;
    for (long long i = 0; i < n; ++i)
      if (eta_sq_[i] > eta_sq_[best]) best = i;
    x_rank = grid.node(best);
  }
  rank_ = freeze_certified(coeffs, x_rank).rank();

  if (coeffs.constant_coefficients()) {
    const FrozenSymbol frozen(coeffs, x_rank, rank_);
    multiplier_.resize(n);
    for (long long j = 0; j < n; ++j) {
      const Eigen::VectorXd k = grid_.frequency_vector(j);
      multiplier_[j] = (chi_k_[j] == 0.0 || k.squaredNorm() == 0.0)
                           ? Eigen::MatrixXd::Zero(d, d)
                           : Eigen::MatrixXd(chi_k_[j] * frozen.projector(k / k.norm()));
    }
    return;
  }

  // Variable coefficients: one projector per (node, frequency) with eta != 0
  // and chi != 0. Desk-scale grids only.
  const double bytes = static_cast<double>(n) * n * d * d * sizeof(double);
  if (bytes > 512.0 * 1024 * 1024)
    throw UsageError("ApproxProjection: grid too large for the variable-coefficient table");
  table_.assign(static_cast<std::size_t>(n) * n, Eigen::MatrixXd());
  for (long long i = 0; i < n; ++i) {
    if (eta_sq_[i] == 0.0) continue;
    const FrozenSymbol frozen(coeffs, grid.node(i), rank_);
    for (long long j = 0; j < n; ++j) {
      if (chi_k_[j] == 0.0) continue;
      const Eigen::VectorXd k = grid_.frequency_vector(j);
      try {
        table_[static_cast<std::size_t>(i) * n + j] = frozen.projector(k / k.norm());
      } catch (const RankViolationError&) {
        throw RankViolationError("ApproxProjection: rank failure inside supp eta");
      }
    }
  }
}

PeriodicField ApproxProjection::apply(const PeriodicField& v) const {
  if (!(v.grid() == grid_)) throw UsageError("ApproxProjection::apply: grid mismatch");
  const long long n = grid_.cell_count();
  const int d = coeffs_->dims().field_dim;
  const Eigen::MatrixXcd& sp = v.spectrum();

  if (!multiplier_.empty()) {
    Eigen::MatrixXcd filtered(n, d);
    for (long long j = 0; j < n; ++j)
      filtered.row(j) = (multiplier_[j] * sp.row(j).transpose()).transpose();
    PeriodicField base = PeriodicField::from_spectrum(grid_, filtered);
    if (eta_.constant_one()) return base;
    auto& vals = base.mutable_values();
    for (long long i = 0; i < n; ++i) vals.row(i) *= eta_sq_[i];
    return base;
  }

  PhaseTable phases(grid_.points);
  PeriodicField out(grid_, d);
  auto& vals = out.mutable_values();
  int xi[3], kj[3];
  for (long long i = 0; i < n; ++i) {
    if (eta_sq_[i] == 0.0) continue;
    grid_.unflatten(i, xi);
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(d);
    for (long long j = 0; j < n; ++j) {
      if (chi_k_[j] == 0.0) continue;
      grid_.unflatten(j, kj);
      acc += chi_k_[j] * (table_[static_cast<std::size_t>(i) * n + j] * sp.row(j).transpose()) *
             phases.phase(kj, xi, grid_.dim, grid_);
    }
    vals.row(i) = eta_sq_[i] * acc.real().transpose();
  }
  return out;
}

PeriodicField apply_P_eta(const CoefficientField& coeffs, const SpatialWindow& eta,
                          const PeriodicField& v, double k_ref) {
  return ApproxProjection(coeffs, eta, v.grid(), k_ref).apply(v);
}

PeriodicField random_spectrum_field(const TorusGrid& grid, int components, SpectrumShape shape,
                                    std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const long long n = grid.cell_count();
  Eigen::MatrixXcd coeffs = Eigen::MatrixXcd::Zero(n, components);

  if (shape == SpectrumShape::Concentrated) {
    // a single random frequency pair in the upper half of the band
    std::uniform_int_distribution<int> pick(grid.points / 4, grid.points / 2 - 1);
    int idx[3] = {0, 0, 0};
    for (int a = 0; a < grid.dim; ++a) {
      const int mag = pick(rng);
      idx[a] = grid.frequency_index((gauss(rng) > 0) ? mag : -mag);
    }
    const long long j = grid.flatten(idx);
    for (int c = 0; c < components; ++c)
      coeffs(j, c) = std::complex<double>(gauss(rng), gauss(rng));
  } else {
    for (long long j = 0; j < n; ++j) {
      const double k = grid.frequency_vector(j).norm();
      if (k == 0.0) continue;
      const double amp = (shape == SpectrumShape::White) ? 1.0 : 1.0 / (1.0 + k);
      for (int c = 0; c < components; ++c)
        coeffs(j, c) = amp * std::complex<double>(gauss(rng), gauss(rng));
    }
  }
  PeriodicField f = PeriodicField::from_spectrum(grid, coeffs);
  const double norm = lq_norm(f, 2.0);
  return norm > 1e-14 ? f.scaled(1.0 / norm) : f;
}

Prop22Report verify_prop22(const CoefficientField& coeffs, const SpatialWindow& eta,
                           const std::vector<double>& qs, int ensemble_size,
                           const std::vector<int>& grid_ladder, std::uint64_t seed) {
  Prop22Report report;
  report.operator_label = coeffs.label();
  report.eta_label = eta.label();
  const int d = coeffs.dims().field_dim;
  const SpectrumShape shapes[3] = {SpectrumShape::White, SpectrumShape::Decay,
                                   SpectrumShape::Concentrated};

  for (int G : grid_ladder) {
    const TorusGrid grid(coeffs.dims().space_dim, G);
    const ApproxProjection projection(coeffs, eta, grid);

    struct Member {
      PeriodicField v, pv, rem, av_eta, apv_eta;
    };
    std::vector<Member> members;
    for (int i = 0; i < ensemble_size; ++i) {
      PeriodicField v =
          random_spectrum_field(grid, d, shapes[i % 3], derive_seed(seed, 17ULL * G + i));
      PeriodicField pv = projection.apply(v);
      PeriodicField rem = v - pv;
      PeriodicField av = apply_A(coeffs, v);
      PeriodicField apv = apply_A(coeffs, pv);
      // A_eta g = eta * (A g) pointwise under left quantization
      if (!eta.constant_one()) {
        auto scale_rows = [&](PeriodicField& g) {
          auto& vals = g.mutable_values();
          for (long long r = 0; r < g.size(); ++r) vals.row(r) *= eta(grid.node(r));
        };
        scale_rows(av);
        scale_rows(apv);
      }
      members.push_back({std::move(v), std::move(pv), std::move(rem), std::move(av),
                         std::move(apv)});
    }

    for (double q : qs) {
      Prop22Row row;
      row.grid_points = G;
      row.q = q;
      for (const auto& m : members) {
        const double vq = lq_norm(m.v, q);
        const double vm1 = wm1q_norm(m.v, q);
        row.lq_bound = std::max(row.lq_bound, lq_norm(m.pv, q) / vq);
        row.wm1_bound = std::max(row.wm1_bound, wm1q_norm(m.pv, q) / vm1);
        row.approx_identity = std::max(
            row.approx_identity, lq_norm(m.rem, q) / (wm1q_norm(m.av_eta, q) + vm1));
        row.constraint_bound = std::max(row.constraint_bound, wm1q_norm(m.apv_eta, q) / vm1);
      }
      report.rows.push_back(row);
    }
  }
  return report;
}

namespace {

double quantile_of_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  const double pos = p * (sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double w = pos - lo;
  return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

PeriodicField clamp_amplitude(const PeriodicField& v, double level) {
  Eigen::MatrixXd vals = v.values();
  for (long long i = 0; i < vals.rows(); ++i) {
    const double a = vals.row(i).norm();
    if (a > level) vals.row(i) *= (level <= 0.0 ? 0.0 : level / a);
  }
  return PeriodicField::from_values(v.grid(), std::move(vals));
}

}  // namespace

DecompositionResult decompose_equiintegrable(const CoefficientField& coeffs,
                                             const SpatialWindow& eta,
                                             const std::vector<DecompositionInput>& ensemble,
                                             double q, const Eigen::VectorXd& mean_target,
                                             std::vector<double> s_ladder) {
  if (ensemble.empty()) throw UsageError("decompose_equiintegrable: empty ensemble");
  if (!(q > 1.0)) throw UsageError("decompose_equiintegrable: q must exceed 1");
  const TorusGrid grid = ensemble.front().field.grid();
  const int d = ensemble.front().field.components();
  if (mean_target.size() != d)
    throw UsageError("decompose_equiintegrable: mean target has wrong dimension");
  if (s_ladder.empty()) s_ladder = {q / 2.0 + 0.5};

  DecompositionResult result;
  result.s_ladder = s_ladder;

  // pooled nonzero-amplitude median sets the shared tail gauge
  {
    std::vector<double> pooled;
    for (const auto& in : ensemble)
      for (long long i = 0; i < in.field.size(); ++i) {
        const double a = in.field.values().row(i).norm();
        if (a > 1e-14) pooled.push_back(a);
      }
    std::sort(pooled.begin(), pooled.end());
    result.pooled_median = quantile_of_sorted(pooled, 0.5);
    for (double mult : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0})
      result.m_ladder.push_back(mult * result.pooled_median);
  }

  const ApproxProjection projection(coeffs, eta, grid);

  for (const auto& in : ensemble) {
    if (!(in.field.grid() == grid) || in.field.components() != d)
      throw UsageError("decompose_equiintegrable: inhomogeneous ensemble");
    DecompositionMemberReport rep;
    rep.label = in.label;

    std::vector<double> amps(in.field.size());
    for (long long i = 0; i < in.field.size(); ++i) amps[i] = in.field.values().row(i).norm();
    std::sort(amps.begin(), amps.end());
    const double quant = 1.0 - 1.0 / std::max(2, in.label);
    rep.truncation_level = quantile_of_sorted(amps, 0.5) + quantile_of_sorted(amps, quant);

    PeriodicField truncated = clamp_amplitude(in.field, rep.truncation_level);
    PeriodicField projected = projection.apply(truncated);
    Eigen::VectorXd shift = mean_target - projected.mean();
    PeriodicField out = projected;
    out.mutable_values().rowwise() += shift.transpose();

    rep.lq_before = lq_norm(in.field, q);
    rep.lq_after = lq_norm(out, q);
    for (double s : s_ladder) rep.diff_ls.push_back(lq_norm(out - in.field, s));
    for (double M : result.m_ladder) {
      rep.tails_before.push_back(tail_function(in.field, q, M));
      rep.tails_after.push_back(tail_function(out, q, M));
    }
    rep.residual_input = wm1q_norm(apply_A(coeffs, in.field), q);
    rep.residual_truncated = wm1q_norm(apply_A(coeffs, truncated), q);
    rep.residual_output = wm1q_norm(apply_A(coeffs, out), q);
    rep.mean_error = (out.mean() - mean_target).norm();

    result.members.push_back(std::move(rep));
    result.fields.push_back(std::move(out));
  }
  return result;
}

std::vector<double> perturbation_differences(const std::vector<const EnergyDensity*>& densities,
                                             const std::vector<PeriodicField>& w,
                                             const std::vector<PeriodicField>& v, double q) {
  if (w.size() != v.size() || w.empty())
    throw UsageError("perturbation_differences: ensembles must be nonempty and equal-sized");
  if (densities.size() != 1 && densities.size() != w.size())
    throw UsageError("perturbation_differences: density count must be 1 or the ensemble size");

  // growth spot check against C (1 + |xi|^q)
  for (const EnergyDensity* f : densities) {
    if (f->growth().q > q + 1e-12)
      throw UsageError("perturbation_differences: density growth exponent exceeds q");
    auto rng = make_rng(0xfeedULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int d = w.front().components();
    const Eigen::VectorXd u0 = Eigen::VectorXd::Zero(1);
    for (int i = 0; i < 64; ++i) {
      Eigen::VectorXd y = Eigen::VectorXd::Zero(w.front().grid().dim);
      Eigen::VectorXd xi(d);
      for (int a = 0; a < d; ++a) xi[a] = 4.0 * gauss(rng);
      if ((*f)(y, u0, xi) > f->growth().C * (1.0 + std::pow(xi.norm(), q)) + 1e-9)
        throw UsageError("perturbation_differences: growth bound violated at a sample");
    }
  }

  const Eigen::VectorXd u0 = Eigen::VectorXd::Zero(1);
  std::vector<double> deltas;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const EnergyDensity& f = *densities[densities.size() == 1 ? 0 : i];
    if (!(w[i].grid() == v[i].grid()) || w[i].components() != v[i].components())
      throw UsageError("perturbation_differences: member grids disagree");
    double base = 0.0, shifted = 0.0;
    const long long n = w[i].size();
    for (long long c = 0; c < n; ++c) {
      const Eigen::VectorXd y = w[i].grid().node(c);
      const Eigen::VectorXd wn = w[i].values().row(c).transpose();
      const Eigen::VectorXd vn = v[i].values().row(c).transpose();
      base += f(y, u0, wn);
      shifted += f(y, u0, vn + wn);
    }
    deltas.push_back(std::abs(base - shifted) / static_cast<double>(n));
  }
  return deltas;
}

}  // namespace aqc
