#include "aqc/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aqc/rng.hpp"

namespace aqc {

double cell_energy(const EnergyDensity& f, const Eigen::VectorXd& x0, const Eigen::VectorXd& u0,
                   const Eigen::VectorXd& xi, const PeriodicField& w) {
  if (w.components() != xi.size()) throw UsageError("cell_energy: component mismatch");
  double acc = 0.0;
  Eigen::VectorXd arg(xi.size());
  for (long long i = 0; i < w.size(); ++i) {
    arg = xi + w.values().row(i).transpose();
    acc += f(x0, u0, arg);
  }
  return acc / static_cast<double>(w.size());
}

PeriodicField laminate_field(const TorusGrid& grid, const Eigen::VectorXi& k,
                             const Eigen::VectorXd& a, double theta, double t) {
  if (k.size() != grid.dim) throw UsageError("laminate_field: direction dimension mismatch");
  PeriodicField w(grid, static_cast<int>(a.size()));
  auto& vals = w.mutable_values();
  int idx[3];
  for (long long i = 0; i < grid.cell_count(); ++i) {
    grid.unflatten(i, idx);
    long long dot = 0;
    for (int ax = 0; ax < grid.dim; ++ax) dot += static_cast<long long>(k[ax]) * idx[ax];
    const double frac =
        static_cast<double>(((dot % grid.points) + grid.points) % grid.points) / grid.points;
    const double s = (frac < theta) ? (1.0 - theta) * t : -theta * t;
    vals.row(i) = (s * a).transpose();
  }
  return w;
}

LaminateBound laminate_upper_bound(const FrozenSymbol& frozen, const EnergyDensity& f,
                                   const Eigen::VectorXd& u0, const Eigen::VectorXd& xi,
                                   const EnvelopeOptions& options) {
  const int dim = frozen.dims().space_dim;
  const int d = frozen.dims().field_dim;

  // Integer lattice directions first (they seed exactly periodic laminates),
  // then golden-angle fill up to the requested count.
  struct Direction {
    Eigen::VectorXd unit;
    Eigen::VectorXi integer;  // zero when not a lattice direction
  };
  std::vector<Direction> dirs;
  if (dim == 2) {
    for (int p = 0; p <= 3; ++p)
      for (int q = -3; q <= 3; ++q) {
        if (p == 0 && q != 1) continue;        // vertical representative
        if (p > 0 && q == 0 && p != 1) continue;
        if (p > 0 && q != 0 && std::gcd(p, std::abs(q)) != 1) continue;
        Eigen::VectorXi ki(2);
        ki << p, q;
        Eigen::VectorXd u = ki.cast<double>();
        dirs.push_back({u / u.norm(), ki});
      }
  } else if (dim == 1) {
    Eigen::VectorXi ki(1);
    ki << 1;
    Eigen::VectorXd u(1);
    u << 1.0;
    dirs.push_back({u, ki});
  }
  const int fill = std::max(0, options.laminate_directions - static_cast<int>(dirs.size()));
  for (const auto& u : sphere_samples(dim, fill, 0, 0)) {
    dirs.push_back({u, Eigen::VectorXi::Zero(dim)});
  }

  const int F = std::max(2, options.laminate_fractions);
  const int T = options.laminate_amplitudes | 1;  // force odd so t = 0 is on the grid
  const double tmax = options.laminate_max_amplitude;

  LaminateBound bound;
  bound.value = f(frozen.point(), u0, xi);  // t = 0 baseline
  std::vector<LaminateChoice> candidates;

  Eigen::VectorXd arg_plus(d), arg_minus(d);
  for (const auto& dir : dirs) {
    Eigen::MatrixXd basis;
    try {
      basis = frozen.kernel_basis(dir.unit);
    } catch (const RankViolationError&) {
      continue;  // rank defect along this direction; skip (the certificate reports it)
    }
    for (int b = 0; b < basis.cols(); ++b) {
      const Eigen::VectorXd a = basis.col(b);
      LaminateChoice best_for_dir;
      best_for_dir.value = std::numeric_limits<double>::infinity();
      for (int fi = 1; fi < F; ++fi) {
        const double theta = static_cast<double>(fi) / F;
        for (int ti = 0; ti < T; ++ti) {
          const double t = -tmax + 2.0 * tmax * ti / (T - 1);
          arg_plus = xi + (1.0 - theta) * t * a;
          arg_minus = xi - theta * t * a;
          const double value = theta * f(frozen.point(), u0, arg_plus) +
                               (1.0 - theta) * f(frozen.point(), u0, arg_minus);
          if (value < best_for_dir.value) {
            best_for_dir = LaminateChoice{dir.unit, dir.integer, a, theta, t, value};
          }
        }
      }
      if (best_for_dir.value < std::numeric_limits<double>::infinity())
        candidates.push_back(best_for_dir);
    }
  }

  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const LaminateChoice& a, const LaminateChoice& b) { return a.value < b.value; });
  for (const auto& c : candidates) {
    bound.value = std::min(bound.value, c.value);
    const bool lattice = (c.int_direction.array() != 0).any();
    if (lattice && static_cast<int>(bound.best.size()) < options.laminate_seeds)
      bound.best.push_back(c);
  }
  return bound;
}

namespace {

struct DescentOutcome {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

DescentOutcome descend(const AFreeTestSpace& space, const EnergyDensity& f,
                       const Eigen::VectorXd& x0, const Eigen::VectorXd& u0,
                       const Eigen::VectorXd& xi, PeriodicField& w,
                       const EnvelopeOptions& opts) {
  DescentOutcome out;
  double energy = cell_energy(f, x0, u0, xi, w);
  if (!std::isfinite(energy)) throw DivergedError("minimize_cell: non-finite energy at start");

  const long long cells = w.size();
  const int d = w.components();
  PeriodicField grad(w.grid(), d);
  double step = 1.0;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    out.iterations = iter + 1;
    {
      auto& g = grad.mutable_values();
      Eigen::VectorXd arg(d);
      for (long long i = 0; i < cells; ++i) {
        arg = xi + w.values().row(i).transpose();
        g.row(i) = f.grad_xi(x0, u0, arg).transpose();
      }
    }
    const PeriodicField dir = project_afree(space, grad);
    const double slope = dir.values().squaredNorm() / static_cast<double>(cells);
    if (slope <= 1e-30) {
      out.converged = true;
      break;
    }

    step = std::min(step * 2.0, 1e6);
    bool accepted = false;
    double trial_energy = energy;
    PeriodicField trial(w.grid(), d);
    while (step >= 1e-16) {
      trial = w;
      trial.axpy(-step, dir);
      trial_energy = cell_energy(f, x0, u0, xi, trial);
      if (std::isfinite(trial_energy) &&
          trial_energy <= energy - opts.armijo_slope * step * slope) {
        accepted = true;
        break;
      }
      step *= opts.backtrack;
    }
    if (!accepted) {
      out.converged = true;  // stationary within line-search resolution
      break;
    }
    const double decrease = (energy - trial_energy) / std::max(1.0, std::abs(energy));
    w = std::move(trial);
    energy = trial_energy;
    if (decrease < opts.relative_tolerance) {
      out.converged = true;
      break;
    }
  }
  out.value = energy;
  return out;
}

PeriodicField random_afree_start(const AFreeTestSpace& space, int d, double amplitude,
                                 std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  PeriodicField noise(space.grid(), d);
  auto& vals = noise.mutable_values();
  for (long long i = 0; i < noise.size(); ++i)
    for (int c = 0; c < d; ++c) vals(i, c) = gauss(rng);
  PeriodicField w = project_afree(space, noise);
  const double norm = lq_norm(w, 2.0);
  if (norm > 1e-14) w = w.scaled(amplitude / norm);
  return w;
}

}  // namespace

PeriodicField spectral_upsample(const PeriodicField& v, const TorusGrid& fine) {
  if (fine.dim != v.grid().dim) throw UsageError("spectral_upsample: dimension mismatch");
  if (fine.points < v.grid().points) throw UsageError("spectral_upsample: target grid is coarser");
  if (fine.points == v.grid().points) return v;
  const Eigen::MatrixXcd& sp = v.spectrum();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(fine.cell_count(), v.components());
  int idx[3], fid[3];
  const int half = v.grid().points / 2;
  for (long long i = 0; i < sp.rows(); ++i) {
    v.grid().unflatten(i, idx);
    bool keep = true;
    for (int a = 0; a < v.grid().dim; ++a) {
      if (idx[a] == half) keep = false;  // self-paired band has no mirror on the fine grid
      fid[a] = fine.frequency_index(v.grid().frequency(idx[a]));
    }
    if (keep) out.row(fine.flatten(fid)) = sp.row(i);
  }
  return PeriodicField::from_spectrum(fine, out);
}

EnvelopeResult minimize_cell(const EnvelopeQuery& query) {
  if (!query.density || !query.coeffs) throw UsageError("minimize_cell: missing density or coefficients");
  if (!query.xi.allFinite() || !query.u0.allFinite())
    throw UsageError("minimize_cell: xi and u0 must be finite");
  const EnvelopeOptions& opts = query.options;
  if (opts.grid_ladder.empty()) throw UsageError("minimize_cell: empty grid ladder");
  const int d = query.coeffs->dims().field_dim;
  if (query.xi.size() != d) throw UsageError("minimize_cell: xi has wrong dimension");

  EnvelopeResult result;
  result.value = std::numeric_limits<double>::infinity();

  // Laminate scan once; the argmin entries seed the descent on every rung.
  const FrozenSymbol frozen = freeze_certified(*query.coeffs, query.x0);
  result.laminate = laminate_upper_bound(frozen, *query.density, query.u0, query.xi, opts);

  std::optional<PeriodicField> warm;
  for (std::size_t rung = 0; rung < opts.grid_ladder.size(); ++rung) {
    const int G = opts.grid_ladder[rung];
    const TorusGrid grid(query.coeffs->dims().space_dim, G);
    const AFreeTestSpace space = build_test_space(*query.coeffs, query.x0, grid);

    struct Start {
      std::string kind;
      PeriodicField w;
    };
    std::vector<Start> starts;
    starts.push_back({"zero", PeriodicField(grid, d)});
    if (warm) starts.push_back({"warm", project_afree(space, spectral_upsample(*warm, grid))});
    for (int i = 0; i < opts.random_starts; ++i) {
      const std::uint64_t seed = derive_seed(opts.seed, 1000ULL * G + i);
      starts.push_back({"random" + std::to_string(i),
                        random_afree_start(space, d, opts.start_amplitude, seed)});
    }
    int li = 0;
    for (const auto& c : result.laminate.best) {
      PeriodicField lam = laminate_field(grid, c.int_direction, c.kernel_vector, c.fraction,
                                         c.amplitude);
      starts.push_back({"laminate" + std::to_string(li++), project_afree(space, zero_mean(lam))});
    }

    RungRecord rung_record;
    rung_record.grid_points = G;
    rung_record.value = std::numeric_limits<double>::infinity();
    PeriodicField rung_minimizer(grid, d);
    for (auto& s : starts) {
      DescentOutcome o =
          descend(space, *query.density, query.x0, query.u0, query.xi, s.w, opts);
      rung_record.starts.push_back({s.kind, o.value, o.iterations, o.converged});
      if (o.value < rung_record.value) {
        rung_record.value = o.value;
        rung_minimizer = s.w;
      }
    }
    result.ladder.push_back(rung_record);
    if (rung_record.value < result.value) {
      result.value = rung_record.value;
      result.minimizer = rung_minimizer;
    }
    warm = rung_minimizer;
  }

  result.converged = true;
  for (const auto& rung : result.ladder)
    for (const auto& s : rung.starts) result.converged = result.converged && s.converged;
  return result;
}

// --- biconjugate --------------------------------------------------------------

long long XiGrid::size() const {
  long long s = 1;
  for (int ni : n) s *= ni;
  return s;
}

Eigen::VectorXd XiGrid::point(long long flat) const {
  Eigen::VectorXd x(dim());
  for (int a = dim() - 1; a >= 0; --a) {
    const int i = static_cast<int>(flat % n[a]);
    flat /= n[a];
    x[a] = lo[a] + (hi[a] - lo[a]) * i / (n[a] - 1);
  }
  return x;
}

long long XiGrid::flatten(const std::vector<int>& idx) const {
  long long f = 0;
  for (int a = 0; a < dim(); ++a) f = f * n[a] + idx[a];
  return f;
}

namespace {

// Exact discrete Legendre transform of the points (xs_i, fs_i), evaluated at
// ascending slopes ss: g_j = max_i (ss_j * xs_i - fs_i). Two-pointer sweep
// along the lower convex hull.
void conjugate_1d(const std::vector<double>& xs, const double* fs, std::ptrdiff_t f_stride,
                  const std::vector<double>& ss, double* out, std::ptrdiff_t out_stride) {
  const int n = static_cast<int>(xs.size());
  static thread_local std::vector<int> hull;
  hull.clear();
  for (int i = 0; i < n; ++i) {
    const double fy = fs[i * f_stride];
    if (!std::isfinite(fy)) throw UsageError("convex_biconjugate: non-finite sample");
    while (hull.size() >= 2) {
      const int a = hull[hull.size() - 2], b = hull[hull.size() - 1];
      // drop b if it lies on or above segment a--i
      const double lhs = (fs[b * f_stride] - fs[a * f_stride]) * (xs[i] - xs[a]);
      const double rhs = (fy - fs[a * f_stride]) * (xs[b] - xs[a]);
      if (lhs < rhs) break;
      hull.pop_back();
    }
    hull.push_back(i);
  }
  int j = 0;
  for (std::size_t si = 0; si < ss.size(); ++si) {
    const double s = ss[si];
    while (j + 1 < static_cast<int>(hull.size())) {
      const int a = hull[j], b = hull[j + 1];
      const double slope = (fs[b * f_stride] - fs[a * f_stride]) / (xs[b] - xs[a]);
      if (slope <= s)
        ++j;
      else
        break;
    }
    const int a = hull[j];
    out[si * out_stride] = s * xs[a] - fs[a * f_stride];
  }
}

std::vector<double> axis_coords(const XiGrid& grid, int axis) {
  std::vector<double> xs(grid.n[axis]);
  for (int i = 0; i < grid.n[axis]; ++i)
    xs[i] = grid.lo[axis] + (grid.hi[axis] - grid.lo[axis]) * i / (grid.n[axis] - 1);
  return xs;
}

std::vector<double> slope_grid(const std::vector<double>& xs, const double* fs, long long count,
                               std::ptrdiff_t outer_stride, std::ptrdiff_t inner_stride,
                               long long outer_count, int m) {
  // symmetric slope range covering every adjacent difference quotient
  double L = 1.0;
  for (long long o = 0; o < outer_count; ++o)
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const double df = fs[o * outer_stride + (i + 1) * inner_stride] -
                        fs[o * outer_stride + i * inner_stride];
      L = std::max(L, std::abs(df) / (xs[i + 1] - xs[i]));
    }
  L *= 1.05;
  std::vector<double> ss(m);
  for (int j = 0; j < m; ++j) ss[j] = -L + 2.0 * L * j / (m - 1);
  (void)count;
  return ss;
}

}  // namespace

Eigen::VectorXd convex_biconjugate(const XiGrid& grid, const Eigen::VectorXd& values,
                                   int dual_points_per_axis) {
  const int d = grid.dim();
  if (d < 1 || d > 2) throw UsageError("convex_biconjugate: only 1 or 2 axes supported");
  for (int a = 0; a < d; ++a)
    if (grid.n[a] < 3) throw UsageError("convex_biconjugate: grid too small (< 3 points/axis)");
  if (values.size() != grid.size()) throw UsageError("convex_biconjugate: value count mismatch");

  if (d == 1) {
    const std::vector<double> xs = axis_coords(grid, 0);
    const int n = grid.n[0];
    const int m = dual_points_per_axis > 2 ? (dual_points_per_axis | 1)
                                           : std::max(4 * n + 1, 2049);
    std::vector<double> ss = slope_grid(xs, values.data(), n, 0, 1, 1, m);
    // the data's own difference quotients make hull vertices exact
    for (int i = 0; i + 1 < n; ++i)
      ss.push_back((values[i + 1] - values[i]) / (xs[i + 1] - xs[i]));
    std::sort(ss.begin(), ss.end());
    ss.erase(std::unique(ss.begin(), ss.end()), ss.end());
    std::vector<double> conj(ss.size());
    conjugate_1d(xs, values.data(), 1, ss, conj.data(), 1);
    // second transform: evaluate at the original nodes
    Eigen::VectorXd out(n);
    conjugate_1d(ss, conj.data(), 1, xs, out.data(), 1);
    return out;
  }

  // d == 2, row-major (axis 0 outer, axis 1 inner)
  const int n0 = grid.n[0], n1 = grid.n[1];
  const std::vector<double> xs0 = axis_coords(grid, 0);
  const std::vector<double> xs1 = axis_coords(grid, 1);
  const int m0 = dual_points_per_axis > 2 ? (dual_points_per_axis | 1)
                                          : std::max(4 * std::max(n0, n1) + 1, 769);
  const int m1 = m0;
  std::vector<double> ss0 = slope_grid(xs0, values.data(), n0, 1, n1, n1, m0);
  std::vector<double> ss1 = slope_grid(xs1, values.data(), n1, n1, 1, n0, m1);

  // h1(x0_i, s1_b) = max_j (s1_b x1_j - f(i, j))
  std::vector<double> h1(static_cast<std::size_t>(n0) * m1);
  for (int i = 0; i < n0; ++i)
    conjugate_1d(xs1, values.data() + static_cast<std::ptrdiff_t>(i) * n1, 1, ss1,
                 h1.data() + static_cast<std::ptrdiff_t>(i) * m1, 1);
  // fstar(s0_a, s1_b) = max_i (s0_a x0_i + h1(i, b))
  std::vector<double> neg_h1(h1.size());
  for (std::size_t i = 0; i < h1.size(); ++i) neg_h1[i] = -h1[i];
  std::vector<double> fstar(static_cast<std::size_t>(m0) * m1);
  for (int b = 0; b < m1; ++b)
    conjugate_1d(xs0, neg_h1.data() + b, m1, ss0, fstar.data() + b, m1);
  // h2(s0_a, x1_j) = max_b (x1_j s1_b - fstar(a, b))
  std::vector<double> h2(static_cast<std::size_t>(m0) * n1);
  for (int a = 0; a < m0; ++a)
    conjugate_1d(ss1, fstar.data() + static_cast<std::ptrdiff_t>(a) * m1, 1, xs1,
                 h2.data() + static_cast<std::ptrdiff_t>(a) * n1, 1);
  // f**(x0_i, x1_j) = max_a (x0_i s0_a + h2(a, j))
  std::vector<double> neg_h2(h2.size());
  for (std::size_t i = 0; i < h2.size(); ++i) neg_h2[i] = -h2[i];
  Eigen::VectorXd out(grid.size());
  std::vector<double> col(n0);
  for (int j = 0; j < n1; ++j) {
    conjugate_1d(ss0, neg_h2.data() + j, n1, xs0, col.data(), 1);
    for (int i = 0; i < n0; ++i) out[static_cast<long long>(i) * n1 + j] = col[i];
  }
  return out;
}

}  // namespace aqc
