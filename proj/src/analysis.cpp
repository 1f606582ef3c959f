#include "hql/analysis.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "hql/csv_format.hpp"
#include "hql/parallel.hpp"

namespace hql::analysis {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void normalize(std::vector<double>& v) {
  const double n = std::sqrt(dot(v, v));
  if (n == 0.0) throw std::runtime_error("degenerate random direction");
  for (double& x : v) x /= n;
}

}  // namespace

std::vector<double> grid_offsets(double half_range, int resolution) {
  if (resolution < 3) throw std::invalid_argument("landscape resolution must be >= 3");
  if (!(half_range > 0.0)) throw std::invalid_argument("landscape half range must be positive");
  std::vector<double> out(resolution);
  const int mid = (resolution - 1) / 2;
  for (int i = 0; i < resolution; ++i)
    out[i] = half_range * (2.0 * i - (resolution - 1)) / (resolution - 1);
  // keep the centre exactly at zero for odd resolutions
  if (resolution % 2 == 1) out[mid] = 0.0;
  return out;
}

std::pair<std::vector<double>, std::vector<double>> random_orthonormal_pair(std::size_t dim,
                                                                            RandomStream& stream) {
  if (dim < 2) throw std::invalid_argument("need at least 2 parameters for a plane");
  std::vector<double> a(dim), b(dim);
  for (double& x : a) x = stream.normal();
  for (double& x : b) x = stream.normal();
  normalize(a);
  // two Gram-Schmidt passes keep the overlap at rounding level
  for (int pass = 0; pass < 2; ++pass) {
    const double p = dot(a, b);
    for (std::size_t i = 0; i < dim; ++i) b[i] -= p * a[i];
  }
  normalize(b);
  return {std::move(a), std::move(b)};
}

double cost_at(const pqc::CircuitTemplate& tmpl, std::span<const double> center,
               std::span<const double> dir_a, double a, std::span<const double> dir_b, double b,
               const data::LabeledDataset& data, double beta, double gamma) {
  std::vector<double> p(center.begin(), center.end());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] += a * dir_a[i] + b * dir_b[i];
  return train::evaluate(tmpl, train::ModelParams::unflatten(tmpl, p), data, beta, gamma).cost;
}

LandscapeGrid landscape_2d(const pqc::CircuitTemplate& tmpl, const train::ModelParams& params,
                           const data::LabeledDataset& data, const LandscapeConfig& config) {
  LandscapeGrid grid;
  grid.offsets = grid_offsets(config.half_range, config.resolution);
  const auto center = params.flatten();
  RandomStream stream(config.seed, "landscape-dirs");
  std::tie(grid.dir_a, grid.dir_b) = random_orthonormal_pair(center.size(), stream);

  const int n = config.resolution;
  grid.costs.assign(static_cast<std::size_t>(n) * n, 0.0);
  parallel_for(grid.costs.size(), config.threads, [&](std::size_t k) {
    const auto i = k / n, j = k % n;
    grid.costs[k] = cost_at(tmpl, center, grid.dir_a, grid.offsets[i], grid.dir_b,
                            grid.offsets[j], data, config.beta, config.gamma);
  });

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double c = grid.at(i, j);
      bool lowest = true;
      int neighbours = 0;
      for (int di = -1; di <= 1 && lowest; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const int ii = i + di, jj = j + dj;
          if (ii < 0 || jj < 0 || ii >= n || jj >= n) continue;
          ++neighbours;
          if (!(c < grid.at(ii, jj))) {
            lowest = false;
            break;
          }
        }
      // border points lack a full neighbourhood and are never reported
      if (!lowest || neighbours < 8) continue;
      std::vector<double> p = center;
      for (std::size_t q = 0; q < p.size(); ++q)
        p[q] += grid.offsets[i] * grid.dir_a[q] + grid.offsets[j] * grid.dir_b[q];
      const auto m = train::evaluate(tmpl, train::ModelParams::unflatten(tmpl, p), data,
                                     config.beta, config.gamma, config.threads);
      grid.minima.push_back({i, j, grid.offsets[i], grid.offsets[j], c, m.accuracy});
    }
  }
  return grid;
}

std::vector<double> slice_1d(const pqc::CircuitTemplate& tmpl, const train::ModelParams& params,
                             const data::LabeledDataset& data, std::span<const double> direction,
                             const LandscapeConfig& config) {
  const auto offsets = grid_offsets(config.half_range, config.resolution);
  const auto center = params.flatten();
  if (direction.size() != center.size())
    throw std::invalid_argument("slice direction has the wrong dimension");
  const std::vector<double> none(center.size(), 0.0);
  std::vector<double> out(offsets.size());
  parallel_for(offsets.size(), config.threads, [&](std::size_t i) {
    out[i] = cost_at(tmpl, center, direction, offsets[i], none, 0.0, data, config.beta,
                     config.gamma);
  });
  return out;
}

std::string LandscapeGrid::to_csv() const {
  std::ostringstream out;
  out << "a,b,cost\n";
  for (int i = 0; i < resolution(); ++i)
    for (int j = 0; j < resolution(); ++j)
      out << format_double(offsets[i]) << ',' << format_double(offsets[j]) << ','
          << format_double(at(i, j)) << '\n';
  return out.str();
}

std::string LandscapeGrid::minima_csv() const {
  std::ostringstream out;
  out << "a,b,cost,accuracy\n";
  for (const auto& m : minima)
    out << format_double(m.a) << ',' << format_double(m.b) << ',' << format_double(m.cost) << ','
        << format_double(m.accuracy) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------

SinusoidFit fit_sinusoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3)
    throw std::invalid_argument("sinusoid fit needs >= 3 paired samples");
  // normal equations for y ~ p0 cos x + p1 sin x + p2
  std::array<std::array<double, 4>, 3> m{};
  for (std::size_t k = 0; k < x.size(); ++k) {
    const std::array<double, 3> f{std::cos(x[k]), std::sin(x[k]), 1.0};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += f[r] * f[c];
      m[r][3] += f[r] * y[k];
    }
  }
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    std::swap(m[col], m[piv]);
    if (std::abs(m[col][col]) < 1e-14) throw std::invalid_argument("sinusoid fit is singular");
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
    }
  }
  const double p0 = m[0][3] / m[0][0], p1 = m[1][3] / m[1][1], p2 = m[2][3] / m[2][2];

  SinusoidFit fit;
  fit.amplitude = std::hypot(p0, p1);
  fit.phase = std::atan2(p1, p0);
  fit.offset = p2;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double model = fit.amplitude * std::cos(x[k] - fit.phase) + fit.offset;
    fit.max_residual = std::max(fit.max_residual, std::abs(model - y[k]));
  }
  return fit;
}

HarmonicScan harmonic_scan(const pqc::CircuitTemplate& tmpl, int param_index, int n_points) {
  if (param_index < 0 || param_index >= tmpl.weight_count())
    throw std::invalid_argument("harmonic scan: parameter index out of range");
  if (n_points < 3) throw std::invalid_argument("harmonic scan needs >= 3 points");
  HarmonicScan scan;
  scan.param_index = param_index;
  const std::vector<double> features(tmpl.feature_count(), 0.0);
  std::vector<double> theta(tmpl.weight_count(), 0.0);
  for (int k = 0; k < n_points; ++k) {
    const double x = 2.0 * std::numbers::pi * k / n_points;
    theta[param_index] = x;
    scan.angles.push_back(x);
    scan.values.push_back(pqc::bind_and_run(tmpl, features, theta));
  }
  scan.fit = fit_sinusoid(scan.angles, scan.values);
  return scan;
}

std::string HarmonicScan::to_csv() const {
  std::ostringstream out;
  out << "angle,g,fit\n";
  for (std::size_t k = 0; k < angles.size(); ++k)
    out << format_double(angles[k]) << ',' << format_double(values[k]) << ','
        << format_double(fit.amplitude * std::cos(angles[k] - fit.phase) + fit.offset) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------

RobustnessConfig default_robustness_grid() {
  constexpr double pi = std::numbers::pi;
  RobustnessConfig c;
  c.thetas = {0.2 * pi, 0.5 * pi, 0.8 * pi};
  c.phis = {-0.5 * pi, 0.0, 0.5 * pi};
  return c;
}

RobustnessGrid robustness_sweep(const data::LabeledDataset& raw, data::DatasetName name,
                                pqc::ArchId arch, const mc::TaskConfig& task,
                                const RobustnessConfig& config) {
  constexpr double pi = std::numbers::pi;
  constexpr double tol = 1e-12;
  if (config.thetas.empty() || config.phis.empty())
    throw std::invalid_argument("robustness grid is empty");
  if (!config.allow_outside) {
    for (double t : config.thetas)
      if (t < 0.2 * pi - tol || t > 0.8 * pi + tol)
        throw std::invalid_argument("robustness theta outside [0.2 pi, 0.8 pi]");
    for (double p : config.phis)
      if (p < -0.5 * pi - tol || p > 0.5 * pi + tol)
        throw std::invalid_argument("robustness phi outside [-0.5 pi, 0.5 pi]");
  }

  std::vector<pqc::FSimParams> jobs{config.nominal};
  for (double t : config.thetas)
    for (double p : config.phis) jobs.push_back({t, p});

  mc::TaskConfig inner = task;
  if (config.threads > 1) inner.ensemble.train.threads = 1;
  std::vector<RobustnessCell> cells(jobs.size());
  parallel_for(jobs.size(), config.threads, [&](std::size_t k) {
    const auto tmpl = pqc::build_template(arch, std::nullopt, jobs[k]);
    const auto cv = mc::cross_validate(raw, name, tmpl, inner, config.n_splits);
    cells[k] = {jobs[k].theta, jobs[k].phi, cv.mean, cv.stddev};
  });

  RobustnessGrid grid;
  grid.nominal = cells.front();
  grid.cells.assign(cells.begin() + 1, cells.end());
  return grid;
}

std::string RobustnessGrid::to_csv() const {
  std::ostringstream out;
  out << "theta_over_pi,phi_over_pi,theta,phi,accuracy,stddev\n";
  auto row = [&](const RobustnessCell& c) {
    out << format_double(c.theta / std::numbers::pi) << ','
        << format_double(c.phi / std::numbers::pi) << ',' << format_double(c.theta) << ','
        << format_double(c.phi) << ',' << format_double(c.accuracy) << ','
        << format_double(c.stddev) << '\n';
  };
  row(nominal);
  for (const auto& c : cells) row(c);
  return out.str();
}

// ---------------------------------------------------------------------------

std::vector<ArchRow> arch_compare(const data::LabeledDataset& raw, data::DatasetName name,
                                  const std::vector<pqc::ImageConfig>& configs,
                                  const mc::TaskConfig& task, bool train) {
  std::vector<ArchRow> rows;
  for (const auto& cfg : configs) {
    const auto tmpl = pqc::build_template(cfg.arch, cfg.conv);
    ArchRow row{cfg.arch, cfg.conv, tmpl.trainable_count(), tmpl.layer_count(), 0.0, {}};
    if (train) {
      const auto out = mc::run_split(raw, name, tmpl, task, 0);
      row.accuracy = out.test_accuracy;
      row.class_accuracy = out.class_test_accuracy;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string arch_table_csv(const std::vector<ArchRow>& rows, double learning_rate) {
  std::ostringstream out;
  out << "arch,lrf,stride,passes,params,layers,learning_rate,accuracy\n";
  for (const auto& r : rows)
    out << pqc::to_string(r.arch) << ',' << r.conv.lrf_rows << 'x' << r.conv.lrf_cols << ','
        << r.conv.stride << ',' << r.conv.passes << ',' << r.params << ',' << r.layers << ','
        << format_double(learning_rate) << ',' << format_double(r.accuracy) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------

Nanos pqc_execution_time(int layers) {
  if (layers < 0) throw std::invalid_argument("layer count must be >= 0");
  return layers * kLayerTime + kReadoutTime;
}

TimingReport hardware_time_estimate(const TimingInputs& in) {
  if (in.m <= 0 || in.shots <= 0 || in.t_rep.count() <= 0 || in.t_rewrite.count() <= 0 ||
      in.batch <= 0 || in.iterations <= 0)
    throw std::invalid_argument("timing estimate inputs must all be positive");
  TimingReport r;
  r.inputs = in;
  r.t_grad = (2 * in.m + 1) * in.shots * in.t_rep;
  r.t_per_sample = r.t_grad + in.t_rewrite;
  r.t_iteration = in.batch * r.t_per_sample;
  r.t_total = in.iterations * r.t_iteration;
  return r;
}

std::string seconds_text(Micros t) {
  const auto us = t.count();
  const bool neg = us < 0;
  const auto mag = neg ? -us : us;
  std::string frac = std::to_string(mag % 1'000'000);
  frac.insert(0, 6 - frac.size(), '0');
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  std::string out = (neg ? "-" : "") + std::to_string(mag / 1'000'000);
  if (!frac.empty()) out += "." + frac;
  return out;
}

std::string TimingReport::to_csv() const {
  std::ostringstream out;
  out << "quantity,microseconds,seconds\n";
  auto row = [&](const char* name, Micros t) {
    out << name << ',' << t.count() << ',' << seconds_text(t) << '\n';
  };
  row("t_rep", inputs.t_rep);
  row("t_rewrite", inputs.t_rewrite);
  row("t_grad", t_grad);
  row("t_per_sample", t_per_sample);
  row("t_iteration", t_iteration);
  row("t_total", t_total);
  return out.str();
}

}  // namespace hql::analysis
