#include "rdiff/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rdiff/error.hpp"
#include "rdiff/norms.hpp"
#include "rdiff/quadrature.hpp"

namespace rdiff {

namespace {

constexpr std::uint64_t kMaxConfigurations = std::uint64_t{1} << 20;

void check_sample(const PointSet& ps, const Sample& s, Model kind) {
  require(s.size() == ps.size(), "sample size must match the point set");
  require(s.kind == kind, "sample model does not match the requested autocorrelation");
  if (kind == Model::B) require(s.dim == ps.dim(), "dislocation dimension differs from point set dimension");
}

void check_dims(const PointSet& ps, const Observable& obs) {
  require(obs.dim == ps.dim(), "observable and point set dimensions differ");
}

// Fills diff = x - y + v - w.
void shifted_difference(std::span<const double> x, std::span<const double> y, std::span<const double> v,
                        std::span<const double> w, std::vector<double>& diff) {
  for (std::size_t a = 0; a < diff.size(); ++a) diff[a] = (x[a] - y[a]) + (v[a] - w[a]);
}

}  // namespace

Complex autocorr_A(const PointSet& ps, const Sample& sample, const Observable& obs) {
  check_sample(ps, sample, Model::A);
  check_dims(ps, obs);
  const std::size_t n = ps.size();
  const auto dim = static_cast<std::size_t>(ps.dim());
  std::vector<double> diff(dim);
  CompensatedSum<Complex> sum;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      auto px = ps.point(x), py = ps.point(y);
      for (std::size_t a = 0; a < dim; ++a) diff[a] = px[a] - py[a];
      sum.add(sample.amplitudes[x] * std::conj(sample.amplitudes[y]) * obs.eval_x(diff));
    }
  }
  return sum.value() / static_cast<double>(n);
}

Complex autocorr_B(const PointSet& ps, const Sample& sample, const Observable& obs) {
  check_sample(ps, sample, Model::B);
  check_dims(ps, obs);
  const std::size_t n = ps.size();
  std::vector<double> diff(static_cast<std::size_t>(ps.dim()));
  CompensatedSum<Complex> sum;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      shifted_difference(ps.point(x), ps.point(y), sample.dislocation(x), sample.dislocation(y), diff);
      sum.add(obs.eval_x(diff));
    }
  }
  return sum.value() / static_cast<double>(n);
}

Complex autocorr(const PointSet& ps, const Sample& sample, const Observable& obs) {
  return sample.kind == Model::A ? autocorr_A(ps, sample, obs) : autocorr_B(ps, sample, obs);
}

Complex exact_mean_A(const PointSet& ps, const AmplitudeSpec& spec, const Observable& obs) {
  check_dims(ps, obs);
  const std::size_t n = ps.size();
  const auto dim = static_cast<std::size_t>(ps.dim());
  std::vector<Complex> m(n);
  std::vector<double> var(n);
  for (std::size_t x = 0; x < n; ++x) {
    const auto& law = spec.law(x);
    m[x] = law.mean();
    var[x] = std::max(0.0, law.second_moment() - std::norm(m[x]));
  }
  std::vector<double> diff(dim, 0.0);
  const Complex alpha0 = obs.eval_x(diff);
  CompensatedSum<Complex> sum;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      auto px = ps.point(x), py = ps.point(y);
      for (std::size_t a = 0; a < dim; ++a) diff[a] = px[a] - py[a];
      sum.add(m[x] * std::conj(m[y]) * obs.eval_x(diff));
    }
  }
  for (std::size_t x = 0; x < n; ++x) sum.add(var[x] * alpha0);
  return sum.value() / static_cast<double>(n);
}

Complex exact_mean_B(const PointSet& ps, const DislocationSpec& spec, const Observable& obs) {
  check_dims(ps, obs);
  require(spec.dim == ps.dim(), "dislocation dimension differs from point set dimension");
  const std::size_t n = ps.size();
  std::vector<double> diff(static_cast<std::size_t>(ps.dim()), 0.0);
  const Complex alpha0 = obs.eval_x(diff);
  CompensatedSum<Complex> sum;
  for (std::size_t x = 0; x < n; ++x) {
    const auto& lx = spec.law(x);
    for (std::size_t y = 0; y < n; ++y) {
      if (x == y) continue;
      const auto& ly = spec.law(y);
      for (std::size_t i = 0; i < lx.probs.size(); ++i) {
        if (lx.probs[i] == 0.0) continue;
        for (std::size_t j = 0; j < ly.probs.size(); ++j) {
          if (ly.probs[j] == 0.0) continue;
          shifted_difference(ps.point(x), ps.point(y), lx.support[i], ly.support[j], diff);
          sum.add(lx.probs[i] * ly.probs[j] * obs.eval_x(diff));
        }
      }
    }
  }
  return sum.value() / static_cast<double>(n) + alpha0;
}

Complex exact_mean(const PointSet& ps, const ScattererSpec& spec, const Observable& obs) {
  if (const auto* a = std::get_if<AmplitudeSpec>(&spec)) return exact_mean_A(ps, *a, obs);
  return exact_mean_B(ps, std::get<DislocationSpec>(spec), obs);
}

double debye_waller_mean_1d(const PointSet& ps, const DislocationSpec& spec, const Observable& obs, double rel_tol) {
  require(ps.dim() == 1 && obs.dim == 1 && spec.dim == 1, "Debye-Waller route is implemented in one dimension");
  require(spec.overrides.empty() && spec.default_law.has_value(), "Debye-Waller route needs i.i.d. dislocations");
  require(obs.eval_k && obs.k_tail_radius, "observable needs a k-space density");
  const DislocationLaw& law = *spec.default_law;
  const std::size_t n = ps.size();
  auto density = [&](double k) {
    Complex m;
    for (std::size_t i = 0; i < law.support.size(); ++i) m += law.probs[i] * std::polar(1.0, law.support[i][0] * k);
    const double m2 = std::norm(m);
    Complex s;
    for (std::size_t x = 0; x < n; ++x) s += std::polar(1.0, ps.point(x)[0] * k);
    const double kk[1] = {k};
    return obs.eval_k(kk) * (std::norm(s) / static_cast<double>(n) * m2 + 1.0 - m2);
  };
  const double centre = obs.k_center.empty() ? 0.0 : obs.k_center[0];
  const double radius = obs.k_tail_radius(1e-16);
  double lo = ps.point(0)[0], hi = lo;
  for (std::size_t i = 0; i < n; ++i) {
    lo = std::min(lo, ps.point(i)[0]);
    hi = std::max(hi, ps.point(i)[0]);
  }
  const double piece = 16.0 * std::numbers::pi / std::max(hi - lo, 1.0);
  const int pieces = std::max(1, static_cast<int>(std::ceil(2.0 * radius / piece)));
  double total = 0.0;
  for (int p = 0; p < pieces; ++p) {
    const double a = centre - radius + 2.0 * radius * p / pieces;
    const double b = centre - radius + 2.0 * radius * (p + 1) / pieces;
    total += quad::integrate(density, a, b, rel_tol).value;
  }
  return total;
}

PairTable::PairTable(const PointSet& ps, const ScattererSpec& spec, const Observable& obs)
    : n_(ps.size()), model_(model_of(spec)) {
  check_dims(ps, obs);
  const auto dim = static_cast<std::size_t>(ps.dim());
  probs_.resize(n_);
  site_.resize(n_);
  std::vector<double> diff(dim, 0.0);
  const Complex alpha0 = obs.eval_x(diff);
  const auto* amp = std::get_if<AmplitudeSpec>(&spec);
  const auto* dis = std::get_if<DislocationSpec>(&spec);
  if (dis) require(dis->dim == ps.dim(), "dislocation dimension differs from point set dimension");
  for (std::size_t x = 0; x < n_; ++x) {
    if (amp) {
      const auto& law = amp->law(x);
      probs_[x] = law.probs;
      for (const Complex& v : law.support) site_[x].push_back(alpha0 * std::norm(v));
    } else {
      const auto& law = dis->law(x);
      probs_[x] = law.probs;
      site_[x].assign(law.probs.size(), alpha0);
    }
  }

  pair_offset_.resize(n_ * (n_ - 1) / 2);
  std::size_t total = 0;
  for (std::size_t x = 0; x < n_; ++x) {
    for (std::size_t y = x + 1; y < n_; ++y) {
      pair_offset_[pair_index(x, y)] = total;
      total += probs_[x].size() * probs_[y].size();
    }
  }
  pairs_.resize(total);
  std::vector<double> back(dim);
  for (std::size_t x = 0; x < n_; ++x) {
    for (std::size_t y = x + 1; y < n_; ++y) {
      Complex* t = pairs_.data() + pair_offset_[pair_index(x, y)];
      const std::size_t sy = probs_[y].size();
      auto px = ps.point(x), py = ps.point(y);
      if (amp) {
        for (std::size_t a = 0; a < dim; ++a) {
          diff[a] = px[a] - py[a];
          back[a] = -diff[a];
        }
        const Complex fwd = obs.eval_x(diff), rev = obs.eval_x(back);
        const auto& vx = amp->law(x).support;
        const auto& vy = amp->law(y).support;
        for (std::size_t i = 0; i < vx.size(); ++i) {
          for (std::size_t j = 0; j < sy; ++j) {
            t[i * sy + j] = fwd * vx[i] * std::conj(vy[j]) + rev * vy[j] * std::conj(vx[i]);
          }
        }
      } else {
        const auto& wx = dis->law(x).support;
        const auto& wy = dis->law(y).support;
        for (std::size_t i = 0; i < wx.size(); ++i) {
          for (std::size_t j = 0; j < sy; ++j) {
            shifted_difference(px, py, wx[i], wy[j], diff);
            shifted_difference(py, px, wy[j], wx[i], back);
            t[i * sy + j] = obs.eval_x(diff) + obs.eval_x(back);
          }
        }
      }
    }
  }

  Complex mean = 0.0;
  for (std::size_t x = 0; x < n_; ++x) {
    Complex m = 0.0;
    for (std::size_t i = 0; i < site_[x].size(); ++i) m += probs_[x][i] * site_[x][i];
    mean += m;
  }
  for (std::size_t x = 0; x < n_; ++x) {
    for (std::size_t y = x + 1; y < n_; ++y) {
      const Complex* t = pair(x, y);
      const std::size_t sy = probs_[y].size();
      Complex m = 0.0;
      for (std::size_t i = 0; i < probs_[x].size(); ++i) {
        for (std::size_t j = 0; j < sy; ++j) m += probs_[x][i] * probs_[y][j] * t[i * sy + j];
      }
      mean += m;
    }
  }
  mean_ = mean;
}

Complex PairTable::value(std::span<const std::uint32_t> idx) const {
  require(idx.size() == n_, "configuration size must match the point set");
  Complex v = 0.0;
  for (std::size_t x = 0; x < n_; ++x) v += site_[x][idx[x]];
  for (std::size_t x = 0; x < n_; ++x) {
    const std::size_t ix = idx[x];
    for (std::size_t y = x + 1; y < n_; ++y) v += pair(x, y)[ix * probs_[y].size() + idx[y]];
  }
  return v;
}

double PairTable::variance_hoeffding() const {
  // X = sum_x L_x(i_x) + sum_{x<y} R_xy(i_x, i_y), all components centred and
  // mutually orthogonal, so E|X|^2 is the sum of their second moments.
  std::vector<std::vector<Complex>> L(n_);
  for (std::size_t x = 0; x < n_; ++x) {
    const auto& p = probs_[x];
    Complex m = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) m += p[i] * site_[x][i];
    L[x].resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) L[x][i] = site_[x][i] - m;
  }
  CompensatedSum<double> pair_part;
  std::vector<Complex> ax, by;
  for (std::size_t x = 0; x < n_; ++x) {
    const auto& px = probs_[x];
    for (std::size_t y = x + 1; y < n_; ++y) {
      const auto& py = probs_[y];
      const Complex* t = pair(x, y);
      const std::size_t sx = px.size(), sy = py.size();
      ax.assign(sx, 0.0);
      by.assign(sy, 0.0);
      Complex m = 0.0;
      for (std::size_t i = 0; i < sx; ++i) {
        for (std::size_t j = 0; j < sy; ++j) {
          const Complex f = t[i * sy + j];
          ax[i] += py[j] * f;
          by[j] += px[i] * f;
          m += px[i] * py[j] * f;
        }
      }
      for (auto& a : ax) a -= m;
      for (auto& b : by) b -= m;
      double r2 = 0.0;
      for (std::size_t i = 0; i < sx; ++i) {
        for (std::size_t j = 0; j < sy; ++j) r2 += px[i] * py[j] * std::norm(t[i * sy + j] - m - ax[i] - by[j]);
      }
      pair_part.add(r2);
      for (std::size_t i = 0; i < sx; ++i) L[x][i] += ax[i];
      for (std::size_t j = 0; j < sy; ++j) L[y][j] += by[j];
    }
  }
  CompensatedSum<double> total;
  for (std::size_t x = 0; x < n_; ++x) {
    double s = 0.0;
    for (std::size_t i = 0; i < probs_[x].size(); ++i) s += probs_[x][i] * std::norm(L[x][i]);
    total.add(s);
  }
  total.add(pair_part.value());
  return total.value();
}

std::uint64_t PairTable::configurations() const {
  std::uint64_t c = 1;
  for (const auto& p : probs_) {
    if (c > std::numeric_limits<std::uint64_t>::max() / p.size()) return std::numeric_limits<std::uint64_t>::max();
    c *= p.size();
  }
  return c;
}

double PairTable::variance_enumeration() const {
  const std::uint64_t configs = configurations();
  if (configs > kMaxConfigurations) {
    std::ostringstream msg;
    msg << "enumeration over " << configs << " configurations exceeds the limit of " << kMaxConfigurations;
    fail(ErrorCode::InvalidArgument, msg.str());
  }
  std::vector<std::uint32_t> idx(n_, 0);
  CompensatedSum<double> sum;
  for (std::uint64_t c = 0; c < configs; ++c) {
    double p = 1.0;
    for (std::size_t x = 0; x < n_; ++x) p *= probs_[x][idx[x]];
    if (p > 0.0) sum.add(p * std::norm(centered(idx)));
    for (std::size_t x = 0; x < n_; ++x) {
      if (++idx[x] < probs_[x].size()) break;
      idx[x] = 0;
    }
  }
  return sum.value();
}

Complex centered_value(const PointSet& ps, const ScattererSpec& spec, const Sample& sample, const Observable& obs) {
  require(sample.kind == model_of(spec), "sample model does not match the spec");
  const PairTable table(ps, spec, obs);
  return table.centered(sample.indices);
}

std::string to_string(VariancePath p) {
  switch (p) {
    case VariancePath::Auto: return "auto";
    case VariancePath::Hoeffding: return "hoeffding";
    case VariancePath::Enumeration: return "enumeration";
  }
  return "unknown";
}

double normalization_scale(const PointSet& ps, const ScattererSpec& spec, const Observable& obs) {
  if (const auto* a = std::get_if<AmplitudeSpec>(&spec)) return bounds_of(*a).K * gamma_norm(obs, ps).value;
  return gamma_delta_seminorm(obs, ps, std::get<DislocationSpec>(spec).delta).value;
}

CenteredStats exact_variance(const PointSet& ps, const ScattererSpec& spec, const Observable& obs, VariancePath path) {
  const PairTable table(ps, spec, obs);
  CenteredStats out;
  out.mean = table.mean() / static_cast<double>(ps.size());
  switch (path) {
    case VariancePath::Enumeration:
      out.variance = table.variance_enumeration();
      out.path = VariancePath::Enumeration;
      break;
    case VariancePath::Hoeffding:
      out.variance = table.variance_hoeffding();
      out.path = VariancePath::Hoeffding;
      break;
    case VariancePath::Auto: {
      out.variance = table.variance_hoeffding();
      out.path = VariancePath::Hoeffding;
      if (ps.size() <= kEnumerationSites && table.configurations() <= kMaxConfigurations) {
        const double e = table.variance_enumeration();
        if (std::abs(e - out.variance) > 1e-10 * std::max(1.0, std::abs(e))) {
          std::ostringstream msg;
          msg << "variance paths disagree: hoeffding " << out.variance << " vs enumeration " << e;
          fail(ErrorCode::Internal, msg.str());
        }
        out.cross_checked = true;
      }
      break;
    }
  }
  out.scale = normalization_scale(ps, spec, obs);
  out.normalized =
      out.scale > 0.0 ? out.variance / (static_cast<double>(ps.size()) * out.scale * out.scale) : 0.0;
  return out;
}

}  // namespace rdiff
