#include "rdiff/pointset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "rdiff/error.hpp"
#include "rdiff/random.hpp"

namespace rdiff {

namespace {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

// Nominal minimal distance of a generator, lowered to the computed minimum when
// coordinate rounding puts some pair a few ulps below it.
double certified_min_dist(const std::vector<double>& coords, int dim, double nominal) {
  const std::size_t d = static_cast<std::size_t>(dim);
  const std::size_t n = coords.size() / d;
  double best2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      best2 = std::min(best2, squared_distance({coords.data() + i * d, d}, {coords.data() + j * d, d}));
    }
  }
  const double best = std::min(nominal, std::sqrt(best2));
  if (best < nominal * (1.0 - 1e-12)) fail(ErrorCode::Internal, "generator produced points closer than intended");
  return best;
}

}  // namespace

double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

PointSet::PointSet(int dim, std::vector<double> coords, double min_dist, std::string label)
    : dim_(dim), coords_(std::move(coords)), min_dist_(min_dist), label_(std::move(label)) {
  require(dim_ >= 1, "point set dimension must be >= 1");
  require(!coords_.empty(), "point set must be non-empty");
  require(coords_.size() % static_cast<std::size_t>(dim_) == 0,
          "coordinate count is not a multiple of the dimension");
  require(min_dist_ > 0.0 && std::isfinite(min_dist_), "min_dist must be positive and finite");
  for (double c : coords_) require(std::isfinite(c), "point coordinates must be finite");
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (distance(point(i), point(j)) < min_dist_) {
        fail(ErrorCode::InvalidArgument, "points " + std::to_string(i) + " and " + std::to_string(j) +
                                             " are closer than min_dist=" + format_g17(min_dist_));
      }
    }
  }
}

std::string PointSet::to_csv() const {
  std::string out = "# dim=" + std::to_string(dim_) + " min_dist=" + format_g17(min_dist_) + " label=" + label_ + "\n";
  for (std::size_t i = 0; i < size(); ++i) {
    auto p = point(i);
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (k) out += ',';
      out += format_g17(p[k]);
    }
    out += '\n';
  }
  return out;
}

PointSet PointSet::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header) || header.rfind("# dim=", 0) != 0) {
    fail(ErrorCode::Io, "point set CSV must start with '# dim=<d> min_dist=<a> label=<s>'");
  }
  int dim = 0;
  double min_dist = 0.0;
  const auto md = header.find(" min_dist=");
  const auto lb = header.find(" label=");
  if (md == std::string::npos || lb == std::string::npos || lb < md) {
    fail(ErrorCode::Io, "malformed point set CSV header: " + header);
  }
  try {
    dim = std::stoi(header.substr(6, md - 6));
    min_dist = std::stod(header.substr(md + 10, lb - md - 10));
  } catch (const std::exception&) {
    fail(ErrorCode::Io, "malformed point set CSV header: " + header);
  }
  std::string label = header.substr(lb + 7);
  std::vector<double> coords;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    int count = 0;
    while (std::getline(row, cell, ',')) {
      try {
        coords.push_back(std::stod(cell));
      } catch (const std::exception&) {
        fail(ErrorCode::Io, "malformed coordinate '" + cell + "'");
      }
      ++count;
    }
    if (count != dim) fail(ErrorCode::Io, "row has " + std::to_string(count) + " coordinates, expected " + std::to_string(dim));
  }
  return PointSet(dim, std::move(coords), min_dist, std::move(label));
}

PointSet lattice(int dim, double spacing, double radius) {
  require(dim >= 1, "lattice dimension must be >= 1");
  require(spacing > 0.0 && std::isfinite(spacing), "lattice spacing must be positive");
  require(radius >= 0.0 && std::isfinite(radius), "lattice radius must be non-negative");
  const long m = static_cast<long>(std::floor(radius / spacing * (1.0 + 1e-12)));
  // Ball membership tolerates rounding in spacing^2 * |v|^2.
  const double r2 = radius * radius * (1.0 + 1e-12);
  std::vector<long> v(static_cast<std::size_t>(dim), -m);
  std::vector<double> coords;
  while (true) {
    double n2 = 0.0;
    for (long c : v) n2 += static_cast<double>(c) * static_cast<double>(c);
    if (spacing * spacing * n2 <= r2) {
      for (long c : v) coords.push_back(spacing * static_cast<double>(c));
    }
    int k = dim - 1;
    while (k >= 0 && v[static_cast<std::size_t>(k)] == m) {
      v[static_cast<std::size_t>(k)] = -m;
      --k;
    }
    if (k < 0) break;
    ++v[static_cast<std::size_t>(k)];
  }
  std::ostringstream label;
  label << "lattice(dim=" << dim << ",spacing=" << format_g17(spacing) << ",radius=" << format_g17(radius) << ")";
  const double min_dist = certified_min_dist(coords, dim, spacing);
  return PointSet(dim, std::move(coords), min_dist, label.str());
}

PointSet fibonacci_chain(int n_points, double short_len) {
  require(n_points >= 2, "fibonacci_chain needs n_points >= 2");
  require(short_len > 0.0 && std::isfinite(short_len), "short_len must be positive");
  std::string word = "L";
  while (word.size() < static_cast<std::size_t>(n_points)) {
    std::string next;
    next.reserve(word.size() * 2);
    for (char c : word) next += (c == 'L') ? "LS" : "L";
    word = std::move(next);
  }
  const double long_len = std::numbers::phi * short_len;
  std::vector<double> coords;
  coords.reserve(static_cast<std::size_t>(n_points));
  double x = 0.0;
  for (int i = 0; i < n_points; ++i) {
    coords.push_back(x);
    x += (word[static_cast<std::size_t>(i)] == 'L') ? long_len : short_len;
  }
  const double min_dist = certified_min_dist(coords, 1, short_len);
  return PointSet(1, std::move(coords), min_dist,
                  "fibonacci_chain(n=" + std::to_string(n_points) + ",short_len=" + format_g17(short_len) + ")");
}

PointSet hardcore_random(int dim, double min_dist, double radius, std::uint64_t seed) {
  require(dim >= 1, "hardcore_random dimension must be >= 1");
  require(min_dist > 0.0 && std::isfinite(min_dist), "min_dist must be positive");
  require(radius >= 0.0 && std::isfinite(radius), "radius must be non-negative");
  SplitMix64 rng(seed);
  std::vector<double> coords;
  std::vector<double> cand(static_cast<std::size_t>(dim));
  int rejections = 0;
  while (rejections < kRsaRejectionBudget) {
    // Uniform in the ball by rejection from the enclosing cube.
    double n2;
    do {
      n2 = 0.0;
      for (auto& c : cand) {
        c = radius * (2.0 * rng.uniform() - 1.0);
        n2 += c * c;
      }
    } while (n2 > radius * radius);
    bool ok = true;
    const std::size_t n = coords.size() / static_cast<std::size_t>(dim);
    for (std::size_t i = 0; i < n && ok; ++i) {
      std::span<const double> p(coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim));
      ok = distance(p, cand) >= min_dist;
    }
    if (ok) {
      coords.insert(coords.end(), cand.begin(), cand.end());
      rejections = 0;
    } else {
      ++rejections;
    }
  }
  if (coords.empty()) fail(ErrorCode::InvalidArgument, "hardcore_random accepted no points");
  std::ostringstream label;
  label << "hardcore_random(dim=" << dim << ",min_dist=" << format_g17(min_dist) << ",radius=" << format_g17(radius)
        << ",seed=" << seed << ")";
  return PointSet(dim, std::move(coords), min_dist, label.str());
}

MinDistance verify_min_distance(const PointSet& ps) {
  const std::size_t n = ps.size();
  if (n < 2) return {std::numeric_limits<double>::infinity(), true};
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) best = std::min(best, distance(ps.point(i), ps.point(j)));
  }
  return {best, false};
}

}  // namespace rdiff
