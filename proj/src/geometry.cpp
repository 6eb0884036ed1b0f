#include "tubecantor/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>

#include "tubecantor/errors.hpp"

namespace tubecantor {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double distance_squared(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return acc;
}

double distance(std::span<const double> a, std::span<const double> b) { return std::sqrt(distance_squared(a, b)); }

double Cube::diameter() const { return side * std::sqrt(static_cast<double>(dim())); }

double Cube::volume() const { return std::pow(side, dim()); }

bool Cube::contains(std::span<const double> p, double tol) const {
  for (int i = 0; i < dim(); ++i) {
    if (p[i] < lower(i) - tol || p[i] > upper(i) + tol) return false;
  }
  return true;
}

bool Cube::contains(const Cube& other, double tol) const {
  for (int i = 0; i < dim(); ++i) {
    if (other.lower(i) < lower(i) - tol || other.upper(i) > upper(i) + tol) return false;
  }
  return true;
}

bool Cube::interiors_overlap(const Cube& other) const {
  for (int i = 0; i < dim(); ++i) {
    if (std::abs(center[i] - other.center[i]) >= 0.5 * (side + other.side) - kGeomTol) return false;
  }
  return true;
}

bool Cube::intersects(const Cube& other, double tol) const {
  for (int i = 0; i < dim(); ++i) {
    if (std::abs(center[i] - other.center[i]) > 0.5 * (side + other.side) + tol) return false;
  }
  return true;
}

Cube unit_cube(int dim) { return Cube{Point(static_cast<std::size_t>(dim), 0.5), 1.0}; }

void require_valid(const Tube& t) {
  if (t.direction.size() != t.anchor.size() || t.anchor.size() < 2) {
    throw ContractViolation("tube anchor and direction must share a dimension >= 2");
  }
  if (std::abs(norm(t.direction) - 1.0) > 1e-12) {
    throw ContractViolation("tube direction must be a unit vector");
  }
  if (!(t.width > 0.0)) throw ContractViolation("tube width must be positive");
}

Tube tube_through(std::span<const double> a, std::span<const double> b, double width) {
  Point dir(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) dir[i] = b[i] - a[i];
  const double len = norm(dir);
  if (!(len > 0.0)) throw DomainError("tube_through needs two distinct points");
  for (double& x : dir) x /= len;
  return Tube{Point(a.begin(), a.end()), std::move(dir), width};
}

double distance_point_to_line(std::span<const double> p, const Tube& t) {
  require_valid(t);
  const std::size_t d = t.anchor.size();
  double along = 0.0;
  for (std::size_t i = 0; i < d; ++i) along += (p[i] - t.anchor[i]) * t.direction[i];
  double acc = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double r = p[i] - t.anchor[i] - along * t.direction[i];
    acc += r * r;
  }
  return std::sqrt(acc);
}

bool point_in_tube(std::span<const double> p, const Tube& t) {
  return distance_point_to_line(p, t) <= 0.5 * t.width + kGeomTol;
}

Tube scale_tube(const Tube& t, double h) {
  if (!(h > 0.0)) throw DomainError("tube scale factor must be positive");
  return Tube{t.anchor, t.direction, t.width * h};
}

namespace {

// Squared distance from a + t·u to the cube.
double box_gap_squared(const Tube& t, const Cube& c, double param) {
  const double h = 0.5 * c.side;
  double acc = 0.0;
  for (std::size_t i = 0; i < t.anchor.size(); ++i) {
    const double excess = std::abs(t.anchor[i] + param * t.direction[i] - c.center[i]) - h;
    if (excess > 0.0) acc += excess * excess;
  }
  return acc;
}

}  // namespace

double line_cube_distance(const Tube& t, const Cube& c) {
  require_valid(t);
  const std::size_t d = t.anchor.size();
  const double h = 0.5 * c.side;

  // The squared gap is a convex piecewise quadratic in the line parameter; its kinks are where
  // a coordinate crosses a face. Minimise each piece in closed form and keep the best.
  std::vector<double> kinks;
  kinks.reserve(2 * d);
  for (std::size_t i = 0; i < d; ++i) {
    if (t.direction[i] == 0.0) continue;
    kinks.push_back((c.center[i] - h - t.anchor[i]) / t.direction[i]);
    kinks.push_back((c.center[i] + h - t.anchor[i]) / t.direction[i]);
  }
  std::sort(kinks.begin(), kinks.end());

  double best = std::numeric_limits<double>::infinity();
  auto consider = [&](double param) { best = std::min(best, box_gap_squared(t, c, param)); };
  for (double k : kinks) consider(k);

  const std::size_t pieces = kinks.size() + 1;
  for (std::size_t piece = 0; piece < pieces; ++piece) {
    const double lo = piece == 0 ? -std::numeric_limits<double>::infinity() : kinks[piece - 1];
    const double hi = piece == kinks.size() ? std::numeric_limits<double>::infinity() : kinks[piece];
    double probe;
    if (std::isinf(lo) && std::isinf(hi)) {
      probe = 0.0;
    } else if (std::isinf(lo)) {
      probe = hi - 1.0;
    } else if (std::isinf(hi)) {
      probe = lo + 1.0;
    } else {
      probe = 0.5 * (lo + hi);
    }
    double uu = 0.0;
    double ue = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double rel = t.anchor[i] + probe * t.direction[i] - c.center[i];
      if (rel > h) {
        uu += t.direction[i] * t.direction[i];
        ue += t.direction[i] * (t.anchor[i] - c.center[i] - h);
      } else if (rel < -h) {
        uu += t.direction[i] * t.direction[i];
        ue += t.direction[i] * (t.anchor[i] - c.center[i] + h);
      }
    }
    if (uu > 0.0) {
      consider(std::clamp(-ue / uu, lo, hi));
    } else if (!std::isinf(probe)) {
      consider(probe);
    }
  }
  return std::sqrt(std::max(0.0, best));
}

bool tube_cube_intersects(const Tube& t, const Cube& c) {
  return line_cube_distance(t, c) <= 0.5 * t.width + kGeomTol;
}

std::size_t count_cubes_met(const Tube& t, std::span<const Cube> cubes) {
  std::size_t n = 0;
  for (const Cube& c : cubes) n += tube_cube_intersects(t, c) ? 1 : 0;
  return n;
}

std::vector<Cube> subdivide_cube(const Cube& r, int g) {
  if (g < 1) throw DomainError("subdivision count must be at least 1");
  const int d = r.dim();
  const double cell = r.side / g;
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(g);
  std::vector<Cube> out;
  out.reserve(total);
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  for (std::size_t n = 0; n < total; ++n) {
    Point c(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) c[i] = r.lower(i) + (idx[i] + 0.5) * cell;
    out.push_back(Cube{std::move(c), cell});
    for (int i = d - 1; i >= 0; --i) {
      if (++idx[i] < g) break;
      idx[i] = 0;
    }
  }
  return out;
}

std::vector<Tube> candidate_worst_tubes(std::span<const Point> centers, double w) {
  std::vector<Tube> out;
  if (centers.size() < 2) return out;
  const std::size_t d = centers.front().size();

  struct Key {
    std::vector<double> values;  // canonical direction then foot of the perpendicular from 0
    std::size_t order;
  };
  std::vector<Key> keys;
  std::vector<Tube> raw;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    for (std::size_t j = i + 1; j < centers.size(); ++j) {
      if (distance_squared(centers[i], centers[j]) == 0.0) continue;
      Tube t = tube_through(centers[i], centers[j], w);
      for (std::size_t a = 0; a < d; ++a) {
        if (std::abs(t.direction[a]) > 1e-12) {
          if (t.direction[a] < 0.0) {
            for (double& x : t.direction) x = -x;
          }
          break;
        }
      }
      const double along = dot(t.anchor, t.direction);
      Key key{std::vector<double>(2 * d), raw.size()};
      for (std::size_t a = 0; a < d; ++a) {
        key.values[a] = t.direction[a];
        key.values[d + a] = t.anchor[a] - along * t.direction[a];
      }
      keys.push_back(std::move(key));
      raw.push_back(std::move(t));
    }
  }

  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    return std::tie(a.values, a.order) < std::tie(b.values, b.order);
  });
  std::vector<bool> keep(raw.size(), false);
  std::vector<const Key*> kept;
  for (const Key& k : keys) {
    bool dup = false;
    for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
      const Key& other = **it;
      if (k.values[0] - other.values[0] > 1e-9) break;
      bool same = true;
      for (std::size_t a = 0; a < k.values.size() && same; ++a) {
        same = std::abs(k.values[a] - other.values[a]) <= 1e-9;
      }
      if (same) {
        dup = true;
        break;
      }
    }
    if (!dup) {
      kept.push_back(&k);
      keep[k.order] = true;
    }
  }
  for (std::size_t n = 0; n < raw.size(); ++n) {
    if (keep[n]) out.push_back(std::move(raw[n]));
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Representative tubes

RepresentativeFamily::RepresentativeFamily(double tau, int dim, double slack) : tau_(tau), dim_(dim), slack_(slack) {
  if (!(tau > 0.0)) throw DomainError("representative width parameter must be positive");
  if (!(slack > 0.0) || slack > 1.0) throw DomainError("representative slack must lie in (0, 1]");
  if (dim < 2) throw DomainError("dimension must be at least 2");

  const double rd = std::sqrt(static_cast<double>(dim));
  const double rd1 = std::sqrt(static_cast<double>(dim - 1));

  const double sin_budget = 0.4 * slack * tau / rd;
  const auto per_face = static_cast<std::int64_t>(std::ceil(2.0 / (2.0 * sin_budget / rd1)));
  face_step_ = 2.0 / static_cast<double>(per_face);
  max_angle_ = std::asin(std::min(1.0, 0.5 * face_step_ * rd1));

  offset_step_ = 0.6 * slack * tau / rd1;
  const double reach = 0.5 * rd + 0.5 * tau;
  offset_radius_ = reach + 0.5 * offset_step_ * rd1;
  lattice_extent_ = static_cast<std::int64_t>(std::ceil(reach / offset_step_)) + 1;

  build_directions();

  const int m = dim - 1;
  if (dim == 2) {
    // One axis: the lattice ball is an interval and needs no tables.
    line_extent_ = std::min<std::int64_t>(lattice_extent_,
                                          static_cast<std::int64_t>(std::floor(offset_radius_ / offset_step_ + 1e-12)));
    return;
  }
  const std::int64_t span = 2 * lattice_extent_ + 1;
  std::size_t cells = 1;
  for (int i = 0; i < m; ++i) cells *= static_cast<std::size_t>(span);
  position_.assign(cells, -1);
  std::vector<std::int64_t> idx(static_cast<std::size_t>(m), -lattice_extent_);
  std::int64_t count = 0;
  for (std::size_t n = 0; n < cells; ++n) {
    double r2 = 0.0;
    for (std::int64_t v : idx) r2 += static_cast<double>(v * v);
    if (std::sqrt(r2) * offset_step_ <= offset_radius_) {
      offsets_.insert(offsets_.end(), idx.begin(), idx.end());
      position_[n] = count++;
    }
    for (int i = m - 1; i >= 0; --i) {
      if (++idx[i] <= lattice_extent_) break;
      idx[i] = -lattice_extent_;
    }
  }
}

void RepresentativeFamily::build_directions() {
  const int m = dim_ - 1;
  per_face_ = static_cast<std::int64_t>(std::llround(2.0 / face_step_));
  face_points_ = 1;
  for (int i = 0; i < m; ++i) face_points_ *= static_cast<std::size_t>(per_face_);
  dir_count_ = face_points_ * static_cast<std::size_t>(dim_);
}

double RepresentativeFamily::size_constant() const {
  return static_cast<double>(size()) * std::pow(tau_, 2.0 * (dim_ - 1));
}

std::size_t RepresentativeFamily::offsets_per_direction() const {
  return dim_ == 2 ? static_cast<std::size_t>(2 * line_extent_ + 1) : offsets_.size() / (dim_ - 1);
}

Point RepresentativeFamily::direction(std::size_t dir) const {
  const int d = dim_;
  const int face = static_cast<int>(dir / face_points_);
  std::size_t local = dir % face_points_;
  Point u(static_cast<std::size_t>(d));
  // Local index digits, most significant first, fill the non-face axes in order.
  std::vector<std::int64_t> digits(static_cast<std::size_t>(d - 1));
  for (int i = d - 2; i >= 0; --i) {
    digits[i] = static_cast<std::int64_t>(local % static_cast<std::size_t>(per_face_));
    local /= static_cast<std::size_t>(per_face_);
  }
  int k = 0;
  for (int a = 0; a < d; ++a) {
    u[a] = a == face ? 1.0 : -1.0 + (static_cast<double>(digits[k++]) + 0.5) * face_step_;
  }
  const double len = norm(u);
  for (double& x : u) x /= len;
  return u;
}

std::vector<double> RepresentativeFamily::basis(std::size_t dir) const {
  const int d = dim_;
  const int face = static_cast<int>(dir / face_points_);
  // Householder reflection mapping u to ∓e_face; its other columns span u^⊥.
  Point v = direction(dir);
  v[face] += 1.0;
  const double vv = dot(v, v);
  std::vector<double> b;
  b.reserve(static_cast<std::size_t>((d - 1) * d));
  for (int col = 0; col < d; ++col) {
    if (col == face) continue;
    for (int row = 0; row < d; ++row) b.push_back((row == col ? 1.0 : 0.0) - 2.0 * v[row] * v[col] / vv);
  }
  return b;
}

double RepresentativeFamily::angle(std::size_t dir) const {
  const Point u = direction(dir);
  double a = std::atan2(u[1], u[0]);
  if (a < 0.0) a += M_PI;
  if (a >= M_PI) a -= M_PI;
  return a;
}

std::size_t RepresentativeFamily::offset_position(std::span<const std::int64_t> lattice) const {
  if (dim_ == 2) {
    const std::int64_t v = lattice[0];
    if (v < -line_extent_ || v > line_extent_) return static_cast<std::size_t>(-1);
    return static_cast<std::size_t>(v + line_extent_);
  }
  const std::int64_t span = 2 * lattice_extent_ + 1;
  std::size_t flat = 0;
  for (std::int64_t v : lattice) {
    if (v < -lattice_extent_ || v > lattice_extent_) return static_cast<std::size_t>(-1);
    flat = flat * static_cast<std::size_t>(span) + static_cast<std::size_t>(v + lattice_extent_);
  }
  const std::int64_t pos = position_[flat];
  return pos < 0 ? static_cast<std::size_t>(-1) : static_cast<std::size_t>(pos);
}

Tube RepresentativeFamily::tube(std::size_t index) const {
  const int d = dim_;
  const int m = d - 1;
  const std::size_t per = offsets_per_direction();
  const std::size_t dir = index / per;
  const std::size_t off = index % per;
  const auto b = basis(dir);
  Point anchor(static_cast<std::size_t>(d), 0.5);
  for (int k = 0; k < m; ++k) {
    const std::int64_t v = d == 2 ? static_cast<std::int64_t>(off) - line_extent_ : offsets_[off * m + k];
    const double o = static_cast<double>(v) * offset_step_;
    for (int a = 0; a < d; ++a) anchor[a] += o * b[k * d + a];
  }
  return Tube{std::move(anchor), direction(dir), width()};
}

std::vector<Tube> RepresentativeFamily::tubes() const {
  std::vector<Tube> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(tube(i));
  return out;
}

std::optional<std::size_t> RepresentativeFamily::covering_index(const Tube& t) const {
  require_valid(t);
  if (t.dim() != dim_ || t.width > tau_ + kGeomTol) return std::nullopt;
  const int d = dim_;
  const int m = d - 1;

  Point u = t.direction;
  int face = 0;
  for (int a = 1; a < d; ++a) {
    if (std::abs(u[a]) > std::abs(u[face])) face = a;
  }
  if (u[face] < 0.0) {
    for (double& x : u) x = -x;
  }
  const std::int64_t per_face = per_face_;
  std::size_t local = 0;
  for (int a = 0; a < d; ++a) {
    if (a == face) continue;
    const double p = u[a] / u[face];
    auto j = static_cast<std::int64_t>(std::floor((p + 1.0) / face_step_));
    j = std::clamp<std::int64_t>(j, 0, per_face - 1);
    local = local * static_cast<std::size_t>(per_face) + static_cast<std::size_t>(j);
  }
  const std::size_t dir = static_cast<std::size_t>(face) * face_points_ + local;

  // Foot of the perpendicular from the cube centre onto the tube's line.
  Point foot(static_cast<std::size_t>(d));
  double along = 0.0;
  for (int a = 0; a < d; ++a) along += (0.5 - t.anchor[a]) * u[a];
  for (int a = 0; a < d; ++a) foot[a] = t.anchor[a] + along * u[a] - 0.5;
  if (norm(foot) > 0.5 * std::sqrt(static_cast<double>(d)) + 0.5 * t.width + kGeomTol) return std::nullopt;

  const auto b = basis(dir);
  std::vector<std::int64_t> lattice(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    double o = 0.0;
    for (int a = 0; a < d; ++a) o += b[k * d + a] * foot[a];
    lattice[k] = static_cast<std::int64_t>(std::llround(o / offset_step_));
  }
  const std::size_t pos = offset_position(lattice);
  if (pos == static_cast<std::size_t>(-1)) return std::nullopt;
  return dir * offsets_per_direction() + pos;
}

std::vector<RepresentativeFamily::Occupied> RepresentativeFamily::occupied_along(std::size_t dir,
                                                                               std::span<const Point> points,
                                                                               std::size_t min_count,
                                                                               double radius) const {
  const int d = dim_;
  const int m = d - 1;
  const auto b = basis(dir);
  const auto reach = static_cast<std::int64_t>(std::ceil(radius / offset_step_)) + 1;

  std::vector<std::pair<std::size_t, std::size_t>> hits;  // (offset position, point)
  std::vector<double> y(static_cast<std::size_t>(m));
  std::vector<std::int64_t> base(static_cast<std::size_t>(m));
  std::vector<std::int64_t> idx(static_cast<std::size_t>(m));
  const double r2 = (radius + kGeomTol) * (radius + kGeomTol);
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (int k = 0; k < m; ++k) {
      double acc = 0.0;
      for (int a = 0; a < d; ++a) acc += b[k * d + a] * (points[p][a] - 0.5);
      y[k] = acc;
      base[k] = static_cast<std::int64_t>(std::llround(acc / offset_step_));
    }
    std::fill(idx.begin(), idx.end(), -reach);
    while (true) {
      double dist2 = 0.0;
      for (int k = 0; k < m; ++k) {
        const double diff = y[k] - static_cast<double>(base[k] + idx[k]) * offset_step_;
        dist2 += diff * diff;
      }
      if (dist2 <= r2) {
        std::vector<std::int64_t> lattice(static_cast<std::size_t>(m));
        for (int k = 0; k < m; ++k) lattice[k] = base[k] + idx[k];
        const std::size_t pos = offset_position(lattice);
        if (pos != static_cast<std::size_t>(-1)) hits.emplace_back(pos, p);
      }
      int k = m - 1;
      for (; k >= 0; --k) {
        if (++idx[k] <= reach) break;
        idx[k] = -reach;
      }
      if (k < 0) break;
    }
  }
  std::sort(hits.begin(), hits.end());

  std::vector<Occupied> out;
  const std::size_t per = offsets_per_direction();
  for (std::size_t i = 0; i < hits.size();) {
    std::size_t j = i;
    while (j < hits.size() && hits[j].first == hits[i].first) ++j;
    if (j - i >= min_count) {
      Occupied occ{dir * per + hits[i].first, {}};
      occ.members.reserve(j - i);
      for (std::size_t n = i; n < j; ++n) occ.members.push_back(hits[n].second);
      out.push_back(std::move(occ));
    }
    i = j;
  }
  return out;
}

std::vector<std::size_t> RepresentativeFamily::dense_directions(std::span<const Point> points, std::size_t min_count,
                                                                double radius) const {
  std::vector<std::size_t> all;
  if (points.size() < std::max<std::size_t>(min_count, 1)) return all;
  if (dim_ != 2 || min_count <= 1) {
    all.resize(dir_count_);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  const std::size_t need = min_count - 1;
  const double gap = 2.0 * radius + 2.0 * kGeomTol;

  std::vector<std::pair<double, double>> dense;
  std::vector<std::pair<double, int>> events;
  for (std::size_t i = 0; i < points.size(); ++i) {
    events.clear();
    std::size_t always = 0;
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (j == i) continue;
      const double dx = points[j][0] - points[i][0];
      const double dy = points[j][1] - points[i][1];
      const double len = std::hypot(dx, dy);
      if (len <= gap) {
        ++always;
        continue;
      }
      // |sin(θ − φ)|·len ≤ gap, θ taken modulo π
      const double half = std::asin(gap / len) * (1.0 + 1e-9) + 1e-12;
      double phi = std::atan2(dy, dx);
      if (phi < 0.0) phi += M_PI;
      if (phi >= M_PI) phi -= M_PI;
      double lo = phi - half;
      double hi = phi + half;
      if (lo < 0.0) {
        events.emplace_back(lo + M_PI, +1);
        events.emplace_back(M_PI, -1);
        events.emplace_back(0.0, +1);
        events.emplace_back(hi, -1);
      } else if (hi >= M_PI) {
        events.emplace_back(lo, +1);
        events.emplace_back(M_PI, -1);
        events.emplace_back(0.0, +1);
        events.emplace_back(hi - M_PI, -1);
      } else {
        events.emplace_back(lo, +1);
        events.emplace_back(hi, -1);
      }
    }
    if (always >= need) {
      all.resize(dir_count_);
      std::iota(all.begin(), all.end(), std::size_t{0});
      return all;
    }
    // closed intervals: openings sort before closings at equal angles
    std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
      return a.first < b.first || (a.first == b.first && a.second > b.second);
    });
    std::size_t active = always;
    double start = 0.0;
    bool in = false;
    for (const auto& [angle, delta] : events) {
      if (delta > 0) {
        ++active;
        if (!in && active >= need) {
          in = true;
          start = angle;
        }
      } else {
        if (in && active == need) {
          dense.emplace_back(start, angle);
          in = false;
        }
        --active;
      }
    }
  }
  if (dense.empty()) return all;
  std::sort(dense.begin(), dense.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& r : dense) {
    if (!merged.empty() && r.first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, r.second);
    } else {
      merged.push_back(r);
    }
  }
  auto hit = [&](double a) {
    auto it = std::upper_bound(merged.begin(), merged.end(), a,
                               [](double v, const std::pair<double, double>& r) { return v < r.first; });
    if (it != merged.begin() && a <= std::prev(it)->second + 1e-12) return true;
    // angles near π are the same directions as angles near 0
    return a > M_PI - 1e-9 && merged.front().first <= 1e-9;
  };
  // Face 0 holds u ∝ (1, t), angle atan t mod π; face 1 holds u ∝ (t, 1), angle π/2 − atan t.
  // Each angle interval maps to a range of t, hence of grid indices; candidates are then
  // confirmed against the exact angle.
  const auto index_of = [&](double t) { return static_cast<std::int64_t>(std::floor((t + 1.0) / face_step_ - 0.5)); };
  std::vector<std::size_t> out;
  auto scan = [&](std::size_t face, double t_lo, double t_hi) {
    const std::int64_t j0 = std::max<std::int64_t>(0, index_of(t_lo) - 1);
    const std::int64_t j1 = std::min<std::int64_t>(per_face_ - 1, index_of(t_hi) + 2);
    for (std::int64_t j = j0; j <= j1; ++j) {
      const std::size_t dir = face * face_points_ + static_cast<std::size_t>(j);
      if (hit(angle(dir))) out.push_back(dir);
    }
  };
  const double q = 0.25 * M_PI;
  for (const auto& [lo, hi] : merged) {
    if (lo <= q) scan(0, std::tan(std::max(lo, 0.0)), std::tan(std::min(hi, q)));
    if (hi >= 3.0 * q) scan(0, std::tan(std::max(lo, 3.0 * q) - M_PI), std::tan(std::min(hi, M_PI) - M_PI));
    if (hi >= q && lo <= 3.0 * q) {
      scan(1, 1.0 / std::tan(std::min(hi, 3.0 * q)), 1.0 / std::tan(std::max(lo, q)));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<RepresentativeFamily::Occupied> RepresentativeFamily::occupied(std::span<const Point> points,
                                                                          std::size_t min_count,
                                                                          double radius) const {
  std::vector<Occupied> out;
  if (points.size() < std::max<std::size_t>(min_count, 1)) return out;
  for (std::size_t dir : dense_directions(points, min_count, radius)) {
    auto found = occupied_along(dir, points, min_count, radius);
    for (auto& occ : found) out.push_back(std::move(occ));
  }
  return out;
}

RepresentativeFamily representative_tubes(double tau, int dim) {
  if (!(tau > 0.0) || tau > 1.0) throw DomainError("representative width parameter must lie in (0, 1]");
  return RepresentativeFamily(tau, dim);
}

std::size_t cells_within_reach(int dim, double cell, double reach) {
  const auto extent = static_cast<std::int64_t>(std::ceil(reach / cell)) + 1;
  std::vector<std::int64_t> idx(static_cast<std::size_t>(dim), -extent);
  std::size_t count = 0;
  while (true) {
    double gap2 = 0.0;
    for (std::int64_t v : idx) {
      const double g = std::max<double>(0.0, static_cast<double>(std::llabs(v) - 1)) * cell;
      gap2 += g * g;
    }
    if (std::sqrt(gap2) <= reach) ++count;
    int k = dim - 1;
    for (; k >= 0; --k) {
      if (++idx[k] <= extent) break;
      idx[k] = -extent;
    }
    if (k < 0) break;
  }
  return count;
}

}  // namespace tubecantor
