#include "apsk/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

namespace apsk {

namespace {

double wrap_2pi(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0) y += kTwoPi;
  if (y >= kTwoPi) y = 0.0;
  return y;
}

// Ring index for each base gene: counts[i]/fold genes per ring, inner first.
std::vector<int> base_ring_of_gene(const RingLayout& layout, int f) {
  std::vector<int> ring;
  for (int r = 0; r < layout.n_rings(); ++r) {
    int block = layout.counts[r] / f;
    for (int k = 0; k < block; ++k) ring.push_back(r);
  }
  return ring;
}

}  // namespace

int RingLayout::order() const {
  return std::accumulate(counts.begin(), counts.end(), 0);
}

void check_layout(const RingLayout& layout) {
  if (layout.counts.empty()) throw std::invalid_argument("layout has no rings");
  for (int c : layout.counts) {
    if (c <= 0) throw std::invalid_argument("layout ring count must be positive");
  }
  int m = layout.order();
  if ((m & (m - 1)) != 0)
    throw std::invalid_argument("layout order " + std::to_string(m) +
                                " is not a power of two");
}

std::string to_string(const RingLayout& layout) {
  std::string s;
  for (std::size_t i = 0; i < layout.counts.size(); ++i) {
    if (i) s += '+';
    s += std::to_string(layout.counts[i]);
  }
  return s;
}

RingLayout layout_from_string(const std::string& s) {
  if (s == "16apsk") return RingLayout::apsk16();
  if (s == "32apsk") return RingLayout::apsk32();
  RingLayout layout;
  std::string part;
  std::istringstream in(s);
  while (std::getline(in, part, '+')) {
    try {
      std::size_t used = 0;
      int v = std::stoi(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
      layout.counts.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad layout '" + s + "'");
    }
  }
  check_layout(layout);
  return layout;
}

int fold(SymmetryMode m) {
  switch (m) {
    case SymmetryMode::kDouble: return 4;
    case SymmetryMode::kSingle: return 2;
    case SymmetryMode::kNone: return 1;
  }
  throw std::logic_error("bad symmetry mode");
}

double phase_upper(SymmetryMode m) {
  switch (m) {
    case SymmetryMode::kDouble: return kPi / 2.0;
    case SymmetryMode::kSingle: return kPi;
    case SymmetryMode::kNone: return kTwoPi;
  }
  throw std::logic_error("bad symmetry mode");
}

const char* to_string(SymmetryMode m) {
  switch (m) {
    case SymmetryMode::kDouble: return "double";
    case SymmetryMode::kSingle: return "single";
    case SymmetryMode::kNone: return "none";
  }
  throw std::logic_error("bad symmetry mode");
}

SymmetryMode symmetry_from_string(const std::string& s) {
  if (s == "double") return SymmetryMode::kDouble;
  if (s == "single") return SymmetryMode::kSingle;
  if (s == "none") return SymmetryMode::kNone;
  throw std::invalid_argument("bad symmetry '" + s + "' (double|single|none)");
}

std::vector<double> GeneVector::flat() const {
  std::vector<double> out = radii;
  out.insert(out.end(), phases.begin(), phases.end());
  return out;
}

GeneVector GeneVector::from_flat(const RingLayout& layout, SymmetryMode symmetry,
                                 const std::vector<double>& flat) {
  const std::size_t n_radii = static_cast<std::size_t>(layout.n_rings() - 1);
  const std::size_t n_phases =
      static_cast<std::size_t>(layout.order() / fold(symmetry));
  if (flat.size() != n_radii + n_phases)
    throw std::invalid_argument("gene vector length " + std::to_string(flat.size()) +
                                ", expected " + std::to_string(n_radii + n_phases));
  GeneVector g;
  g.layout = layout;
  g.symmetry = symmetry;
  g.radii.assign(flat.begin(), flat.begin() + n_radii);
  std::sort(g.radii.begin(), g.radii.end());
  g.phases.assign(flat.begin() + n_radii, flat.end());
  return g;
}

std::vector<GeneBound> gene_bounds(const RingLayout& layout, SymmetryMode symmetry) {
  check_layout(layout);
  const int f = fold(symmetry);
  for (int c : layout.counts) {
    if (c % f != 0)
      throw std::invalid_argument("ring count " + std::to_string(c) +
                                  " not divisible by symmetry fold " +
                                  std::to_string(f));
  }
  std::vector<GeneBound> bounds;
  for (int r = 0; r < layout.n_rings() - 1; ++r)
    bounds.push_back({kRadiusEps, 1.0 - kRadiusEps});
  const double hi = phase_upper(symmetry);
  for (int k = 0; k < layout.order() / f; ++k) bounds.push_back({0.0, hi});
  return bounds;
}

Constellation expand(const GeneVector& genes) {
  check_layout(genes.layout);
  const int f = fold(genes.symmetry);
  const int m = genes.layout.order();
  for (int c : genes.layout.counts) {
    if (c % f != 0)
      throw std::invalid_argument("ring count " + std::to_string(c) +
                                  " not divisible by symmetry fold " +
                                  std::to_string(f));
  }
  const int n_base = m / f;
  const int n_free_radii = genes.layout.n_rings() - 1;
  if (static_cast<int>(genes.radii.size()) != n_free_radii)
    throw std::invalid_argument("expected " + std::to_string(n_free_radii) +
                                " radius genes, got " +
                                std::to_string(genes.radii.size()));
  if (static_cast<int>(genes.phases.size()) != n_base)
    throw std::invalid_argument("expected " + std::to_string(n_base) +
                                " phase genes, got " +
                                std::to_string(genes.phases.size()));

  for (int i = 0; i < n_free_radii; ++i) {
    const double r = genes.radii[i];
    if (!(r > 0.0 && r < 1.0))
      throw std::invalid_argument("radius gene " + std::to_string(i) +
                                  " out of (0,1)");
  }
  const double hi = phase_upper(genes.symmetry);
  for (int i = 0; i < n_base; ++i) {
    const double th = genes.phases[i];
    const bool ok = genes.symmetry == SymmetryMode::kNone ? (th >= 0.0 && th < hi)
                                                          : (th >= 0.0 && th <= hi);
    if (!ok)
      throw std::invalid_argument("phase gene " + std::to_string(i) +
                                  " outside symmetry bounds");
  }

  std::vector<double> ring_radius(genes.radii);
  std::sort(ring_radius.begin(), ring_radius.end());  // ordering repair
  ring_radius.push_back(1.0);

  const std::vector<int> gene_ring = base_ring_of_gene(genes.layout, f);

  Constellation c;
  c.layout = genes.layout;
  c.symmetry = genes.symmetry;
  c.points.reserve(m);
  for (int g = 0; g < n_base; ++g) {
    const int ring = gene_ring[g];
    const double th = genes.phases[g];
    for (int q = 0; q < f; ++q) {
      double ph = th;
      if (genes.symmetry == SymmetryMode::kDouble) {
        if (q == 1) ph = kPi - th;
        else if (q == 2) ph = kPi + th;
        else if (q == 3) ph = kTwoPi - th;
      } else if (genes.symmetry == SymmetryMode::kSingle && q == 1) {
        ph = kTwoPi - th;
      }
      c.points.push_back({ring, ring_radius[ring], wrap_2pi(ph), g + q * n_base});
    }
  }
  return c;
}

std::vector<std::string> validate(const Constellation& c) {
  std::vector<std::string> out;
  RingLayout layout = c.layout;
  try {
    check_layout(layout);
  } catch (const std::exception& e) {
    out.emplace_back(e.what());
    return out;
  }
  const int m = layout.order();
  if (static_cast<int>(c.points.size()) != m) {
    out.push_back("point count " + std::to_string(c.points.size()) + " != M " +
                  std::to_string(m));
    return out;
  }

  std::vector<int> label_seen(m, 0);
  std::vector<int> ring_count(layout.n_rings(), 0);
  std::vector<double> ring_radius(layout.n_rings(),
                                  std::numeric_limits<double>::quiet_NaN());
  constexpr double kTol = 1e-9;

  for (const auto& p : c.points) {
    if (p.value < 0 || p.value >= m) {
      out.push_back("label " + std::to_string(p.value) + " out of range");
    } else if (++label_seen[p.value] == 2) {
      out.push_back("duplicate label " + std::to_string(p.value));
    }
    if (p.ring < 0 || p.ring >= layout.n_rings()) {
      out.push_back("ring index " + std::to_string(p.ring) + " out of range");
      continue;
    }
    ++ring_count[p.ring];
    if (std::isnan(ring_radius[p.ring])) {
      ring_radius[p.ring] = p.radius;
    } else if (std::abs(ring_radius[p.ring] - p.radius) > kTol) {
      out.push_back("ring " + std::to_string(p.ring) + " radius mismatch");
    }
    if (!(p.phase >= 0.0 && p.phase < kTwoPi)) {
      out.push_back("phase of label " + std::to_string(p.value) +
                    " outside [0, 2pi)");
    }
  }
  for (int v = 0; v < m; ++v) {
    if (label_seen[v] == 0) out.push_back("missing label " + std::to_string(v));
  }
  for (int r = 0; r < layout.n_rings(); ++r) {
    if (ring_count[r] != layout.counts[r]) {
      out.push_back("ring " + std::to_string(r) + " has " +
                    std::to_string(ring_count[r]) + " points, expected " +
                    std::to_string(layout.counts[r]));
    }
  }
  const int outer = layout.n_rings() - 1;
  if (!std::isnan(ring_radius[outer]) && std::abs(ring_radius[outer] - 1.0) > kTol) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "outer radius != 1 (got %.6g)",
                  ring_radius[outer]);
    out.emplace_back(buf);
  }
  return out;
}

Constellation reference_constellation(const RingLayout& layout,
                                      const std::vector<double>& r_inner) {
  check_layout(layout);
  if (static_cast<int>(r_inner.size()) != layout.n_rings() - 1)
    throw std::invalid_argument("expected " + std::to_string(layout.n_rings() - 1) +
                                " inner radii");
  double prev = 0.0;
  for (double r : r_inner) {
    if (!(r > prev && r < 1.0))
      throw std::invalid_argument("inner radii must be increasing within (0,1)");
    prev = r;
  }
  std::vector<double> ring_radius(r_inner);
  ring_radius.push_back(1.0);

  Constellation c;
  c.layout = layout;
  c.symmetry = SymmetryMode::kNone;
  int value = 0;
  for (int r = 0; r < layout.n_rings(); ++r) {
    const int n = layout.counts[r];
    for (int k = 0; k < n; ++k) {
      const double ph = kPi / n + kTwoPi * k / n;
      c.points.push_back({r, ring_radius[r], wrap_2pi(ph), value++});
    }
  }
  return c;
}

std::string to_record(const Constellation& c) {
  std::string out;
  out += "layout " + to_string(c.layout) + "\n";
  out += "symmetry " + std::string(to_string(c.symmetry)) + "\n";
  out += "points " + std::to_string(c.points.size()) + "\n";
  char buf[160];
  for (const auto& p : c.points) {
    std::snprintf(buf, sizeof buf, "point ring=%d radius=%.12f phase=%.12f value=%d\n",
                  p.ring, p.radius, p.phase, p.value);
    out += buf;
  }
  return out;
}

namespace {

[[noreturn]] void parse_fail(int line, const std::string& msg) {
  throw ParseError("line " + std::to_string(line) + ": " + msg);
}

double parse_real(const std::string& s, int line, const std::string& field) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    parse_fail(line, "bad number '" + s + "' in field '" + field + "'");
  }
}

int parse_int(const std::string& s, int line, const std::string& field) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    parse_fail(line, "bad integer '" + s + "' in field '" + field + "'");
  }
}

}  // namespace

Constellation from_record(std::istream& in) {
  Constellation c;
  bool have_layout = false, have_symmetry = false;
  int declared_points = -1;
  int line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key) || key[0] == '#') continue;
    if (key == "layout") {
      std::string v;
      if (!(ls >> v)) parse_fail(line_no, "layout value missing");
      try {
        c.layout = layout_from_string(v);
      } catch (const std::exception& e) {
        parse_fail(line_no, e.what());
      }
      have_layout = true;
    } else if (key == "symmetry") {
      std::string v;
      if (!(ls >> v)) parse_fail(line_no, "symmetry value missing");
      try {
        c.symmetry = symmetry_from_string(v);
      } catch (const std::exception& e) {
        parse_fail(line_no, e.what());
      }
      have_symmetry = true;
    } else if (key == "points") {
      std::string v;
      if (!(ls >> v)) parse_fail(line_no, "points count missing");
      declared_points = parse_int(v, line_no, "points");
    } else if (key == "point") {
      std::map<std::string, std::string> kv;
      std::string tok;
      while (ls >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos)
          parse_fail(line_no, "expected key=value, got '" + tok + "'");
        kv[tok.substr(0, eq)] = tok.substr(eq + 1);
      }
      for (const char* field : {"ring", "radius", "phase", "value"}) {
        if (!kv.count(field))
          parse_fail(line_no, "point missing field '" + std::string(field) + "'");
      }
      ConstellationPoint p;
      p.ring = parse_int(kv["ring"], line_no, "ring");
      p.radius = parse_real(kv["radius"], line_no, "radius");
      p.phase = parse_real(kv["phase"], line_no, "phase");
      p.value = parse_int(kv["value"], line_no, "value");
      c.points.push_back(p);
    } else {
      parse_fail(line_no, "unknown key '" + key + "'");
    }
  }
  if (!have_layout) throw ParseError("document has no 'layout' line");
  if (!have_symmetry) throw ParseError("document has no 'symmetry' line");
  if (declared_points >= 0 &&
      declared_points != static_cast<int>(c.points.size())) {
    throw ParseError("declared points " + std::to_string(declared_points) +
                     " but found " + std::to_string(c.points.size()));
  }
  auto violations = validate(c);
  if (!violations.empty()) {
    std::string msg = "invalid constellation:";
    for (const auto& v : violations) msg += " " + v + ";";
    throw ParseError(msg);
  }
  return c;
}

Constellation from_record(const std::string& text) {
  std::istringstream in(text);
  return from_record(in);
}

}  // namespace apsk
