#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace apsk {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Margin on radius genes; keeps rings away from 0 and from the fixed outer
// radius 1.
inline constexpr double kRadiusEps = 1e-3;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Symbols per ring, inner to outer. Alphabet size M is the sum.
struct RingLayout {
  std::vector<int> counts;

  int n_rings() const { return static_cast<int>(counts.size()); }
  int order() const;  // M

  static RingLayout apsk16() { return {{4, 12}}; }
  static RingLayout apsk32() { return {{4, 12, 16}}; }

  bool operator==(const RingLayout&) const = default;
};

// Throws std::invalid_argument unless counts are positive and M is a power of
// two.
void check_layout(const RingLayout& layout);

std::string to_string(const RingLayout& layout);               // "4+12"
RingLayout layout_from_string(const std::string& s);           // "4+12", "16apsk", "32apsk"

enum class SymmetryMode { kDouble, kSingle, kNone };

// Number of constellation points generated per phase gene.
int fold(SymmetryMode m);
// Upper phase-gene bound: pi/2, pi, or 2*pi (exclusive for kNone).
double phase_upper(SymmetryMode m);

const char* to_string(SymmetryMode m);
SymmetryMode symmetry_from_string(const std::string& s);

struct GeneBound {
  double lo;
  double hi;
};

// Chromosome: free ring radii (outer ring fixed at 1) followed by one phase
// gene per point of the symmetry-reduced sector.
struct GeneVector {
  RingLayout layout;
  SymmetryMode symmetry = SymmetryMode::kNone;
  std::vector<double> radii;
  std::vector<double> phases;

  std::size_t size() const { return radii.size() + phases.size(); }
  std::vector<double> flat() const;  // radii then phases

  // Splits a flat vector back into radii/phases and sorts the radii ascending
  // (ordering repair; operators may emit crossed radii).
  static GeneVector from_flat(const RingLayout& layout, SymmetryMode symmetry,
                              const std::vector<double>& flat);
};

struct ConstellationPoint {
  int ring;
  double radius;
  double phase;  // [0, 2*pi)
  int value;     // alphabet label
};

struct Constellation {
  RingLayout layout;
  SymmetryMode symmetry = SymmetryMode::kNone;
  std::vector<ConstellationPoint> points;
};

// Per-gene (lower, upper) bounds: radii (eps, 1-eps), phases per symmetry mode.
std::vector<GeneBound> gene_bounds(const RingLayout& layout, SymmetryMode symmetry);

// Expands a chromosome into the full labeled constellation. Base genes fill
// the reduced sector with values 0..M/fold-1, ring membership by index blocks
// (counts[i]/fold genes per ring, inner first); mirror copies get value +
// q*M/fold. Throws std::invalid_argument naming the offending gene on bound or
// count violations; radii ordering is repaired, not rejected.
Constellation expand(const GeneVector& genes);

// All Constellation invariant violations (empty = ok): label coverage,
// per-ring counts, within-ring radius consistency, outer radius 1, phase
// range.
std::vector<std::string> validate(const Constellation& c);

// Uniformly spaced phases per ring with offset pi/counts[i]; labels sequential
// per ring in angular order. r_inner holds the n_rings-1 free radii.
Constellation reference_constellation(const RingLayout& layout,
                                      const std::vector<double>& r_inner);

// Text document: "layout"/"symmetry"/"points" header lines plus one
// "point ring=.. radius=.. phase=.. value=.." line per symbol. Radius and
// phase carry 12 decimal places so a round-trip is lossless to well under
// 1e-12. '#' lines and blank lines are ignored on input.
std::string to_record(const Constellation& c);
Constellation from_record(std::istream& in);
Constellation from_record(const std::string& text);

}  // namespace apsk
