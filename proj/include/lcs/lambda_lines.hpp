#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lcs/cauchy_green.hpp"
#include "lcs/errors.hpp"
#include "lcs/flowmap.hpp"
#include "lcs/topology.hpp"

namespace lcs {

enum class EtaSign { Plus, Minus };

std::string to_string(EtaSign s);

/// Which definition produced an extended eta value.
enum class EtaRegion { Natural, Xi1Extension, Xi2Extension };

/// The eta_lambda^{+-} line field of a Cauchy-Green field.
struct EtaFieldSpec {
  double lambda = 1.0;
  EtaSign sign = EtaSign::Plus;
  const SymmetricTensorField* tensor = nullptr;
  const EigenField* eigen = nullptr;  // optional: node degeneracy flags for halting
};

/// a xi1 +- b xi2 with a = sqrt((l2 - lambda^2)/(l2 - l1)), b = sqrt((lambda^2 - l1)/(l2 - l1)).
/// xi1 is taken as the clockwise quarter turn of xi2 whatever the sign it
/// is passed with, so the branch does not depend on eigenvector orientation.
/// Requires l1 < l2 and l1 <= lambda^2 <= l2; throws OutsideDomain otherwise.
template <typename Scalar>
Vector2<Scalar> eta_direction(Scalar lambda1, Scalar lambda2, const Vector2<Scalar>& xi1, const Vector2<Scalar>& xi2,
                              Scalar lambda, EtaSign sign) {
  using std::sqrt;
  const Scalar l2sq = lambda * lambda;
  if (!(lambda1 < lambda2) || l2sq < lambda1 || l2sq > lambda2)
    throw OutsideDomain("lambda^2 outside [lambda1, lambda2]");
  const Scalar gap = lambda2 - lambda1;
  const Scalar a = sqrt((lambda2 - l2sq) / gap);
  const Scalar b = sqrt((l2sq - lambda1) / gap);
  const Vector2<Scalar> turned(xi2.y(), -xi2.x());
  const Vector2<Scalar> x1 = xi1.dot(turned) < 0 ? Vector2<Scalar>(-xi1) : xi1;
  return sign == EtaSign::Plus ? Vector2<Scalar>(a * x1 + b * xi2) : Vector2<Scalar>(a * x1 - b * xi2);
}

/// eta continued by xi2 where lambda2 <= lambda^2 and by xi1 where lambda1 >= lambda^2.
/// Throws DegenerateTensor at flagged (isotropic) points.
template <typename Scalar>
Vector2<Scalar> extend_eta(const EigenDecomposition<Scalar>& e, Scalar lambda, EtaSign sign,
                           EtaRegion* region = nullptr) {
  if (e.degenerate) throw DegenerateTensor("eta is undefined at an isotropic point");
  const Scalar l2sq = lambda * lambda;
  EtaRegion r = EtaRegion::Natural;
  Vector2<Scalar> out;
  if (e.lambda2 <= l2sq) {
    r = EtaRegion::Xi2Extension;
    out = e.xi2;
  } else if (e.lambda1 >= l2sq) {
    r = EtaRegion::Xi1Extension;
    out = e.xi1;
  } else {
    out = eta_direction(e.lambda1, e.lambda2, e.xi1, e.xi2, lambda, sign);
  }
  if (region) *region = r;
  return out;
}

/// Extended eta at an arbitrary position: tensor components interpolated
/// bilinearly, then eigendecomposed. Throws OutOfBounds outside valid data and
/// DegenerateTensor at isotropic points.
Vec2 extend_eta(const EtaFieldSpec& spec, const Vec2& position, EtaRegion* region = nullptr);

// ---------------------------------------------------------------------------
// Lambda-line integration

enum class HaltReason { MaxArclength, LeftDomain, DegenerateCell, SingularityCrossing, Returned };

std::string to_string(HaltReason r);

struct LineOptions {
  double step = 1e-3;          // arclength per RK4 step
  double max_arclength = 1.0;
};

struct LambdaLine {
  std::vector<Vec2> points;
  HaltReason reason = HaltReason::MaxArclength;
  double arclength = 0.0;
};

/// Called with each accepted step (from, to, arclength so far); returning a
/// point ends the line there with HaltReason::Returned.
using StepObserver = std::function<std::optional<Vec2>(const Vec2&, const Vec2&, double)>;

/// RK4 in arclength with orientation memory: every direction sample is flipped
/// to agree with the previous step. Halts on arclength, leaving the data, a
/// degenerate cell, or a turn sharper than pi/4 between steps.
LambdaLine integrate_lambda_line(const EtaFieldSpec& spec, const Vec2& seed, const Vec2& initial_direction,
                                 const LineOptions& opts, const StepObserver& observer = {});

// ---------------------------------------------------------------------------
// Poincare sections

struct PoincareSection {
  Vec2 anchor = Vec2::Zero();
  Vec2 endpoint = Vec2::Zero();
  std::vector<double> seeds;              // section coordinates, ascending from the anchor
  std::vector<double> return_distances;   // NaN where no return was found
  bool truncated = false;

  double length() const { return (endpoint - anchor).norm(); }
  Vec2 direction() const { return (endpoint - anchor).normalized(); }
  /// Left normal of the direction; the initial orientation of launched lines.
  Vec2 normal() const {
    const Vec2 d = direction();
    return {-d.y(), d.x()};
  }
  Vec2 point(double s) const { return anchor + s * direction(); }
};

/// Horizontal section from `anchor` extending `length` in +x with n_seeds
/// equally spaced seeds (both ends included). When `domain` is given and the
/// far end leaves it, the section is shortened to fit and flagged truncated.
/// Throws SectionLeavesDomain when the anchor itself is outside.
PoincareSection build_section(const Vec2& anchor, double length, int n_seeds, const Bounds* domain = nullptr);

inline PoincareSection build_section(const WedgePair& pair, double length, int n_seeds,
                                     const Bounds* domain = nullptr) {
  return build_section(pair.midpoint, length, n_seeds, domain);
}

struct ReturnResult {
  double seed = 0.0;                   // section coordinate
  std::optional<double> distance;      // P(x) - x
  HaltReason reason = HaltReason::MaxArclength;
  std::vector<Vec2> path;              // seed ... first return
};

/// Launches a lambda-line from section coordinate s toward the section normal
/// (or against it when `reversed`) and stops at the first crossing of the
/// section segment in the same sense.
ReturnResult return_map(const EtaFieldSpec& spec, const PoincareSection& section, double s, const LineOptions& opts,
                        bool reversed = false);

ReturnResult return_distance(const EtaFieldSpec& spec, const PoincareSection& section, std::size_t seed_index,
                             const LineOptions& opts);

/// Fills section.return_distances (NaN = no return).
std::vector<ReturnResult> compute_return_distances(const EtaFieldSpec& spec, PoincareSection& section,
                                                   const LineOptions& opts);

struct ClosedOrbit {
  double seed = 0.0;
  double residual = 0.0;  // |P(x) - x| at the accepted seed
  std::vector<Vec2> path;
};

struct OrbitSearch {
  std::vector<ClosedOrbit> orbits;  // inner to outer
  int stalled_brackets = 0;
  int rejected_brackets = 0;
};

struct OrbitOptions {
  LineOptions line;
  double closure_factor = 1e-3;     // closure tolerance relative to the section length
  double bisection_factor = 1e-6;   // bracket width relative to the section length
  int max_bisections = 50;
};

/// Needs section.return_distances. Seeds already closing within tolerance are
/// returned as they are; sign changes between other consecutive finite values
/// are bisected and re-checked for closure.
OrbitSearch find_closed_orbits(const EtaFieldSpec& spec, const PoincareSection& section, const OrbitOptions& opts);

// ---------------------------------------------------------------------------
// Lambda sweep

struct VortexBoundary {
  ClosedPolygon polygon;
  double lambda = 0.0;
  EtaSign sign = EtaSign::Plus;
  Census census;
  double seed = 0.0;  // section coordinate of the orbit
  Vec2 anchor = Vec2::Zero();
  int pair_index = -1;
};

struct SweepOptions {
  double lambda_min = 0.85;
  double lambda_max = 1.15;
  double lambda_step = 0.01;
  std::vector<EtaSign> signs{EtaSign::Plus, EtaSign::Minus};
  OrbitOptions orbit;

  std::vector<double> lambdas() const;
};

struct SweepTrace {
  double lambda = 0.0;
  EtaSign sign = EtaSign::Plus;
  int closed = 0;
  int accepted = 0;
  std::optional<double> outermost_seed;
};

/// Outermost accepted closed orbit over the sweep. An orbit is accepted when it
/// encloses both wedges of the pair, no other located singularity, and the
/// classified census is (W, T) = (2, 0).
std::optional<VortexBoundary> sweep_lambda(const SymmetricTensorField& tensor, const EigenField& eigen,
                                           const WedgePair& pair, const PoincareSection& section,
                                           const SweepOptions& opts, std::span<const Singularity> located,
                                           std::span<const Singularity> classified,
                                           std::vector<SweepTrace>* trace = nullptr);

/// Whether the orbit satisfies the enclosure rule above; fills `census`.
bool orbit_encloses_pair_only(const ClosedPolygon& orbit, const WedgePair& pair, std::span<const Singularity> located,
                              std::span<const Singularity> classified, Census* census = nullptr);

/// Perimeter after / before advecting every vertex with the flow map.
double arclength_ratio(const VelocityField& field, const ClosedPolygon& curve, const IntegratorConfig& cfg);

}  // namespace lcs
