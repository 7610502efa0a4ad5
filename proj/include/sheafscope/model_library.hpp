#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "sheafscope/ground_topology.hpp"
#include "sheafscope/sheaf_core.hpp"

namespace sheafscope {

struct Null {
  friend bool operator==(const Null&, const Null&) = default;
};

struct Scalar {
  double value = 0.0;
  friend bool operator==(const Scalar&, const Scalar&) = default;
};

/// Score in [0,1].
struct UnitScore {
  double value = 0.0;
  friend bool operator==(const UnitScore&, const UnitScore&) = default;
};

/// q-dimensional affine subspace base + span(basis) of R^r. The basis has
/// orthonormal columns. `degenerate` marks fits whose (q+1)-th singular value
/// is zero or ties the q-th within 1e-9.
struct AffineSubspace {
  Eigen::VectorXd base;
  Eigen::MatrixXd basis;
  bool degenerate = false;

  std::size_t ambient_dim() const { return static_cast<std::size_t>(base.size()); }
  std::size_t dim() const { return static_cast<std::size_t>(basis.cols()); }
};

/// A model that could not be fitted on its open set.
struct Undefined {
  std::string reason;
  friend bool operator==(const Undefined&, const Undefined&) = default;
};

/// `Section` is the model space of the identity model, whose restriction is
/// function restriction.
using ModelValue = std::variant<Null, Scalar, UnitScore, AffineSubspace, Section, Undefined>;

inline bool is_undefined(const ModelValue& m) { return std::holds_alternative<Undefined>(m); }

enum class ModelFamily { Identity, Average, Statistic, Graff, Prototype };
enum class Statistic { Median, Max, Min };
enum class ClassLabel : std::uint8_t { s, ns };

struct PrototypeParams {
  /// One label per ground element.
  std::vector<ClassLabel> labels;
  std::size_t shots = 3;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
};

struct ModelPresheafSpec {
  ModelFamily family = ModelFamily::Average;
  Statistic statistic = Statistic::Median;
  std::size_t q = 1;
  PrototypeParams prototype;

  static ModelPresheafSpec identity();
  static ModelPresheafSpec average();
  static ModelPresheafSpec scalar_statistic(Statistic which);
  static ModelPresheafSpec graff(std::size_t q);
  static ModelPresheafSpec prototype_accuracy(PrototypeParams params);

  std::string name() const;
};

ModelValue model_average(const Section& s);
ModelValue model_statistic(const Section& s, Statistic which);

/// Total-least-squares fit: centroid plus the top-q right singular directions
/// of the centered data, each column signed so its largest-magnitude entry is
/// positive.
AffineSubspace model_graff_fit(const Section& s, std::size_t q);

/// Geodesic distance between the (q+1)-dimensional linear lifts
/// span{[w_i;0]} + span{[b;1]} in R^{r+1}: sqrt of the summed squared
/// principal angles.
double graff_distance(const AffineSubspace& a, const AffineSubspace& b);

/// Sum of squared orthogonal distances from the rows of `points` to `a`.
double orthogonal_residual(const AffineSubspace& a, const Eigen::MatrixXd& points);

struct PrototypeStats {
  double accuracy = 0.0;
  std::size_t episodes = 0;
  std::size_t queries_per_episode = 0;
  /// Nearest-prototype ties, resolved in favour of class s.
  std::size_t ties = 0;
  std::vector<double> episode_accuracy;
};

/// Seed of the episode stream for one open set.
std::uint64_t prototype_stream_seed(std::uint64_t base_seed, const OpenSet& domain);

/// Runs the few-shot episodes; returns Undefined when either class has fewer
/// than `shots` members or no query remains after drawing the supports.
std::variant<PrototypeStats, Undefined> prototype_episodes(const Section& s, const PrototypeParams& p);
ModelValue model_prototype_accuracy(const Section& s, const PrototypeParams& p);

/// The modeling map for one open set. The empty set always maps to Null;
/// unmet fitting preconditions yield Undefined rather than throwing.
ModelValue evaluate_model(const ModelPresheafSpec& spec, const Section& s);

double metric(const ModelPresheafSpec& spec, const OpenSet& u, const ModelValue& a, const ModelValue& b);

ModelValue restrict_model(const ModelPresheafSpec& spec, const OpenSet& u, const OpenSet& v, const ModelValue& m);

}  // namespace sheafscope
