#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sheafscope/ground_topology.hpp"

namespace sheafscope {

/// A function from an open set into R^dim. Values are stored densely, one
/// row of `dim` coordinates per member in ascending element order.
class Section {
 public:
  Section() = default;
  Section(OpenSet domain, std::size_t dim, std::vector<double> values);

  /// The unique section over the empty set.
  static Section empty(std::size_t universe, std::size_t dim);

  const OpenSet& domain() const noexcept { return domain_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : values_.size() / dim_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Value at a ground element; throws NotSubset if it is outside the domain.
  std::span<const double> at(std::size_t element) const;
  /// Value at the k-th member of the domain.
  std::span<const double> row(std::size_t k) const {
    return {values_.data() + k * dim_, dim_};
  }

  friend bool operator==(const Section& a, const Section& b) = default;

 private:
  OpenSet domain_;
  std::size_t dim_ = 1;
  std::vector<double> values_;
};

/// Restriction of functions.
Section restrict(const Section& s, const OpenSet& v);

/// One section per open set, indexed by canonical ordinal.
class Assignment {
 public:
  Assignment() = default;
  Assignment(const Topology& topology, std::vector<Section> sections);

  std::size_t size() const noexcept { return sections_.size(); }
  std::size_t dim() const noexcept { return sections_.empty() ? 1 : sections_.front().dim(); }
  const Section& section(std::size_t ordinal) const { return sections_.at(ordinal); }
  const std::vector<Section>& sections() const noexcept { return sections_; }

 private:
  std::vector<Section> sections_;
};

Assignment assignment_from_global(const Topology& topology, const Section& global);

struct ConsistencyWitness {
  std::size_t outer = 0;  // U
  std::size_t inner = 0;  // V, a cover of U
  std::size_t element = 0;
  std::size_t coordinate = 0;
  double outer_value = 0.0;
  double inner_value = 0.0;
};

struct ConsistencyResult {
  bool consistent = true;
  std::optional<ConsistencyWitness> witness;
};

/// Checks a_V == res(a_U) on every cover pair, walking U from the whole set
/// downward in canonical order. Equality is per coordinate within `tol`.
ConsistencyResult is_consistent(const Topology& topology, const Assignment& a, double tol = 0.0);

/// Extends a section on an open set to the whole ground set, using `fill`
/// outside the original domain.
Section extend_to_global(const Section& s, const Topology& topology, std::span<const double> fill);

}  // namespace sheafscope
