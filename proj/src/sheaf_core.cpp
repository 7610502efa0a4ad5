#include "sheafscope/sheaf_core.hpp"

#include <cmath>
#include <string>

#include "sheafscope/error.hpp"

namespace sheafscope {

Section::Section(OpenSet domain, std::size_t dim, std::vector<double> values)
    : domain_(std::move(domain)), dim_(dim), values_(std::move(values)) {
  if (dim_ == 0) throw Error(ErrorCode::DimMismatch, "section value dimension must be at least 1");
  if (values_.size() != domain_.count() * dim_) {
    throw Error(ErrorCode::DimMismatch, "section holds " + std::to_string(values_.size()) +
                                            " values, expected " + std::to_string(domain_.count() * dim_));
  }
}

Section Section::empty(std::size_t universe, std::size_t dim) { return Section(OpenSet(universe), dim, {}); }

std::span<const double> Section::at(std::size_t element) const {
  if (!domain_.test(element)) {
    throw Error(ErrorCode::NotSubset, "element " + std::to_string(element) + " is outside the section domain");
  }
  return row(domain_.rank(element));
}

Section restrict(const Section& s, const OpenSet& v) {
  if (!v.is_subset_of(s.domain())) {
    throw Error(ErrorCode::NotSubset, "restriction target is not contained in the section domain");
  }
  if (v == s.domain()) return s;
  std::vector<double> values;
  values.reserve(v.count() * s.dim());
  for (auto m : v.members()) {
    auto row = s.at(m);
    values.insert(values.end(), row.begin(), row.end());
  }
  return Section(v, s.dim(), std::move(values));
}

Assignment::Assignment(const Topology& topology, std::vector<Section> sections)
    : sections_(std::move(sections)) {
  if (sections_.size() != topology.size()) {
    throw Error(ErrorCode::DomainMismatch, "assignment has " + std::to_string(sections_.size()) +
                                               " sections for " + std::to_string(topology.size()) + " open sets");
  }
  const std::size_t dim = sections_.front().dim();
  for (std::size_t i = 0; i < sections_.size(); ++i) {
    if (sections_[i].domain() != topology.at(i)) {
      throw Error(ErrorCode::DomainMismatch, "section " + std::to_string(i) + " is not over its open set");
    }
    if (sections_[i].dim() != dim) {
      throw Error(ErrorCode::DimMismatch, "sections disagree on value dimension");
    }
  }
}

Assignment assignment_from_global(const Topology& topology, const Section& global) {
  if (global.domain() != OpenSet::full(topology.ground().size())) {
    throw Error(ErrorCode::DomainMismatch, "global section must be defined on the whole ground set");
  }
  std::vector<Section> sections;
  sections.reserve(topology.size());
  for (const auto& u : topology.opens()) sections.push_back(restrict(global, u));
  return Assignment(topology, std::move(sections));
}

ConsistencyResult is_consistent(const Topology& topology, const Assignment& a, double tol) {
  for (std::size_t u = topology.size(); u-- > 0;) {
    const Section& outer = a.section(u);
    for (auto v : topology.covers(u)) {
      const Section& inner = a.section(v);
      for (auto m : inner.domain().members()) {
        auto x = outer.at(m);
        auto y = inner.at(m);
        for (std::size_t c = 0; c < x.size(); ++c) {
          if (!(std::abs(x[c] - y[c]) <= tol)) {
            return {false, ConsistencyWitness{u, v, m, c, x[c], y[c]}};
          }
        }
      }
    }
  }
  return {};
}

Section extend_to_global(const Section& s, const Topology& topology, std::span<const double> fill) {
  if (!topology.contains(s.domain())) {
    throw Error(ErrorCode::DomainMismatch, "section domain is not an open set of the topology");
  }
  if (fill.size() != s.dim()) {
    throw Error(ErrorCode::DomainMismatch, "fill vector has length " + std::to_string(fill.size()) +
                                               ", expected " + std::to_string(s.dim()));
  }
  const std::size_t n = topology.ground().size();
  if (s.domain().count() == n) return s;
  std::vector<double> values;
  values.reserve(n * s.dim());
  for (std::size_t i = 0; i < n; ++i) {
    if (s.domain().test(i)) {
      auto row = s.at(i);
      values.insert(values.end(), row.begin(), row.end());
    } else {
      values.insert(values.end(), fill.begin(), fill.end());
    }
  }
  return Section(OpenSet::full(n), s.dim(), std::move(values));
}

}  // namespace sheafscope
