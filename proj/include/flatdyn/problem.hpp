#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flatdyn/certifier.hpp"
#include "flatdyn/expr.hpp"
#include "flatdyn/field.hpp"
#include "flatdyn/flow.hpp"
#include "flatdyn/inequality.hpp"

namespace flatdyn {

/// A problem as the user states it: expressions as text plus run parameters.
struct ProblemSpec {
  int dimension = 0;
  std::vector<std::string> field_components;
  std::string scalar_function;  // empty when the command does not need f
  std::optional<double> f_origin_value;
  double radius = 1.0;
  std::optional<double> c;
  std::uint64_t seed = 42;
  RhsMode rhs = RhsMode::FunctionValue;
  IntegratorConfig integrator;

  /// Throws InputError subclasses when an expression does not parse at
  /// `dimension` or a parameter is out of range.
  void validate() const;

  VectorField field() const;
  ParsedFunction function() const;
  bool has_function() const noexcept { return !scalar_function.empty(); }
};

/// Splits "x1, -x2*(x1+1)" at top-level commas.
std::vector<std::string> split_components(const std::string& text);

/// Largest variable index referenced by any of the texts (at least 1).
int infer_dimension(const std::vector<std::string>& texts);

struct CatalogEntry {
  std::string name;
  ProblemSpec spec;
  Conclusion expected;
  std::string note;
};

/// Built-in problems, sorted by name.
const std::vector<CatalogEntry>& catalog();

/// Throws InvalidArgument for an unknown name.
const CatalogEntry& catalog_entry(const std::string& name);

}  // namespace flatdyn
