#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "flatdyn/certifier.hpp"
#include "flatdyn/field.hpp"
#include "flatdyn/flow.hpp"
#include "flatdyn/inequality.hpp"
#include "flatdyn/problem.hpp"

namespace flatdyn {

using Json = nlohmann::ordered_json;

Json to_json(const Vector& v);
Json to_json(const SpectrumReport& r);
Json to_json(const PositivityReport& r);
Json to_json(const InequalityEstimate& r);
Json to_json(const FlatnessReport& r);
Json to_json(const WitnessBound& w);
Json to_json(const GsCertificate& c);
Json to_json(const SinkRateFit& f);
Json to_json(const MaximalInterval& m);
/// Summary only: {c, max_violation, verdict}.
Json to_json(const GronwallReport& r);
Json to_json(const IntegratorConfig& c);
Json to_json(const ProblemSpec& s);

/// Missing keys keep their defaults; throws InvalidArgument on wrong types.
ProblemSpec problem_from_json(const Json& j);
/// Applies keys present in `j` on top of `base`.
void apply_integrator_json(const Json& j, IntegratorConfig& base);

/// Non-finite numbers become null; indent < 0 gives compact output.
std::string dump_json(const Json& j, int indent = 2);

// CSV series. Numbers are written in shortest round-trip form.

/// Header `t,x1,...,xn`, one row per sample, then `# termination=<name>`.
void write_orbit_csv(std::ostream& out, const Orbit& orbit);
Orbit read_orbit_csv(std::istream& in, Direction direction = Direction::Forward);

/// `t,observed,bound`.
void write_gronwall_csv(std::ostream& out, const GronwallReport& r);
GronwallReport read_gronwall_csv(std::istream& in);

/// `radius,k,ratio`, one row per table entry.
void write_flatness_csv(std::ostream& out, const FlatnessReport& r);
/// Restores radii, k_max and the ratio table; verdicts are not stored.
FlatnessReport read_flatness_csv(std::istream& in);

/// `radius,sup`; bands without a finite ratio are written as an empty field.
void write_ratio_sup_csv(std::ostream& out, const std::vector<RadiusSup>& sups);
std::vector<RadiusSup> read_ratio_sup_csv(std::istream& in);

/// `t,lhs,rhs`.
void write_witness_csv(std::ostream& out, const WitnessBound& w);
WitnessBound read_witness_csv(std::istream& in);

}  // namespace flatdyn
