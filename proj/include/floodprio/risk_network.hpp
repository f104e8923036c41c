#pragma once

// The flood-response network: four root nodes informed by the GIS models,
// one deterministic accessibility node, and the target node
// "risk of people in need of assistance".
//
//   remote_access ─┐
//                  ├─> unexposed_access ─┐
//   immediate_access┘                    ├─> risk
//   exposed_density ─────────────────────┤
//   care_facility ───────────────────────┘

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "floodprio/bayesnet.hpp"
#include "floodprio/evidence.hpp"

namespace floodprio {

namespace node {
inline constexpr std::string_view kRemoteAccess = "remote_access";
inline constexpr std::string_view kImmediateAccess = "immediate_access";
inline constexpr std::string_view kUnexposedAccess = "unexposed_access";
inline constexpr std::string_view kExposedDensity = "exposed_density";
inline constexpr std::string_view kCareFacility = "care_facility";
inline constexpr std::string_view kRisk = "risk";
}  // namespace node

// State labels in table order.
inline const std::vector<std::string> kBooleanStates{"True", "False"};
inline const std::vector<std::string> kAccessStates{"False", "Limited", "True"};
inline const std::vector<std::string> kDensityStates{"None", "Low", "Medium", "High"};
inline const std::vector<std::string> kFacilityStates{"Present", "Not present"};
inline const std::vector<std::string> kRiskStates{"None", "Low", "Medium", "High"};

// Posterior over (None, Low, Medium, High).
using RiskPosterior = std::array<double, 4>;

// Parameters of the generated default risk table. For each exposed density
// class a base distribution is shifted toward High once per accessibility
// severity step; one shift moves shift_fraction of every state's mass one
// state up. Care facility presence forces High and density None forces None.
struct RiskTableGenerator {
  std::array<double, 4> base_low{0.20, 0.55, 0.20, 0.05};
  std::array<double, 4> base_medium{0.05, 0.30, 0.45, 0.20};
  std::array<double, 4> base_high{0.00, 0.10, 0.40, 0.50};
  double shift_fraction = 0.30;
  int shifts_true = 0;
  int shifts_limited = 1;
  int shifts_false = 2;

  friend bool operator==(const RiskTableGenerator&, const RiskTableGenerator&) = default;
};

// 24 rows x 4 risk states, rows ordered (unexposed_access, exposed_density,
// care_facility) in table state order, last key varying fastest.
struct ExplicitRiskTable {
  std::vector<double> values;

  friend bool operator==(const ExplicitRiskTable&, const ExplicitRiskTable&) = default;
};

using CptConfig = std::variant<RiskTableGenerator, ExplicitRiskTable>;

inline constexpr std::size_t kRiskTableSize = 96;

std::vector<double> risk_table_values(const CptConfig& cfg);
std::vector<double> generate_risk_table(const RiskTableGenerator& gen);

// Text format, "key = value" per line, '#' comments:
//   mode = generator | explicit
//   generator: base.Low / base.Medium / base.High = 4 numbers,
//              shift_fraction, shifts.True / shifts.Limited / shifts.False
//   explicit:  row = <access>, <density>, <facility> : 4 numbers   (24 rows)
// Numbers are written in shortest round-trip form, so save/load is bit-exact.
CptConfig parse_cpt_config(std::string_view text);
std::string format_cpt_config(const CptConfig& cfg);
CptConfig load_cpt_config(const std::filesystem::path& path);
void save_cpt_config(const std::filesystem::path& path, const CptConfig& cfg);

// ---------------------------------------------------------------------------
// Table validation

enum class ViolationClass {
  NotStochastic,
  ForcedOutcome,
  Dominance,
};

std::string_view to_string(ViolationClass c);

struct Violation {
  ViolationClass kind;
  std::string rule;
  std::string cell;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

// Rows matching every (parent, state) condition must put probability 1 on
// `outcome`.
struct ForcedOutcomeRule {
  std::string name;
  std::vector<std::pair<std::size_t, std::size_t>> when;
  std::size_t outcome = 0;
};

// With all other parents fixed, raising `parent` along `severity` (state
// indices, least severe first) must never decrease the outcome distribution
// in first-order stochastic dominance.
struct DominanceRule {
  std::string name;
  std::size_t parent = 0;
  std::vector<std::size_t> severity;
};

struct TableRules {
  std::vector<std::size_t> outcome_severity;  // child states, least severe first
  std::vector<ForcedOutcomeRule> forced;
  std::vector<DominanceRule> dominance;
};

inline constexpr double kDominanceTolerance = 1e-12;

ValidationReport validate_cpt(const bn::ConditionalTable& table, const TableRules& rules);

// Rules for the risk table:
//   principle-iii  care facility Present => High
//   none-density   density None and facility Not present => None
//   principle-i    dominance non-decreasing in density (None < Low < Medium < High)
//   principle-ii   dominance non-decreasing in access severity (True < Limited < False)
TableRules risk_table_rules();

// ---------------------------------------------------------------------------

// Builds the network; the accessibility table is generated from the
// deterministic rules and the risk table comes from the config. Throws a
// validation error listing every violated cell when the risk table breaks a
// rule. Root priors are uniform.
bn::DiscreteNetwork build_risk_network(const CptConfig& cfg = RiskTableGenerator{});
bn::DiscreteNetwork build_risk_network(const std::filesystem::path& cpt_path);

bn::Evidence evidence_for(const EvidenceBundle& bundle);

RiskPosterior infer_risk(const bn::DiscreteNetwork& net, const EvidenceBundle& bundle);

}  // namespace floodprio
