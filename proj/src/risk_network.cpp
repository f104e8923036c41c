#include "floodprio/risk_network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "floodprio/error.hpp"
#include "floodprio/geo_ingest.hpp"
#include "floodprio/text_format.hpp"

namespace floodprio {

namespace {

constexpr std::size_t kAccessParent = 0;
constexpr std::size_t kDensityParent = 1;
constexpr std::size_t kFacilityParent = 2;

std::array<double, 4> shift_toward_high(std::array<double, 4> p, double f) {
  std::array<double, 4> out{};
  out[0] = (1.0 - f) * p[0];
  out[1] = (1.0 - f) * p[1] + f * p[0];
  out[2] = (1.0 - f) * p[2] + f * p[1];
  out[3] = p[3] + f * p[2];
  return out;
}

std::size_t index_in(const std::vector<std::string>& labels, std::string_view label,
                     std::string_view what) {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) {
    fail_validation("unknown " + std::string(what) + " state '" + std::string(label) + "'");
  }
  return static_cast<std::size_t>(it - labels.begin());
}

std::array<double, 4> parse_four(std::string_view text, std::string_view key) {
  const std::vector<double> v = parse_number_list(text, key);
  if (v.size() != 4) fail_validation(std::string(key) + ": expected 4 numbers");
  return {v[0], v[1], v[2], v[3]};
}

int parse_shift_count(std::string_view text, std::string_view key) {
  const std::vector<double> v = parse_number_list(text, key);
  if (v.size() != 1 || v[0] < 0 || v[0] != std::floor(v[0])) {
    fail_validation(std::string(key) + ": expected a non-negative integer");
  }
  return static_cast<int>(v[0]);
}

}  // namespace

std::vector<double> generate_risk_table(const RiskTableGenerator& gen) {
  const std::array<int, 3> shifts{gen.shifts_false, gen.shifts_limited, gen.shifts_true};
  const std::array<std::array<double, 4>, 3> bases{gen.base_low, gen.base_medium, gen.base_high};
  std::vector<double> values;
  values.reserve(kRiskTableSize);
  for (std::size_t a = 0; a < kAccessStates.size(); ++a) {
    for (std::size_t d = 0; d < kDensityStates.size(); ++d) {
      for (std::size_t f = 0; f < kFacilityStates.size(); ++f) {
        std::array<double, 4> row{};
        if (f == 0) {
          row = {0.0, 0.0, 0.0, 1.0};
        } else if (d == 0) {
          row = {1.0, 0.0, 0.0, 0.0};
        } else {
          row = bases[d - 1];
          for (int s = 0; s < shifts[a]; ++s) row = shift_toward_high(row, gen.shift_fraction);
        }
        values.insert(values.end(), row.begin(), row.end());
      }
    }
  }
  return values;
}

std::vector<double> risk_table_values(const CptConfig& cfg) {
  if (const auto* gen = std::get_if<RiskTableGenerator>(&cfg)) return generate_risk_table(*gen);
  const auto& table = std::get<ExplicitRiskTable>(cfg);
  if (table.values.size() != kRiskTableSize) {
    fail_validation("explicit risk table needs " + std::to_string(kRiskTableSize) +
                    " values, got " + std::to_string(table.values.size()));
  }
  return table.values;
}

CptConfig parse_cpt_config(std::string_view text) {
  const std::vector<KeyValue> entries = parse_key_values(text);
  std::string mode;
  for (const KeyValue& kv : entries) {
    if (kv.key == "mode") mode = kv.value;
  }
  if (mode == "generator") {
    RiskTableGenerator gen;
    for (const KeyValue& kv : entries) {
      if (kv.key == "mode") continue;
      if (kv.key == "base.Low") {
        gen.base_low = parse_four(kv.value, kv.key);
      } else if (kv.key == "base.Medium") {
        gen.base_medium = parse_four(kv.value, kv.key);
      } else if (kv.key == "base.High") {
        gen.base_high = parse_four(kv.value, kv.key);
      } else if (kv.key == "shift_fraction") {
        gen.shift_fraction = parse_number(kv.value, kv.key);
      } else if (kv.key == "shifts.True") {
        gen.shifts_true = parse_shift_count(kv.value, kv.key);
      } else if (kv.key == "shifts.Limited") {
        gen.shifts_limited = parse_shift_count(kv.value, kv.key);
      } else if (kv.key == "shifts.False") {
        gen.shifts_false = parse_shift_count(kv.value, kv.key);
      } else {
        fail_validation("line " + std::to_string(kv.line) + ": unknown key '" + kv.key + "'");
      }
    }
    if (!(gen.shift_fraction >= 0.0 && gen.shift_fraction <= 1.0)) {
      fail_validation("shift_fraction must lie in [0, 1]");
    }
    return gen;
  }
  if (mode == "explicit") {
    ExplicitRiskTable table;
    table.values.assign(kRiskTableSize, 0.0);
    std::vector<bool> seen(kRiskTableSize / 4, false);
    for (const KeyValue& kv : entries) {
      if (kv.key == "mode") continue;
      if (kv.key != "row") {
        fail_validation("line " + std::to_string(kv.line) + ": unknown key '" + kv.key + "'");
      }
      const std::size_t colon = kv.value.find(':');
      if (colon == std::string::npos) {
        fail_validation("line " + std::to_string(kv.line) + ": row needs '<keys> : <values>'");
      }
      const std::vector<std::string> keys = split_trimmed(kv.value.substr(0, colon), ',');
      if (keys.size() != 3) {
        fail_validation("line " + std::to_string(kv.line) +
                        ": row key must be <access>, <density>, <facility>");
      }
      const std::size_t a = index_in(kAccessStates, keys[0], "access");
      const std::size_t d = index_in(kDensityStates, keys[1], "density");
      const std::size_t f = index_in(kFacilityStates, keys[2], "facility");
      const std::size_t r = (a * kDensityStates.size() + d) * kFacilityStates.size() + f;
      if (seen[r]) fail_validation("line " + std::to_string(kv.line) + ": duplicate row");
      seen[r] = true;
      const auto probs = parse_four(kv.value.substr(colon + 1), "row");
      std::copy(probs.begin(), probs.end(), table.values.begin() + static_cast<long>(4 * r));
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      fail_validation("explicit risk table must list all 24 rows");
    }
    return table;
  }
  fail_validation("cpt config needs 'mode = generator' or 'mode = explicit'");
}

std::string format_cpt_config(const CptConfig& cfg) {
  std::ostringstream out;
  out << "# risk table configuration\n";
  if (const auto* gen = std::get_if<RiskTableGenerator>(&cfg)) {
    out << "mode = generator\n";
    out << "base.Low = " << format_number_list(gen->base_low) << "\n";
    out << "base.Medium = " << format_number_list(gen->base_medium) << "\n";
    out << "base.High = " << format_number_list(gen->base_high) << "\n";
    out << "shift_fraction = " << format_number(gen->shift_fraction) << "\n";
    out << "shifts.True = " << gen->shifts_true << "\n";
    out << "shifts.Limited = " << gen->shifts_limited << "\n";
    out << "shifts.False = " << gen->shifts_false << "\n";
    return out.str();
  }
  const auto& table = std::get<ExplicitRiskTable>(cfg);
  out << "mode = explicit\n";
  out << "# row = <unexposed_access>, <exposed_density>, <care_facility> : "
         "p_none p_low p_medium p_high\n";
  for (std::size_t a = 0; a < kAccessStates.size(); ++a) {
    for (std::size_t d = 0; d < kDensityStates.size(); ++d) {
      for (std::size_t f = 0; f < kFacilityStates.size(); ++f) {
        const std::size_t r = (a * kDensityStates.size() + d) * kFacilityStates.size() + f;
        out << "row = " << kAccessStates[a] << ", " << kDensityStates[d] << ", "
            << kFacilityStates[f] << " : "
            << format_number_list(std::span<const double>(table.values).subspan(4 * r, 4))
            << "\n";
      }
    }
  }
  return out.str();
}

CptConfig load_cpt_config(const std::filesystem::path& path) {
  return parse_cpt_config(read_file(path));
}

void save_cpt_config(const std::filesystem::path& path, const CptConfig& cfg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_validation("cannot write '" + path.string() + "'");
  out << format_cpt_config(cfg);
}

// ---------------------------------------------------------------------------

std::string_view to_string(ViolationClass c) {
  switch (c) {
    case ViolationClass::NotStochastic:
      return "not-stochastic";
    case ViolationClass::ForcedOutcome:
      return "forced-outcome";
    case ViolationClass::Dominance:
      return "dominance";
  }
  return "unknown";
}

std::string ValidationReport::summary() const {
  std::string out;
  for (const Violation& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.rule + " at " + v.cell + ": " + v.detail;
  }
  return out;
}

ValidationReport validate_cpt(const bn::ConditionalTable& table, const TableRules& rules) {
  ValidationReport report;
  const std::size_t card = table.child_card();

  for (std::size_t r = 0; r < table.row_count(); ++r) {
    const auto row = table.row(r);
    double sum = 0.0;
    bool negative = false;
    for (const double v : row) {
      sum += v;
      negative = negative || !(v >= 0.0);
    }
    if (negative || std::abs(sum - 1.0) > bn::kStochasticTolerance) {
      report.violations.push_back({ViolationClass::NotStochastic, "stochastic",
                                   table.describe_row(r),
                                   "row sums to " + std::to_string(sum)});
    }

    const auto parents = table.parent_states_of(r);
    for (const ForcedOutcomeRule& rule : rules.forced) {
      const bool applies = std::all_of(rule.when.begin(), rule.when.end(), [&](const auto& c) {
        return parents[c.first] == c.second;
      });
      if (applies && row[rule.outcome] < 1.0 - kDominanceTolerance) {
        report.violations.push_back(
            {ViolationClass::ForcedOutcome, rule.name, table.describe_row(r),
             "P(" + table.child_states()[rule.outcome] + ") = " +
                 std::to_string(row[rule.outcome]) + ", expected 1"});
      }
    }

    for (const DominanceRule& rule : rules.dominance) {
      const auto pos = std::find(rule.severity.begin(), rule.severity.end(),
                                 parents[rule.parent]);
      if (pos == rule.severity.end() || pos + 1 == rule.severity.end()) continue;
      auto next_parents = parents;
      next_parents[rule.parent] = *(pos + 1);
      const std::size_t next = table.row_index(next_parents);
      const auto upper = table.row(next);
      // Tail masses P(outcome >= t) along the outcome severity order.
      double tail_lower = 0.0;
      double tail_upper = 0.0;
      for (std::size_t t = card; t-- > 1;) {
        tail_lower += row[rules.outcome_severity[t]];
        tail_upper += upper[rules.outcome_severity[t]];
        if (tail_upper < tail_lower - kDominanceTolerance) {
          report.violations.push_back(
              {ViolationClass::Dominance, rule.name,
               table.describe_row(r) + " -> " + table.describe_row(next),
               "P(>= " + table.child_states()[rules.outcome_severity[t]] + ") drops from " +
                   std::to_string(tail_lower) + " to " + std::to_string(tail_upper)});
          break;
        }
      }
    }
  }
  return report;
}

TableRules risk_table_rules() {
  TableRules rules;
  rules.outcome_severity = {0, 1, 2, 3};
  rules.forced.push_back({"principle-iii", {{kFacilityParent, 0}}, 3});
  rules.forced.push_back({"none-density", {{kDensityParent, 0}, {kFacilityParent, 1}}, 0});
  rules.dominance.push_back({"principle-i", kDensityParent, {0, 1, 2, 3}});
  // Access states are (False, Limited, True); severity rises as access falls.
  rules.dominance.push_back({"principle-ii", kAccessParent, {2, 1, 0}});
  return rules;
}

bn::DiscreteNetwork build_risk_network(const CptConfig& cfg) {
  bn::NetworkSpec spec;
  spec.target = std::string(node::kRisk);
  spec.nodes.push_back({std::string(node::kRemoteAccess), kBooleanStates, {}, {0.5, 0.5}});
  spec.nodes.push_back({std::string(node::kImmediateAccess), kBooleanStates, {}, {0.5, 0.5}});
  // Parents (remote, immediate) in (True, False) order; child (False, Limited, True).
  spec.nodes.push_back({std::string(node::kUnexposedAccess),
                        kAccessStates,
                        {std::string(node::kRemoteAccess), std::string(node::kImmediateAccess)},
                        {0, 0, 1,  //
                         0, 1, 0,  //
                         0, 1, 0,  //
                         1, 0, 0}});
  spec.nodes.push_back(
      {std::string(node::kExposedDensity), kDensityStates, {}, {0.25, 0.25, 0.25, 0.25}});
  spec.nodes.push_back({std::string(node::kCareFacility), kFacilityStates, {}, {0.5, 0.5}});
  spec.nodes.push_back({std::string(node::kRisk),
                        kRiskStates,
                        {std::string(node::kUnexposedAccess), std::string(node::kExposedDensity),
                         std::string(node::kCareFacility)},
                        risk_table_values(cfg)});
  bn::DiscreteNetwork net = bn::build_network(spec);
  const ValidationReport report = validate_cpt(net.table(node::kRisk), risk_table_rules());
  if (!report.ok()) fail_validation("risk table violates: " + report.summary());
  return net;
}

bn::DiscreteNetwork build_risk_network(const std::filesystem::path& cpt_path) {
  return build_risk_network(load_cpt_config(cpt_path));
}

bn::Evidence evidence_for(const EvidenceBundle& bundle) {
  bn::Evidence ev;
  ev.hard(std::string(node::kExposedDensity), std::string(to_string(bundle.density)));
  ev.hard(std::string(node::kCareFacility), bundle.facility_exposed ? "Present" : "Not present");
  const double p = std::clamp(bundle.immediate_unexposed, 0.0, 1.0);
  ev.soft(std::string(node::kImmediateAccess), {p, 1.0 - p});
  ev.hard(std::string(node::kRemoteAccess), bundle.remote_accessible ? "True" : "False");
  return ev;
}

RiskPosterior infer_risk(const bn::DiscreteNetwork& net, const EvidenceBundle& bundle) {
  const std::vector<double> post = bn::infer(net, evidence_for(bundle));
  return {post[0], post[1], post[2], post[3]};
}

}  // namespace floodprio
