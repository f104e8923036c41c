#pragma once

// Generic discrete Bayesian network with hard and soft evidence.
//
// Soft evidence is accepted on root nodes only and replaces the node's prior,
// which is exact for a root that carries no other evidence. Inference is
// exact (variable elimination); enumerate_joint is the brute-force reference.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace floodprio::bn {

inline constexpr double kStochasticTolerance = 1e-9;

struct NodeSpec {
  std::string name;
  std::vector<std::string> states;
  std::vector<std::string> parents;
  // Row-major over parent state combinations with the first parent varying
  // slowest; each row is a distribution over `states`. Roots hold one row,
  // their prior.
  std::vector<double> table;
};

struct NetworkSpec {
  std::vector<NodeSpec> nodes;
  std::string target;
};

struct ParentAxis {
  std::string name;
  std::vector<std::string> states;
};

// Self-describing conditional probability table of one node.
class ConditionalTable {
 public:
  ConditionalTable(std::string child, std::vector<std::string> child_states,
                   std::vector<ParentAxis> parents, std::vector<double> values);

  const std::string& child() const { return child_; }
  const std::vector<std::string>& child_states() const { return child_states_; }
  const std::vector<ParentAxis>& parents() const { return parents_; }
  std::span<const double> values() const { return values_; }

  std::size_t child_card() const { return child_states_.size(); }
  std::size_t row_count() const { return values_.size() / child_states_.size(); }
  std::span<const double> row(std::size_t r) const;
  std::size_t row_index(std::span<const std::size_t> parent_states) const;
  std::vector<std::size_t> parent_states_of(std::size_t r) const;

  // "(Limited, Medium, Not present)"; "()" for a root's prior.
  std::string describe_row(std::size_t r) const;

 private:
  std::string child_;
  std::vector<std::string> child_states_;
  std::vector<ParentAxis> parents_;
  std::vector<double> values_;
};

class DiscreteNetwork {
 public:
  // Validates names, state lists, acyclicity, table shapes and row sums.
  static DiscreteNetwork build(const NetworkSpec& spec);

  std::size_t size() const { return names_.size(); }
  std::size_t index_of(std::string_view name) const;
  const std::string& name(std::size_t i) const { return names_[i]; }
  const std::vector<std::string>& states(std::size_t i) const { return tables_[i].child_states(); }
  std::size_t state_index(std::size_t node, std::string_view state) const;
  const std::vector<std::size_t>& parents(std::size_t i) const { return parents_[i]; }
  bool is_root(std::size_t i) const { return parents_[i].empty(); }
  const ConditionalTable& table(std::size_t i) const { return tables_[i]; }
  const ConditionalTable& table(std::string_view name) const { return tables_[index_of(name)]; }
  std::size_t target() const { return target_; }
  const std::vector<std::size_t>& topological_order() const { return order_; }

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<ConditionalTable> tables_;
  std::vector<std::size_t> order_;
  std::size_t target_ = 0;
};

inline DiscreteNetwork build_network(const NetworkSpec& spec) {
  return DiscreteNetwork::build(spec);
}

// JSON form: {"target": name, "nodes": [{"name", "states", "parents", "table"}]}.
NetworkSpec parse_network_json(std::string_view text);

struct Hard {
  std::string state;
};

struct Soft {
  std::vector<double> distribution;
};

using EvidenceEntry = std::variant<Hard, Soft>;

class Evidence {
 public:
  Evidence& hard(std::string node, std::string state);
  Evidence& soft(std::string node, std::vector<double> distribution);

  const std::map<std::string, EvidenceEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::map<std::string, EvidenceEntry> entries_;
};

// Posterior over the states of `query` (the network target by default).
// Throws a validation error for unknown nodes or states, soft evidence on a
// non-root node, malformed soft vectors, or evidence of probability zero.
std::vector<double> infer(const DiscreteNetwork& net, const Evidence& ev);
std::vector<double> infer(const DiscreteNetwork& net, const Evidence& ev, std::string_view query);

// Brute-force joint distribution, normalised over the evidence. Limited to
// networks whose joint has at most 2^12 entries.
struct JointDistribution {
  std::vector<std::size_t> cards;       // per node, network order
  std::vector<double> probabilities;    // last node varies fastest
  std::vector<double> marginal(std::size_t node) const;
};

inline constexpr std::size_t kMaxJointSize = std::size_t{1} << 12;

JointDistribution enumerate_joint(const DiscreteNetwork& net, const Evidence& ev);

}  // namespace floodprio::bn
