#include "floodprio/bayesnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>

#include "json.hpp"

#include "floodprio/error.hpp"

namespace floodprio::bn {

namespace {

struct ResolvedEvidence {
  std::optional<std::size_t> hard;
  std::optional<std::vector<double>> soft;
};

std::vector<ResolvedEvidence> resolve(const DiscreteNetwork& net, const Evidence& ev) {
  std::vector<ResolvedEvidence> out(net.size());
  for (const auto& [name, entry] : ev.entries()) {
    const std::size_t node = net.index_of(name);
    if (const Hard* h = std::get_if<Hard>(&entry)) {
      out[node].hard = net.state_index(node, h->state);
      continue;
    }
    const Soft& s = std::get<Soft>(entry);
    if (!net.is_root(node)) {
      fail_validation("soft evidence on non-root node '" + name + "'");
    }
    if (s.distribution.size() != net.states(node).size()) {
      fail_validation("soft evidence on '" + name + "' has " +
                      std::to_string(s.distribution.size()) + " entries, node has " +
                      std::to_string(net.states(node).size()) + " states");
    }
    double sum = 0.0;
    for (const double p : s.distribution) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        fail_validation("soft evidence on '" + name + "' has a negative or non-finite entry");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kStochasticTolerance) {
      fail_validation("soft evidence on '" + name + "' does not sum to 1");
    }
    out[node].soft = s.distribution;
  }
  return out;
}

// Dense factor; the last variable varies fastest.
struct Factor {
  std::vector<std::size_t> vars;
  std::vector<std::size_t> cards;
  std::vector<double> values;

  std::size_t position(std::size_t var) const {
    const auto it = std::find(vars.begin(), vars.end(), var);
    return it == vars.end() ? vars.size() : static_cast<std::size_t>(it - vars.begin());
  }
  bool has(std::size_t var) const { return position(var) < vars.size(); }
};

std::vector<std::size_t> strides_of(const std::vector<std::size_t>& cards) {
  std::vector<std::size_t> strides(cards.size(), 1);
  for (std::size_t i = cards.size(); i-- > 1;) strides[i - 1] = strides[i] * cards[i];
  return strides;
}

Factor multiply(const Factor& a, const Factor& b) {
  Factor out;
  out.vars = a.vars;
  out.cards = a.cards;
  for (std::size_t i = 0; i < b.vars.size(); ++i) {
    if (!a.has(b.vars[i])) {
      out.vars.push_back(b.vars[i]);
      out.cards.push_back(b.cards[i]);
    }
  }
  const std::size_t size = std::accumulate(out.cards.begin(), out.cards.end(), std::size_t{1},
                                           std::multiplies<>());
  out.values.assign(size, 0.0);

  // Stride of each output variable inside a and b (0 when absent).
  const auto sa = strides_of(a.cards);
  const auto sb = strides_of(b.cards);
  std::vector<std::size_t> step_a(out.vars.size(), 0);
  std::vector<std::size_t> step_b(out.vars.size(), 0);
  for (std::size_t i = 0; i < out.vars.size(); ++i) {
    if (const std::size_t p = a.position(out.vars[i]); p < a.vars.size()) step_a[i] = sa[p];
    if (const std::size_t p = b.position(out.vars[i]); p < b.vars.size()) step_b[i] = sb[p];
  }

  std::vector<std::size_t> counter(out.vars.size(), 0);
  std::size_t ia = 0;
  std::size_t ib = 0;
  for (std::size_t k = 0; k < size; ++k) {
    out.values[k] = a.values[ia] * b.values[ib];
    for (std::size_t d = out.vars.size(); d-- > 0;) {
      if (++counter[d] < out.cards[d]) {
        ia += step_a[d];
        ib += step_b[d];
        break;
      }
      counter[d] = 0;
      ia -= step_a[d] * (out.cards[d] - 1);
      ib -= step_b[d] * (out.cards[d] - 1);
    }
  }
  return out;
}

Factor sum_out(const Factor& f, std::size_t var) {
  const std::size_t p = f.position(var);
  Factor out;
  for (std::size_t i = 0; i < f.vars.size(); ++i) {
    if (i == p) continue;
    out.vars.push_back(f.vars[i]);
    out.cards.push_back(f.cards[i]);
  }
  const auto strides = strides_of(f.cards);
  const std::size_t inner = strides[p];
  const std::size_t card = f.cards[p];
  const std::size_t outer = f.values.size() / (inner * card);
  out.values.assign(outer * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t s = 0; s < card; ++s) {
      for (std::size_t i = 0; i < inner; ++i) {
        out.values[o * inner + i] += f.values[(o * card + s) * inner + i];
      }
    }
  }
  return out;
}

std::size_t product_size(const std::vector<const Factor*>& factors) {
  std::set<std::pair<std::size_t, std::size_t>> vars;
  for (const Factor* f : factors) {
    for (std::size_t i = 0; i < f->vars.size(); ++i) vars.insert({f->vars[i], f->cards[i]});
  }
  std::size_t size = 1;
  for (const auto& [v, c] : vars) size *= c;
  return size;
}

}  // namespace

// ---------------------------------------------------------------------------
// ConditionalTable

ConditionalTable::ConditionalTable(std::string child, std::vector<std::string> child_states,
                                   std::vector<ParentAxis> parents, std::vector<double> values)
    : child_(std::move(child)),
      child_states_(std::move(child_states)),
      parents_(std::move(parents)),
      values_(std::move(values)) {
  std::size_t rows = 1;
  for (const ParentAxis& p : parents_) rows *= p.states.size();
  if (child_states_.empty() || values_.size() != rows * child_states_.size()) {
    fail_validation("table of '" + child_ + "' has " + std::to_string(values_.size()) +
                    " entries, expected " + std::to_string(rows * child_states_.size()) + " (" +
                    std::to_string(rows) + " rows)");
  }
}

std::span<const double> ConditionalTable::row(std::size_t r) const {
  return std::span<const double>(values_).subspan(r * child_card(), child_card());
}

std::size_t ConditionalTable::row_index(std::span<const std::size_t> parent_states) const {
  std::size_t r = 0;
  for (std::size_t i = 0; i < parents_.size(); ++i) {
    r = r * parents_[i].states.size() + parent_states[i];
  }
  return r;
}

std::vector<std::size_t> ConditionalTable::parent_states_of(std::size_t r) const {
  std::vector<std::size_t> states(parents_.size());
  for (std::size_t i = parents_.size(); i-- > 0;) {
    states[i] = r % parents_[i].states.size();
    r /= parents_[i].states.size();
  }
  return states;
}

std::string ConditionalTable::describe_row(std::size_t r) const {
  const auto states = parent_states_of(r);
  std::string out = "(";
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (i) out += ", ";
    out += parents_[i].states[states[i]];
  }
  return out + ")";
}

// ---------------------------------------------------------------------------
// DiscreteNetwork

DiscreteNetwork DiscreteNetwork::build(const NetworkSpec& spec) {
  DiscreteNetwork net;
  std::map<std::string, std::size_t> index;
  for (const NodeSpec& n : spec.nodes) {
    if (n.name.empty()) fail_validation("node with empty name");
    if (!index.emplace(n.name, net.names_.size()).second) {
      fail_validation("duplicate node '" + n.name + "'");
    }
    net.names_.push_back(n.name);
    if (n.states.size() < 2) fail_validation("node '" + n.name + "' needs at least 2 states");
    if (std::set<std::string>(n.states.begin(), n.states.end()).size() != n.states.size()) {
      fail_validation("node '" + n.name + "' has duplicate state labels");
    }
  }

  net.parents_.resize(spec.nodes.size());
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    for (const std::string& p : spec.nodes[i].parents) {
      const auto it = index.find(p);
      if (it == index.end()) {
        fail_validation("node '" + spec.nodes[i].name + "' has unknown parent '" + p + "'");
      }
      if (std::find(net.parents_[i].begin(), net.parents_[i].end(), it->second) !=
          net.parents_[i].end()) {
        fail_validation("node '" + spec.nodes[i].name + "' lists parent '" + p + "' twice");
      }
      net.parents_[i].push_back(it->second);
    }
  }

  // Kahn's algorithm; ties resolved by declaration order.
  std::vector<std::size_t> pending(spec.nodes.size());
  std::vector<std::vector<std::size_t>> children(spec.nodes.size());
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    pending[i] = net.parents_[i].size();
    for (const std::size_t p : net.parents_[i]) children[p].push_back(i);
  }
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    if (pending[i] == 0) ready.insert(i);
  }
  while (!ready.empty()) {
    const std::size_t n = *ready.begin();
    ready.erase(ready.begin());
    net.order_.push_back(n);
    for (const std::size_t c : children[n]) {
      if (--pending[c] == 0) ready.insert(c);
    }
  }
  if (net.order_.size() != spec.nodes.size()) {
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (pending[i] > 0) fail_validation("cycle detected through node '" + net.names_[i] + "'");
    }
  }

  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    const NodeSpec& n = spec.nodes[i];
    std::vector<ParentAxis> axes;
    for (const std::size_t p : net.parents_[i]) {
      axes.push_back({spec.nodes[p].name, spec.nodes[p].states});
    }
    ConditionalTable table(n.name, n.states, std::move(axes), n.table);
    for (std::size_t r = 0; r < table.row_count(); ++r) {
      double sum = 0.0;
      for (const double v : table.row(r)) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
          fail_validation("table of '" + n.name + "' row " + table.describe_row(r) +
                          " has a negative or non-finite entry");
        }
        sum += v;
      }
      if (std::abs(sum - 1.0) > kStochasticTolerance) {
        fail_validation("table of '" + n.name + "' row " + table.describe_row(r) +
                        " sums to " + std::to_string(sum));
      }
    }
    net.tables_.push_back(std::move(table));
  }

  const auto target = index.find(spec.target);
  if (target == index.end()) fail_validation("unknown target node '" + spec.target + "'");
  net.target_ = target->second;
  return net;
}

std::size_t DiscreteNetwork::index_of(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) fail_validation("unknown node '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t DiscreteNetwork::state_index(std::size_t node, std::string_view state) const {
  const auto& labels = states(node);
  const auto it = std::find(labels.begin(), labels.end(), state);
  if (it == labels.end()) {
    fail_validation("node '" + names_[node] + "' has no state '" + std::string(state) + "'");
  }
  return static_cast<std::size_t>(it - labels.begin());
}

NetworkSpec parse_network_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
    NetworkSpec spec;
    spec.target = doc.at("target").get<std::string>();
    for (const auto& n : doc.at("nodes")) {
      spec.nodes.push_back({n.at("name").get<std::string>(),
                            n.at("states").get<std::vector<std::string>>(),
                            n.value("parents", std::vector<std::string>{}),
                            n.at("table").get<std::vector<double>>()});
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    fail_validation(std::string("network description: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Evidence

Evidence& Evidence::hard(std::string node, std::string state) {
  entries_.insert_or_assign(std::move(node), Hard{std::move(state)});
  return *this;
}

Evidence& Evidence::soft(std::string node, std::vector<double> distribution) {
  entries_.insert_or_assign(std::move(node), Soft{std::move(distribution)});
  return *this;
}

// ---------------------------------------------------------------------------
// Inference

std::vector<double> infer(const DiscreteNetwork& net, const Evidence& ev) {
  return infer(net, ev, net.name(net.target()));
}

std::vector<double> infer(const DiscreteNetwork& net, const Evidence& ev,
                          std::string_view query_name) {
  const std::size_t query = net.index_of(query_name);
  const std::vector<ResolvedEvidence> resolved = resolve(net, ev);

  std::vector<Factor> factors;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const ConditionalTable& t = net.table(i);
    Factor f;
    f.vars = net.parents(i);
    f.vars.push_back(i);
    for (const std::size_t v : f.vars) f.cards.push_back(net.states(v).size());
    if (resolved[i].soft) {
      f.values = *resolved[i].soft;
    } else {
      f.values.assign(t.values().begin(), t.values().end());
    }
    factors.push_back(std::move(f));
    if (resolved[i].hard) {
      Factor indicator{{i}, {net.states(i).size()}, std::vector<double>(net.states(i).size(), 0.0)};
      indicator.values[*resolved[i].hard] = 1.0;
      factors.push_back(std::move(indicator));
    }
  }

  std::set<std::size_t> remaining;
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (i != query) remaining.insert(i);
  }
  while (!remaining.empty()) {
    // Greedy min-size elimination; ties go to the lower node index.
    std::size_t best_var = *remaining.begin();
    std::size_t best_size = static_cast<std::size_t>(-1);
    for (const std::size_t v : remaining) {
      std::vector<const Factor*> involved;
      for (const Factor& f : factors) {
        if (f.has(v)) involved.push_back(&f);
      }
      const std::size_t size = product_size(involved);
      if (size < best_size) {
        best_size = size;
        best_var = v;
      }
    }
    remaining.erase(best_var);

    std::vector<Factor> kept;
    std::optional<Factor> product;
    for (Factor& f : factors) {
      if (!f.has(best_var)) {
        kept.push_back(std::move(f));
      } else {
        product = product ? multiply(*product, f) : std::move(f);
      }
    }
    if (product) kept.push_back(sum_out(*product, best_var));
    factors = std::move(kept);
  }

  Factor result{{query}, {net.states(query).size()},
                std::vector<double>(net.states(query).size(), 1.0)};
  for (const Factor& f : factors) result = multiply(result, f);

  const double z = std::accumulate(result.values.begin(), result.values.end(), 0.0);
  if (!(z > 0.0)) fail_validation("evidence has probability zero");
  for (double& v : result.values) v /= z;
  return result.values;
}

std::vector<double> JointDistribution::marginal(std::size_t node) const {
  std::size_t inner = 1;
  for (std::size_t i = node + 1; i < cards.size(); ++i) inner *= cards[i];
  std::vector<double> out(cards[node], 0.0);
  for (std::size_t k = 0; k < probabilities.size(); ++k) {
    out[(k / inner) % cards[node]] += probabilities[k];
  }
  return out;
}

JointDistribution enumerate_joint(const DiscreteNetwork& net, const Evidence& ev) {
  const std::vector<ResolvedEvidence> resolved = resolve(net, ev);
  JointDistribution joint;
  std::size_t size = 1;
  for (std::size_t i = 0; i < net.size(); ++i) {
    joint.cards.push_back(net.states(i).size());
    size *= joint.cards.back();
    if (size > kMaxJointSize) {
      fail_validation("joint distribution exceeds the enumeration cap of " +
                      std::to_string(kMaxJointSize) + " entries");
    }
  }

  joint.probabilities.assign(size, 0.0);
  std::vector<std::size_t> assignment(net.size(), 0);
  std::vector<std::size_t> parent_states;
  double z = 0.0;
  for (std::size_t k = 0; k < size; ++k) {
    std::size_t rest = k;
    for (std::size_t i = net.size(); i-- > 0;) {
      assignment[i] = rest % joint.cards[i];
      rest /= joint.cards[i];
    }
    double p = 1.0;
    for (std::size_t i = 0; i < net.size() && p > 0.0; ++i) {
      if (resolved[i].hard && *resolved[i].hard != assignment[i]) {
        p = 0.0;
      } else if (resolved[i].soft) {
        p *= (*resolved[i].soft)[assignment[i]];
      } else {
        parent_states.clear();
        for (const std::size_t par : net.parents(i)) parent_states.push_back(assignment[par]);
        const ConditionalTable& t = net.table(i);
        p *= t.row(t.row_index(parent_states))[assignment[i]];
      }
    }
    joint.probabilities[k] = p;
    z += p;
  }
  if (!(z > 0.0)) fail_validation("evidence has probability zero");
  for (double& v : joint.probabilities) v /= z;
  return joint;
}

}  // namespace floodprio::bn
