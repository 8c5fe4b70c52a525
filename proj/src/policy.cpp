#include "uaeoss/policy.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>

namespace uaeoss {

namespace {

constexpr double kTistConstant = 1e-6;

const char* kFunctionNames[kFunctionCount] = {"+", "-", "*", "/", "max", "min", "sin"};
const char* kTerminalNames[kTerminalCount] = {"RP",  "RPPU", "EMC", "EMO", "RMP",
                                              "CT",  "TIST", "RTP", "FR",  "RR"};

}  // namespace

int arity(FunctionKind fn) { return fn == FunctionKind::Sin ? 1 : 2; }

std::string to_string(FunctionKind fn) { return kFunctionNames[static_cast<int>(fn)]; }

std::string to_string(TerminalKind term) { return kTerminalNames[static_cast<int>(term)]; }

double FeatureVector::value(TerminalKind term) const {
  switch (term) {
    case TerminalKind::RP: return rp;
    case TerminalKind::RPPU: return rppu;
    case TerminalKind::EMC: return emc;
    case TerminalKind::EMO: return emo;
    case TerminalKind::RMP: return rmp;
    case TerminalKind::CT: return ct;
    case TerminalKind::TIST: return tist;
    case TerminalKind::RTP: return rtp;
    case TerminalKind::FR: return fr;
    case TerminalKind::RR: return rr;
  }
  return 0.0;
}

std::unique_ptr<PolicyNode> PolicyNode::clone() const {
  auto copy = std::make_unique<PolicyNode>();
  copy->kind = kind;
  copy->fn = fn;
  copy->terminal = terminal;
  copy->value = value;
  copy->children.reserve(children.size());
  for (const auto& child : children) {
    copy->children.push_back(child->clone());
  }
  return copy;
}

PolicyTree::PolicyTree(const PolicyTree& other)
    : root_(other.root_ ? other.root_->clone() : nullptr) {}

PolicyTree& PolicyTree::operator=(const PolicyTree& other) {
  if (this != &other) root_ = other.root_ ? other.root_->clone() : nullptr;
  return *this;
}

PolicyTree PolicyTree::terminal(TerminalKind term) {
  auto node = std::make_unique<PolicyNode>();
  node->kind = PolicyNode::Kind::Terminal;
  node->terminal = term;
  return PolicyTree(std::move(node));
}

PolicyTree PolicyTree::constant(double value) {
  auto node = std::make_unique<PolicyNode>();
  node->kind = PolicyNode::Kind::Constant;
  node->value = value;
  return PolicyTree(std::move(node));
}

PolicyTree PolicyTree::function(FunctionKind fn, std::vector<PolicyTree> children) {
  auto node = std::make_unique<PolicyNode>();
  node->kind = PolicyNode::Kind::Function;
  node->fn = fn;
  for (auto& child : children) {
    node->children.push_back(child.root_ ? std::move(child.root_) : nullptr);
  }
  return PolicyTree(std::move(node));
}

namespace {

int node_depth(const PolicyNode& node) {
  int deepest = 0;
  for (const auto& child : node.children) {
    deepest = std::max(deepest, node_depth(*child));
  }
  return deepest + 1;
}

std::size_t node_size(const PolicyNode& node) {
  std::size_t n = 1;
  for (const auto& child : node.children) n += node_size(*child);
  return n;
}

bool node_equals(const PolicyNode& a, const PolicyNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case PolicyNode::Kind::Function:
      if (a.fn != b.fn || a.children.size() != b.children.size()) return false;
      for (std::size_t i = 0; i < a.children.size(); ++i) {
        if (!node_equals(*a.children[i], *b.children[i])) return false;
      }
      return true;
    case PolicyNode::Kind::Terminal:
      return a.terminal == b.terminal;
    case PolicyNode::Kind::Constant:
      return a.value == b.value;
  }
  return false;
}

}  // namespace

int PolicyTree::depth() const { return root_ ? node_depth(*root_) : 0; }

std::size_t PolicyTree::size() const { return root_ ? node_size(*root_) : 0; }

bool PolicyTree::equals(const PolicyTree& other) const {
  if (!root_ || !other.root_) return root_ == other.root_;
  return node_equals(*root_, *other.root_);
}

double evaluate(const PolicyNode& node, const FeatureVector& features) {
  switch (node.kind) {
    case PolicyNode::Kind::Terminal:
      return features.value(node.terminal);
    case PolicyNode::Kind::Constant:
      return node.value;
    case PolicyNode::Kind::Function:
      break;
  }
  double result = 0.0;
  if (node.fn == FunctionKind::Sin) {
    result = std::sin(evaluate(*node.children[0], features));
  } else {
    const double a = evaluate(*node.children[0], features);
    const double b = evaluate(*node.children[1], features);
    switch (node.fn) {
      case FunctionKind::Add: result = a + b; break;
      case FunctionKind::Sub: result = a - b; break;
      case FunctionKind::Mul: result = a * b; break;
      case FunctionKind::Div: result = a / b; break;
      case FunctionKind::Max: result = std::max(a, b); break;
      case FunctionKind::Min: result = std::min(a, b); break;
      case FunctionKind::Sin: break;
    }
  }
  return std::isfinite(result) ? result : 1.0;
}

double evaluate(const PolicyTree& tree, const FeatureVector& features) {
  return evaluate(tree.root(), features);
}

namespace {

// Min-max normalization over the pool; a zero spread maps everything to the
// neutral 0.5.
void minmax_into(const std::vector<double>& raw, std::vector<double>& out) {
  const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
  const double lo = *lo_it, hi = *hi_it;
  out.resize(raw.size());
  if (hi == lo) {
    std::fill(out.begin(), out.end(), 0.5);
    return;
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out[i] = (raw[i] - lo) / (hi - lo);
  }
}

double finite_or_one(double v) { return std::isfinite(v) ? v : 1.0; }

}  // namespace

std::vector<FeatureVector> compute_features(const DecisionContext& ctx,
                                            std::span<const Candidate> candidates,
                                            const Instance& instance,
                                            const EnvironmentRealization& env) {
  std::vector<FeatureVector> features(candidates.size());
  if (candidates.empty()) return features;

  const std::size_t n = candidates.size();
  std::vector<double> raw(n), rp(n), rppu(n), emc(n);

  for (std::size_t i = 0; i < n; ++i) raw[i] = env.actual_profit[candidates[i].task_index];
  minmax_into(raw, rp);
  for (std::size_t i = 0; i < n; ++i) {
    raw[i] = env.actual_profit[candidates[i].task_index] /
             instance.tasks[candidates[i].task_index].du_s;
  }
  minmax_into(raw, rppu);
  for (std::size_t i = 0; i < n; ++i) {
    raw[i] = instance.expected_rate_units_per_s * instance.tasks[candidates[i].task_index].du_s;
  }
  minmax_into(raw, emc);

  // Window-start rank over the whole instance (FR) and over the open pool
  // (RR); ties break by task id. The pool is already (ws, id)-sorted.
  std::vector<std::size_t> order(instance.task_count());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Task& ta = instance.tasks[a];
    const Task& tb = instance.tasks[b];
    return ta.ws_s != tb.ws_s ? ta.ws_s < tb.ws_s : ta.id < tb.id;
  });
  std::vector<std::size_t> full_rank(instance.task_count());
  for (std::size_t r = 0; r < order.size(); ++r) full_rank[order[r]] = r + 1;

  std::unordered_map<std::size_t, std::size_t> pool_rank;
  pool_rank.reserve(ctx.candidate_pool.size());
  for (std::size_t r = 0; r < ctx.candidate_pool.size(); ++r) {
    pool_rank.emplace(ctx.candidate_pool[r], r + 1);
  }

  const double rmp = finite_or_one(ctx.remaining_memory_units / ctx.mmc_units);
  const double ct = finite_or_one(ctx.t_now_s / ctx.horizon_s);
  const double rtp = static_cast<double>(ctx.candidate_pool.size()) /
                     static_cast<double>(ctx.tasks_total);
  const double pool_n = static_cast<double>(ctx.candidate_pool.size());

  for (std::size_t i = 0; i < n; ++i) {
    const Candidate& cand = candidates[i];
    const Task& task = instance.tasks[cand.task_index];
    FeatureVector& f = features[i];
    f.rp = rp[i];
    f.rppu = rppu[i];
    f.emc = emc[i];
    f.emo = finite_or_one(instance.expected_rate_units_per_s * task.du_s /
                          ctx.remaining_memory_units);
    f.rmp = rmp;
    f.ct = ct;
    f.tist = finite_or_one((cand.earliest_os_s - ctx.t_now_s + kTistConstant) /
                           (ctx.horizon_s - ctx.t_now_s + kTistConstant));
    f.rtp = rtp;
    f.fr = static_cast<double>(full_rank[cand.task_index]) /
           static_cast<double>(instance.task_count());
    const auto it = pool_rank.find(cand.task_index);
    f.rr = it != pool_rank.end() && pool_n > 0.0
               ? static_cast<double>(it->second) / pool_n
               : 1.0;
  }
  return features;
}

PolicyParseError::PolicyParseError(const std::string& message, std::size_t position)
    : std::runtime_error(message + " (at offset " + std::to_string(position) + ")"),
      position_(position) {}

namespace {

void serialize_node(const PolicyNode& node, std::string& out) {
  switch (node.kind) {
    case PolicyNode::Kind::Terminal:
      out += to_string(node.terminal);
      return;
    case PolicyNode::Kind::Constant: {
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof(buf), node.value);
      out.append(buf, res.ptr);
      return;
    }
    case PolicyNode::Kind::Function: {
      out += '(';
      out += to_string(node.fn);
      for (const auto& child : node.children) {
        out += ' ';
        serialize_node(*child, out);
      }
      out += ')';
      return;
    }
  }
}

struct Parser {
  const std::string& text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool at_end() {
    skip_ws();
    return pos >= text.size();
  }

  std::string next_symbol() {
    const std::size_t start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
           text[pos] != '(' && text[pos] != ')') {
      ++pos;
    }
    if (pos == start) throw PolicyParseError("expected a symbol", start);
    return text.substr(start, pos - start);
  }

  std::unique_ptr<PolicyNode> parse_expr() {
    skip_ws();
    if (pos >= text.size()) throw PolicyParseError("unexpected end of input", pos);
    if (text[pos] == '(') {
      const std::size_t open = pos++;
      skip_ws();
      const std::size_t name_pos = pos;
      const std::string name = next_symbol();
      FunctionKind fn;
      if (!lookup_function(name, fn)) {
        throw PolicyParseError("unknown function '" + name + "'", name_pos);
      }
      auto node = std::make_unique<PolicyNode>();
      node->kind = PolicyNode::Kind::Function;
      node->fn = fn;
      for (int i = 0; i < arity(fn); ++i) {
        node->children.push_back(parse_expr());
      }
      skip_ws();
      if (pos >= text.size() || text[pos] != ')') {
        throw PolicyParseError("unbalanced parenthesis", open);
      }
      ++pos;
      return node;
    }
    if (text[pos] == ')') throw PolicyParseError("unexpected ')'", pos);

    const std::size_t sym_pos = pos;
    const std::string sym = next_symbol();
    TerminalKind term;
    if (lookup_terminal(sym, term)) {
      auto node = std::make_unique<PolicyNode>();
      node->kind = PolicyNode::Kind::Terminal;
      node->terminal = term;
      return node;
    }
    double value = 0.0;
    const auto res = std::from_chars(sym.data(), sym.data() + sym.size(), value);
    if (res.ec != std::errc() || res.ptr != sym.data() + sym.size()) {
      throw PolicyParseError("unknown symbol '" + sym + "'", sym_pos);
    }
    auto node = std::make_unique<PolicyNode>();
    node->kind = PolicyNode::Kind::Constant;
    node->value = value;
    return node;
  }

  static bool lookup_function(const std::string& name, FunctionKind& out) {
    for (int i = 0; i < kFunctionCount; ++i) {
      if (name == kFunctionNames[i]) {
        out = static_cast<FunctionKind>(i);
        return true;
      }
    }
    return false;
  }

  static bool lookup_terminal(const std::string& name, TerminalKind& out) {
    for (int i = 0; i < kTerminalCount; ++i) {
      if (name == kTerminalNames[i]) {
        out = static_cast<TerminalKind>(i);
        return true;
      }
    }
    return false;
  }
};

}  // namespace

std::string serialize(const PolicyTree& tree) {
  std::string out;
  if (!tree.empty()) serialize_node(tree.root(), out);
  return out;
}

PolicyTree parse_policy(const std::string& text) {
  Parser parser{text};
  auto node = parser.parse_expr();
  if (!parser.at_end()) {
    throw PolicyParseError("trailing input after expression", parser.pos);
  }
  return PolicyTree(std::move(node));
}

std::vector<PolicyTree> read_policy_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open policy file: " + path);
  std::vector<PolicyTree> trees;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    trees.push_back(parse_policy(line));
  }
  return trees;
}

void write_policy_file(const std::string& path, const std::vector<PolicyTree>& trees) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write policy file: " + path);
  for (const auto& tree : trees) {
    out << serialize(tree) << '\n';
  }
}

void TreePolicy::score(const DecisionContext& ctx, std::span<const Candidate> candidates,
                       const Instance& instance, const EnvironmentRealization& env,
                       std::vector<double>& scores) const {
  const auto features = compute_features(ctx, candidates, instance, env);
  scores.resize(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    scores[i] = evaluate(*tree_, features[i]);
  }
}

}  // namespace uaeoss
