#include "driverid/rep_tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "driverid/error.hpp"
#include "model_impl.hpp"
#include "random.hpp"

namespace driverid::tree {
namespace {

// n*log(n) - sum c*log(c): n times the entropy (in nats) of a count vector.
double scaled_entropy(std::span<const double> counts, double n) {
  if (n <= 0.0) return 0.0;
  double s = n * std::log(n);
  for (double c : counts) {
    if (c > 0.0) s -= c * std::log(c);
  }
  return s;
}

std::size_t majority(const std::vector<double>& counts) { return argmax(counts); }

struct GrowTask {
  std::size_t node;
  std::size_t depth;
  std::vector<std::vector<std::uint32_t>> sorted;  // per feature, rows ordered by value
};

}  // namespace

DecisionTree::DecisionTree(std::size_t classes, std::vector<Node> nodes) : classes_(classes), nodes_(std::move(nodes)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.counts.size() != classes_) throw Error(ErrorCode::ModelFormat, detail::kModelsModule, "node count width");
    if (n.is_leaf()) continue;
    for (auto child : {n.left, n.right}) {
      if (child <= static_cast<std::int32_t>(i) || child >= static_cast<std::int32_t>(nodes_.size())) {
        throw Error(ErrorCode::ModelFormat, detail::kModelsModule, "tree child index out of order");
      }
    }
  }
}

std::size_t DecisionTree::leaf_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

std::size_t DecisionTree::depth() const noexcept {
  if (nodes_.empty()) return 0;
  // Children always follow their parent, so one forward pass suffices.
  std::vector<std::size_t> level(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    deepest = std::max(deepest, level[i]);
    if (!n.is_leaf()) {
      level[static_cast<std::size_t>(n.left)] = level[i] + 1;
      level[static_cast<std::size_t>(n.right)] = level[i] + 1;
    }
  }
  return deepest;
}

std::size_t DecisionTree::leaf_for(std::span<const double> row) const noexcept {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return i;
}

std::size_t DecisionTree::predict(std::span<const double> row) const noexcept {
  return majority(nodes_[leaf_for(row)].counts);
}

std::vector<double> DecisionTree::distribution(std::span<const double> row) const {
  std::vector<double> d = nodes_[leaf_for(row)].counts;
  const double total = std::accumulate(d.begin(), d.end(), 0.0);
  for (auto& v : d) v /= total;
  return d;
}

std::size_t DecisionTree::errors(const FeatureMatrix& x, std::span<const std::size_t> y,
                                 std::span<const std::size_t> rows) const {
  std::size_t e = 0;
  for (auto r : rows) e += predict(x.row(r)) != y[r] ? 1 : 0;
  return e;
}

void DecisionTree::collapse(std::size_t index) {
  auto& n = nodes_.at(index);
  n.feature = -1;
  n.threshold = 0.0;
  n.left = n.right = -1;
  compact();
}

// Renumbers reachable nodes in pre-order, which keeps children after parents.
void DecisionTree::compact() {
  std::vector<Node> out;
  out.reserve(nodes_.size());
  std::vector<std::pair<std::size_t, std::int64_t>> stack{{0, -1}};  // (old index, new parent slot)
  while (!stack.empty()) {
    auto [old, link] = stack.back();
    stack.pop_back();
    const std::size_t fresh = out.size();
    out.push_back(nodes_[old]);
    if (link >= 0) {
      auto parent = static_cast<std::size_t>(link >> 1);
      if ((link & 1) == 0) out[parent].left = static_cast<std::int32_t>(fresh);
      else out[parent].right = static_cast<std::int32_t>(fresh);
    }
    const auto& n = nodes_[old];
    if (!n.is_leaf()) {
      stack.push_back({static_cast<std::size_t>(n.right), static_cast<std::int64_t>(fresh << 1 | 1)});
      stack.push_back({static_cast<std::size_t>(n.left), static_cast<std::int64_t>(fresh << 1)});
    }
  }
  nodes_ = std::move(out);
}

DecisionTree grow(const FeatureMatrix& x, std::span<const std::size_t> y, std::size_t classes,
                  std::span<const std::size_t> rows, const RepTreeConfig& config) {
  if (rows.empty()) throw Error(ErrorCode::EmptyTrainingSet, detail::kModelsModule, "no rows to grow a tree on");
  const std::size_t d = x.cols();
  const std::size_t min_leaf = std::max<std::size_t>(config.min_leaf_count, 1);

  std::vector<Node> nodes(1);
  nodes[0].counts.assign(classes, 0.0);
  for (auto r : rows) nodes[0].counts[y[r]] += 1.0;

  GrowTask root{0, 0, std::vector<std::vector<std::uint32_t>>(d)};
  for (std::size_t f = 0; f < d; ++f) {
    auto& list = root.sorted[f];
    list.reserve(rows.size());
    for (auto r : rows) list.push_back(static_cast<std::uint32_t>(r));
    std::stable_sort(list.begin(), list.end(), [&](std::uint32_t a, std::uint32_t b) { return x.at(a, f) < x.at(b, f); });
  }

  std::vector<char> goes_left(x.rows(), 0);
  std::vector<double> left(classes), right(classes);
  std::vector<GrowTask> stack;
  stack.push_back(std::move(root));
  while (!stack.empty()) {
    GrowTask task = std::move(stack.back());
    stack.pop_back();
    const std::vector<double> counts = nodes[task.node].counts;
    const std::size_t n = task.sorted.empty() ? 0 : task.sorted[0].size();
    const auto nd = static_cast<double>(n);
    const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;
    if (d == 0 || pure || n < 2 * min_leaf || (config.max_depth > 0 && task.depth >= config.max_depth)) continue;

    const double parent = scaled_entropy(counts, nd);
    double best_gain = 1e-9 * nd;
    int best_feature = -1;
    std::size_t best_pos = 0;
    double best_threshold = 0.0;
    for (std::size_t f = 0; f < d; ++f) {
      const auto& list = task.sorted[f];
      std::fill(left.begin(), left.end(), 0.0);
      right = counts;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto cls = y[list[i]];
        left[cls] += 1.0;
        right[cls] -= 1.0;
        const double lo = x.at(list[i], f), hi = x.at(list[i + 1], f);
        if (!(lo < hi)) continue;
        const std::size_t nl = i + 1, nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double children = scaled_entropy(left, static_cast<double>(nl)) +
                                scaled_entropy(right, static_cast<double>(nr));
        const double gain = parent - children;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_pos = i;
          double t = lo + (hi - lo) / 2.0;
          if (!(t < hi)) t = lo;
          best_threshold = t;
        }
      }
    }
    if (best_feature < 0) continue;

    const auto& chosen = task.sorted[static_cast<std::size_t>(best_feature)];
    for (std::size_t i = 0; i < n; ++i) goes_left[chosen[i]] = i <= best_pos ? 1 : 0;

    GrowTask lt{nodes.size(), task.depth + 1, std::vector<std::vector<std::uint32_t>>(d)};
    GrowTask rt{nodes.size() + 1, task.depth + 1, std::vector<std::vector<std::uint32_t>>(d)};
    for (std::size_t f = 0; f < d; ++f) {
      lt.sorted[f].reserve(best_pos + 1);
      rt.sorted[f].reserve(n - best_pos - 1);
      for (auto r : task.sorted[f]) (goes_left[r] ? lt.sorted[f] : rt.sorted[f]).push_back(r);
      std::vector<std::uint32_t>().swap(task.sorted[f]);
    }
    Node ln, rn;
    ln.counts.assign(classes, 0.0);
    rn.counts.assign(classes, 0.0);
    for (auto r : lt.sorted[0]) ln.counts[y[r]] += 1.0;
    for (auto r : rt.sorted[0]) rn.counts[y[r]] += 1.0;
    auto& parent_node = nodes[task.node];
    parent_node.feature = best_feature;
    parent_node.threshold = best_threshold;
    parent_node.left = static_cast<std::int32_t>(lt.node);
    parent_node.right = static_cast<std::int32_t>(rt.node);
    nodes.push_back(std::move(ln));
    nodes.push_back(std::move(rn));
    stack.push_back(std::move(rt));
    stack.push_back(std::move(lt));
  }
  return DecisionTree(classes, std::move(nodes));
}

PruneResult reduced_error_prune(DecisionTree& tree, const FeatureMatrix& x, std::span<const std::size_t> y,
                                std::span<const std::size_t> prune_rows) {
  PruneResult result;
  result.nodes_before = tree.node_count();
  result.errors_before = tree.errors(x, y, prune_rows);

  auto nodes = tree.nodes();
  const std::size_t k = tree.classes();
  std::vector<double> reach(nodes.size() * k, 0.0);
  for (auto r : prune_rows) {
    auto row = x.row(r);
    std::size_t i = 0;
    for (;;) {
      reach[i * k + y[r]] += 1.0;
      const auto& n = nodes[i];
      if (n.is_leaf()) break;
      i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
  }

  // Children have larger indices than parents: a reverse sweep is post-order.
  std::vector<double> subtree_errors(nodes.size(), 0.0);
  for (std::size_t i = nodes.size(); i-- > 0;) {
    auto& n = nodes[i];
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) total += reach[i * k + c];
    const double as_leaf = total - reach[i * k + majority(n.counts)];
    if (n.is_leaf()) {
      subtree_errors[i] = as_leaf;
      continue;
    }
    const double below = subtree_errors[static_cast<std::size_t>(n.left)] + subtree_errors[static_cast<std::size_t>(n.right)];
    if (as_leaf <= below) {
      n.feature = -1;
      n.threshold = 0.0;
      n.left = n.right = -1;
      subtree_errors[i] = as_leaf;
    } else {
      subtree_errors[i] = below;
    }
  }
  tree.nodes_ = std::move(nodes);
  tree.compact();

  result.nodes_after = tree.node_count();
  result.errors_after = tree.errors(x, y, prune_rows);
  return result;
}

GrowPruneSplit split_grow_prune(std::span<const std::size_t> y, std::size_t classes, double prune_fraction,
                                std::uint64_t seed) {
  if (!(prune_fraction > 0.0 && prune_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, detail::kModelsModule, "pruning fraction must lie in (0, 1)");
  }
  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
  std::mt19937_64 rng(seed);
  GrowPruneSplit split;
  for (auto& members : by_class) {
    if (members.empty()) continue;
    detail::seeded_shuffle(members, rng);
    auto n_prune = static_cast<std::size_t>(std::floor(static_cast<double>(members.size()) * prune_fraction));
    n_prune = std::min(n_prune, members.size() - 1);
    split.prune.insert(split.prune.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_prune));
    split.grow.insert(split.grow.end(), members.begin() + static_cast<std::ptrdiff_t>(n_prune), members.end());
  }
  std::sort(split.grow.begin(), split.grow.end());
  std::sort(split.prune.begin(), split.prune.end());
  return split;
}

}  // namespace driverid::tree

namespace driverid::detail {

TrainedModel train_rep_tree(const FeatureMatrix& data, const EncodedLabels& enc, const ModelConfig& config) {
  const auto split = tree::split_grow_prune(enc.y, enc.classes.size(), config.rep_tree.pruning_fraction, config.seed);
  auto t = tree::grow(data, enc.y, enc.classes.size(), split.grow, config.rep_tree);
  tree::PruneResult pr{0, 0, t.node_count(), t.node_count()};
  if (!split.prune.empty()) pr = tree::reduced_error_prune(t, data, enc.y, split.prune);

  auto meta = base_metadata(ModelKind::RepTree, config, data.rows());
  meta["grow_rows"] = split.grow.size();
  meta["prune_rows"] = split.prune.size();
  meta["nodes_before_pruning"] = pr.nodes_before;
  meta["nodes_after_pruning"] = pr.nodes_after;
  meta["prune_errors_before"] = pr.errors_before;
  meta["prune_errors_after"] = pr.errors_after;
  meta["depth"] = t.depth();
  meta["leaves"] = t.leaf_count();
  return std::make_shared<RepTreeModel>(enc.classes, data.cols(), std::move(meta), std::move(t));
}

}  // namespace driverid::detail
