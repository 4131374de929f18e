#pragma once

// Reduced-error-pruning decision tree: information-gain splits grown on one
// partition of the training rows, then pruned bottom-up against the rest.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "driverid/feature_matrix.hpp"
#include "driverid/models.hpp"

namespace driverid::tree {

struct Node {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // row[feature] <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::vector<double> counts;  // grow-partition class counts reaching the node

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const Node&) const = default;
};

struct PruneResult {
  std::size_t errors_before = 0;
  std::size_t errors_after = 0;
  std::size_t nodes_before = 0;
  std::size_t nodes_after = 0;
};

class DecisionTree;

/// Bottom-up: a subtree becomes a leaf whenever that does not raise the
/// number of `prune_rows` it misclassifies.
PruneResult reduced_error_prune(DecisionTree& tree, const FeatureMatrix& x, std::span<const std::size_t> y,
                                std::span<const std::size_t> prune_rows);

class DecisionTree {
 public:
  DecisionTree() = default;
  /// Node 0 is the root. Throws Error{ModelFormat} on dangling children.
  DecisionTree(std::size_t classes, std::vector<Node> nodes);

  std::size_t classes() const noexcept { return classes_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t leaf_count() const noexcept;
  std::size_t depth() const noexcept;

  std::size_t leaf_for(std::span<const double> row) const noexcept;
  /// Majority grow-partition class at the leaf, lowest index on ties.
  std::size_t predict(std::span<const double> row) const noexcept;
  std::vector<double> distribution(std::span<const double> row) const;

  /// Misclassified rows among `rows`.
  std::size_t errors(const FeatureMatrix& x, std::span<const std::size_t> y, std::span<const std::size_t> rows) const;

  /// Turns node `index` into a leaf and drops the now unreachable nodes.
  void collapse(std::size_t index);

  bool operator==(const DecisionTree&) const = default;

 private:
  friend PruneResult reduced_error_prune(DecisionTree&, const FeatureMatrix&, std::span<const std::size_t>,
                                         std::span<const std::size_t>);
  void compact();

  std::size_t classes_ = 0;
  std::vector<Node> nodes_;
};

DecisionTree grow(const FeatureMatrix& x, std::span<const std::size_t> y, std::size_t classes,
                  std::span<const std::size_t> rows, const RepTreeConfig& config);

struct GrowPruneSplit {
  std::vector<std::size_t> grow;
  std::vector<std::size_t> prune;
};

/// Stratified, seeded hold-out of about `prune_fraction` of each class.
/// Every class keeps at least one grow row.
GrowPruneSplit split_grow_prune(std::span<const std::size_t> y, std::size_t classes, double prune_fraction,
                                std::uint64_t seed);

}  // namespace driverid::tree
