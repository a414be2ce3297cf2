#pragma once

#include <algorithm>
#include <vector>

#include "npmix/error.hpp"

namespace npmix {

/// Surjective map from L mixture components onto K groups.
///
/// Groups are 0-based internally; files and reports use 1-based labels.
class Assignment {
 public:
  Assignment(std::vector<int> map, int groups) : map_(std::move(map)), groups_(groups) {
    if (groups_ < 1) throw InvalidArgument("Assignment: need at least one group");
    std::vector<bool> seen(groups_, false);
    for (int g : map_) {
      if (g < 0 || g >= groups_) throw InvalidArgument("Assignment: group index out of range");
      seen[g] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
      throw InvalidArgument("Assignment: every group must be non-empty");
  }

  /// Infers K as 1 + the largest group index.
  explicit Assignment(std::vector<int> map)
      : Assignment(map, map.empty() ? 0 : *std::max_element(map.begin(), map.end()) + 1) {}

  static Assignment identity(int size) {
    std::vector<int> map(size);
    for (int i = 0; i < size; ++i) map[i] = i;
    return Assignment(std::move(map), size);
  }

  static Assignment constant(int size) {
    return Assignment(std::vector<int>(size, 0), 1);
  }

  int size() const { return static_cast<int>(map_.size()); }
  int groups() const { return groups_; }
  int operator[](int i) const { return map_[i]; }
  const std::vector<int>& map() const { return map_; }

  /// Indices of the components in group k, ascending.
  std::vector<int> members(int k) const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
      if (map_[i] == k) out.push_back(i);
    return out;
  }

  /// Relabels groups in order of first occurrence.
  Assignment canonical() const { return Assignment(canonical_labels(map_), groups_); }

  /// True when both maps induce the same partition.
  bool same_partition(const Assignment& other) const {
    return groups_ == other.groups_ && canonical_labels(map_) == canonical_labels(other.map_);
  }

  bool operator==(const Assignment&) const = default;

  static std::vector<int> canonical_labels(const std::vector<int>& labels) {
    std::vector<int> out(labels.size());
    std::vector<std::pair<int, int>> seen;  // (original, new)
    for (std::size_t i = 0; i < labels.size(); ++i) {
      auto it = std::find_if(seen.begin(), seen.end(),
                             [&](const auto& p) { return p.first == labels[i]; });
      if (it == seen.end()) {
        seen.emplace_back(labels[i], static_cast<int>(seen.size()));
        out[i] = seen.back().second;
      } else {
        out[i] = it->second;
      }
    }
    return out;
  }

 private:
  std::vector<int> map_;
  int groups_;
};

}  // namespace npmix
