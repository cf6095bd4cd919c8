#pragma once

#include <vector>

namespace ddcrp {

/// Customer links c: customer i sits with customer links[i] (self-links allowed).
struct LinkState {
  std::vector<int> links;

  static LinkState self_links(int n);
  [[nodiscard]] int size() const { return static_cast<int>(links.size()); }
  bool operator==(const LinkState&) const = default;
};

/// Partition induced by a link state: connected components of the undirected
/// link graph, numbered by their smallest member.
struct TableAssignment {
  std::vector<int> table_of;
  int n_tables = 0;
  std::vector<std::vector<int>> members;  // sorted ascending

  bool operator==(const TableAssignment&) const = default;
};

TableAssignment tables_from_links(const LinkState& links);

struct RemovalResult {
  TableAssignment assignment;
  bool split = false;
};

/// Partition after customer i's link is replaced by a self-link.
RemovalResult remove_link(const LinkState& links, int i, const TableAssignment& current);

/// Builds the canonical assignment from an arbitrary table labelling.
TableAssignment canonical_assignment(const std::vector<int>& table_of);

}  // namespace ddcrp
