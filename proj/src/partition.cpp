#include "ddcrp/partition.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace ddcrp {

LinkState LinkState::self_links(int n) {
  LinkState s;
  s.links.resize(static_cast<size_t>(n));
  std::iota(s.links.begin(), s.links.end(), 0);
  return s;
}

TableAssignment canonical_assignment(const std::vector<int>& table_of) {
  TableAssignment out;
  out.table_of.assign(table_of.size(), -1);
  std::vector<int> remap;
  for (size_t i = 0; i < table_of.size(); ++i) {
    const int t = table_of[i];
    if (t < 0) throw std::invalid_argument("canonical_assignment: negative table id");
    if (static_cast<size_t>(t) >= remap.size()) remap.resize(static_cast<size_t>(t) + 1, -1);
    if (remap[static_cast<size_t>(t)] < 0) {
      remap[static_cast<size_t>(t)] = out.n_tables++;
      out.members.emplace_back();
    }
    const int k = remap[static_cast<size_t>(t)];
    out.table_of[i] = k;
    out.members[static_cast<size_t>(k)].push_back(static_cast<int>(i));
  }
  return out;
}

TableAssignment tables_from_links(const LinkState& state) {
  const int n = state.size();
  std::vector<int> parent(static_cast<size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < n; ++i) {
    const int j = state.links[static_cast<size_t>(i)];
    if (j < 0 || j >= n) throw std::invalid_argument("tables_from_links: link out of range");
    const int a = find(i), b = find(j);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<int> root(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) root[i] = find(i);
  // scanning customers in index order numbers tables by smallest member
  return canonical_assignment(root);
}

RemovalResult remove_link(const LinkState& state, int i, const TableAssignment& current) {
  const int n = state.size();
  if (i < 0 || i >= n) throw std::invalid_argument("remove_link: customer out of range");
  const int old = state.links[static_cast<size_t>(i)];
  if (old == i) return {current, false};

  LinkState without = state;
  without.links[static_cast<size_t>(i)] = i;
  RemovalResult result{tables_from_links(without), false};
  result.split = result.assignment.table_of[static_cast<size_t>(i)] != result.assignment.table_of[static_cast<size_t>(old)];
  return result;
}

}  // namespace ddcrp
