#include "typetree/index_order.hpp"

#include <algorithm>
#include <string>

#include "typetree/error.hpp"

namespace typetree {

int pair_index(int k, int j1, int j2) {
  if (j1 > j2) std::swap(j1, j2);
  if (j1 < 0 || j2 >= k) fail(ErrorKind::parameter, "type index out of range");
  // rows j1 = 0..j1-1 contribute k, k-1, ... entries
  return j1 * k - j1 * (j1 - 1) / 2 + (j2 - j1);
}

std::array<int, 2> pair_at(int k, int pos) {
  for (int j1 = 0; j1 < k; ++j1) {
    int row = k - j1;
    if (pos < row) return {j1, j1 + pos};
    pos -= row;
  }
  fail(ErrorKind::parameter, "pair position out of range");
}

IndexOrder::IndexOrder(int k, Ordering ordering) : k_(k), ordering_(ordering) {}

IndexOrder IndexOrder::generic(int k) {
  if (k < 1) fail(ErrorKind::parameter, "k must be >= 1");
  IndexOrder o(k, Ordering::generic_lex);
  int m = num_pairs(k);
  for (int l = 0; l < k; ++l)
    for (int p = 0; p < m; ++p) {
      auto [a, b] = pair_at(k, p);
      o.cherries_.push_back({l, a, b});
    }
  for (int l = 0; l < k; ++l)
    for (int j = 0; j < k; ++j) o.pendants_.push_back({l, j});
  o.cherry_pos_.resize(o.cherries_.size());
  o.pendant_pos_.resize(o.pendants_.size());
  for (size_t i = 0; i < o.cherries_.size(); ++i) o.cherry_pos_[i] = static_cast<int>(i);
  for (size_t i = 0; i < o.pendants_.size(); ++i) o.pendant_pos_[i] = static_cast<int>(i);
  return o;
}

IndexOrder IndexOrder::paper_k2() {
  IndexOrder o(2, Ordering::paper_k2);
  o.cherries_ = {{0, 0, 0}, {0, 0, 1}, {0, 1, 1}, {1, 1, 1}, {1, 0, 1}, {1, 0, 0}};
  o.pendants_ = {{0, 0}, {0, 1}, {1, 1}, {1, 0}};
  o.cherry_pos_.assign(6, -1);
  o.pendant_pos_.assign(4, -1);
  for (int i = 0; i < 6; ++i) {
    auto [l, a, b] = o.cherries_[i];
    o.cherry_pos_[l * 3 + pair_index(2, a, b)] = i;
  }
  for (int i = 0; i < 4; ++i) {
    auto [l, m] = o.pendants_[i];
    o.pendant_pos_[l * 2 + m] = i;
  }
  return o;
}

IndexOrder IndexOrder::make(int k, Ordering ordering) {
  if (ordering == Ordering::paper_k2) {
    if (k != 2) fail(ErrorKind::parameter, "paper_k2 ordering requires k = 2");
    return paper_k2();
  }
  return generic(k);
}

int IndexOrder::cherry_index(int l, int j1, int j2) const {
  if (l < 0 || l >= k_) fail(ErrorKind::parameter, "branch type out of range");
  return cherry_pos_[l * num_pairs(k_) + pair_index(k_, j1, j2)];
}

int IndexOrder::pendant_index(int l, int m) const {
  if (l < 0 || l >= k_ || m < 0 || m >= k_) fail(ErrorKind::parameter, "pendant type out of range");
  return pendant_pos_[l * k_ + m];
}

const char* to_string(Ordering o) { return o == Ordering::paper_k2 ? "paper_k2" : "generic_lex"; }

}  // namespace typetree
