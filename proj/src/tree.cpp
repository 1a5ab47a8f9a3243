#include "vrturn/tree.hpp"

#include <algorithm>
#include <numeric>

#include "vrturn/error.hpp"

namespace vrturn {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr double kGainTolerance = 1e-12;

struct Split {
  int feature = -1;
  double threshold = 0.0;
  std::size_t left_count = 0;
  double score = 0.0;
};

class Builder {
 public:
  Builder(const Eigen::MatrixXd& X, const PresortedColumns& sorted, const std::vector<double>& target,
          const std::vector<double>& weight, const std::vector<std::uint64_t>& keys, const TreeParams& p)
      : X_(X), y_(target), w_(weight), keys_(keys), p_(p), d_(static_cast<std::size_t>(X.cols())) {
    work_.resize(d_);
    for (std::size_t f = 0; f < d_; ++f) {
      work_[f].reserve(sorted.order[f].size());
      for (int r : sorted.order[f]) {
        if (w_[r] > 0.0) work_[f].push_back(r);
      }
    }
    go_left_.assign(static_cast<std::size_t>(X.rows()), 0);
    scratch_.reserve(work_.empty() ? 0 : work_[0].size());
  }

  RegressionTree build() {
    RegressionTree tree;
    if (d_ == 0 || work_[0].empty()) fail(ErrorCode::EmptyTrainingSet, "tree needs at least one weighted row");
    grow(tree, 0, work_[0].size(), 0);
    return tree;
  }

 private:
  double x(int row, std::size_t f) const { return X_(row, static_cast<Eigen::Index>(f)); }

  template <class It>
  double leaf_value(It first, It last) const {
    double W = 0.0, S = 0.0;
    for (auto it = first; it != last; ++it) {
      W += w_[*it];
      S += w_[*it] * y_[*it];
    }
    return S / W;
  }

  template <class It>
  bool pure(It first, It last) const {
    const double y0 = y_[*first];
    return std::all_of(first, last, [&](int r) { return y_[r] == y0; });
  }

  bool splittable(std::size_t count, int depth) const {
    if (p_.max_depth > 0 && depth >= p_.max_depth) return false;
    return count >= p_.min_samples_split && count >= 2 * p_.min_samples_leaf;
  }

  std::vector<std::size_t> candidates(std::size_t begin, std::size_t end, std::uint64_t node_id) const {
    std::vector<std::size_t> out;
    if (p_.max_features == 0 || p_.max_features >= d_) {
      out.resize(d_);
      std::iota(out.begin(), out.end(), std::size_t{0});
      return out;
    }
    std::vector<std::pair<std::uint64_t, std::size_t>> keyed(d_);
    const std::uint64_t node_key = mix(p_.seed ^ mix(node_id));
    for (std::size_t f = 0; f < d_; ++f) keyed[f] = {mix(node_key ^ keys_[f]), f};
    std::sort(keyed.begin(), keyed.end());
    for (const auto& [key, f] : keyed) {
      const auto& col = work_[f];
      if (x(col[begin], f) == x(col[end - 1], f)) continue;
      out.push_back(f);
      if (out.size() == p_.max_features) break;
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  Split best_split(std::size_t begin, std::size_t end, std::uint64_t node_id) const {
    double W = 0.0, S = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const int r = work_[0][i];
      W += w_[r];
      S += w_[r] * y_[r];
    }
    Split best;
    bool found = false;
    const std::size_t count = end - begin;
    for (std::size_t f : candidates(begin, end, node_id)) {
      const auto& col = work_[f];
      double wl = 0.0, sl = 0.0;
      for (std::size_t i = begin; i + 1 < end; ++i) {
        const int r = col[i];
        wl += w_[r];
        sl += w_[r] * y_[r];
        const std::size_t left = i + 1 - begin;
        if (left < p_.min_samples_leaf) continue;
        if (count - left < p_.min_samples_leaf) break;
        const double xa = x(r, f);
        const double xb = x(col[i + 1], f);
        if (!(xa < xb)) continue;
        const double wr = W - wl;
        const double sr = S - sl;
        const double score = sl * sl / wl + sr * sr / wr;
        if (!found || score > best.score + kGainTolerance * std::abs(best.score)) {
          double thr = 0.5 * (xa + xb);
          if (!(thr < xb)) thr = xa;
          best = Split{static_cast<int>(f), thr, left, score};
          found = true;
        }
      }
    }
    return best;
  }

  void partition(std::size_t begin, std::size_t end) {
    for (auto& col : work_) {
      scratch_.clear();
      std::size_t out = begin;
      for (std::size_t i = begin; i < end; ++i) {
        const int r = col[i];
        if (go_left_[r]) {
          col[out++] = r;
        } else {
          scratch_.push_back(r);
        }
      }
      std::copy(scratch_.begin(), scratch_.end(), col.begin() + static_cast<std::ptrdiff_t>(out));
    }
  }

  // Rows of the node are read from work_[col]; only partitioned nodes may
  // split further.
  int grow(RegressionTree& tree, std::size_t begin, std::size_t end, int depth, std::size_t col_index = 0) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const auto& rows = work_[col_index];
    const auto first = rows.begin() + static_cast<std::ptrdiff_t>(begin);
    const auto last = rows.begin() + static_cast<std::ptrdiff_t>(end);
    tree.nodes[id].value = leaf_value(first, last);
    if (col_index != 0 || !splittable(end - begin, depth) || pure(first, last)) return id;

    const Split split = best_split(begin, end, static_cast<std::uint64_t>(id));
    if (split.feature < 0) return id;

    const auto f = static_cast<std::size_t>(split.feature);
    const std::size_t mid = begin + split.left_count;
    std::size_t child_col = f;
    if (splittable(mid - begin, depth + 1) || splittable(end - mid, depth + 1)) {
      const auto& col = work_[f];
      for (std::size_t i = begin; i < end; ++i) go_left_[col[i]] = i < mid ? 1 : 0;
      partition(begin, end);
      child_col = 0;
    }

    tree.nodes[id].feature = split.feature;
    tree.nodes[id].threshold = split.threshold;
    const int left = grow(tree, begin, mid, depth + 1, child_col);
    const int right = grow(tree, mid, end, depth + 1, child_col);
    tree.nodes[id].left = left;
    tree.nodes[id].right = right;
    return id;
  }

  const Eigen::MatrixXd& X_;
  const std::vector<double>& y_;
  const std::vector<double>& w_;
  const std::vector<std::uint64_t>& keys_;
  TreeParams p_;
  std::size_t d_;
  std::vector<std::vector<int>> work_;
  std::vector<char> go_left_;
  std::vector<int> scratch_;
};

}  // namespace

int RegressionTree::apply(const Eigen::MatrixXd& X, Eigen::Index row) const {
  int i = 0;
  while (nodes[i].feature >= 0) {
    i = X(row, nodes[i].feature) <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  }
  return i;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

PresortedColumns::PresortedColumns(const Eigen::MatrixXd& X) {
  order.resize(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index f = 0; f < X.cols(); ++f) {
    auto& o = order[static_cast<std::size_t>(f)];
    o.resize(static_cast<std::size_t>(X.rows()));
    std::iota(o.begin(), o.end(), 0);
    std::sort(o.begin(), o.end(), [&](int a, int b) {
      const double xa = X(a, f), xb = X(b, f);
      return xa < xb || (xa == xb && a < b);
    });
  }
}

RegressionTree build_tree(const Eigen::MatrixXd& X, const PresortedColumns& sorted, const std::vector<double>& target,
                          const std::vector<double>& weight, const std::vector<std::uint64_t>& feature_keys,
                          const TreeParams& params) {
  const auto n = static_cast<std::size_t>(X.rows());
  if (target.size() != n || weight.size() != n || feature_keys.size() != static_cast<std::size_t>(X.cols()) ||
      sorted.order.size() != feature_keys.size())
    fail(ErrorCode::Internal, "build_tree: inconsistent input sizes");
  Builder b(X, sorted, target, weight, feature_keys, params);
  return b.build();
}

}  // namespace vrturn
