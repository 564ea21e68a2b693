#include "faqai/dominance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "faqai/errors.hpp"

namespace faqai {

namespace {
constexpr size_t kScanLeaf = 8;
}

struct DominanceIndex::Data {
  Semiring sr;
  int k;
  std::vector<Cmp> strict;
  std::vector<double> coords;
  std::vector<SVal> weights;
  SVal total;
};

// One level sorts its points on coordinate `dim`. The last coordinate keeps suffix
// aggregates; earlier ones keep a segment tree whose nodes own a level on dim + 1.
struct DominanceIndex::Level {
  struct Node {
    size_t lo, hi;
    int left = -1, right = -1;
    std::unique_ptr<Level> sub;  // null for scan leaves
  };

  const Data* idx;
  int dim;
  std::vector<int> ids;
  std::vector<double> keys;
  std::vector<SVal> suffix;
  std::vector<Node> nodes;

  Level(const Data* owner, int d, std::vector<int> points) : idx(owner), dim(d), ids(std::move(points)) {
    const int k = idx->k;
    std::stable_sort(ids.begin(), ids.end(),
                     [&](int a, int b) { return idx->coords[a * k + dim] < idx->coords[b * k + dim]; });
    keys.reserve(ids.size());
    for (int id : ids) keys.push_back(idx->coords[id * k + dim]);
    if (dim == k - 1) {
      suffix.assign(ids.size() + 1, idx->sr.zero());
      for (size_t i = ids.size(); i-- > 0;) suffix[i] = idx->sr.add(idx->weights[ids[i]], suffix[i + 1]);
    } else if (!ids.empty()) {
      build_node(0, ids.size());
    }
  }

  int build_node(size_t lo, size_t hi) {
    int at = static_cast<int>(nodes.size());
    nodes.push_back(Node{lo, hi, -1, -1, nullptr});
    if (hi - lo <= kScanLeaf) return at;
    auto sub = std::make_unique<Level>(idx, dim + 1, std::vector<int>(ids.begin() + lo, ids.begin() + hi));
    size_t mid = lo + (hi - lo) / 2;
    int l = build_node(lo, mid);
    int r = build_node(mid, hi);
    nodes[at].sub = std::move(sub);
    nodes[at].left = l;
    nodes[at].right = r;
    return at;
  }

  size_t first_dominating(double q) const {
    if (idx->strict[dim] == Cmp::Le) return std::lower_bound(keys.begin(), keys.end(), q) - keys.begin();
    return std::upper_bound(keys.begin(), keys.end(), q) - keys.begin();
  }

  bool dominated_from(int id, const double* q, int from) const {
    const int k = idx->k;
    for (int d = from; d < k; ++d) {
      double p = idx->coords[id * k + d];
      if (idx->strict[d] == Cmp::Le ? !(q[d] <= p) : !(q[d] < p)) return false;
    }
    return true;
  }

  void query(const double* q, SVal& acc) const {
    if (ids.empty()) return;
    size_t start = first_dominating(q[dim]);
    if (dim == idx->k - 1) {
      idx->sr.add_into(acc, suffix[start]);
      return;
    }
    collect(0, start, q, acc);
  }

  void collect(int at, size_t start, const double* q, SVal& acc) const {
    const Node& node = nodes[at];
    if (start >= node.hi) return;
    if (!node.sub) {
      for (size_t i = std::max(start, node.lo); i < node.hi; ++i)
        if (dominated_from(ids[i], q, dim + 1)) idx->sr.add_into(acc, idx->weights[ids[i]]);
      return;
    }
    if (start <= node.lo) {
      node.sub->query(q, acc);
      return;
    }
    collect(node.left, start, q, acc);
    collect(node.right, start, q, acc);
  }
};

DominanceIndex::DominanceIndex(Semiring s, int k, std::vector<Cmp> strictness)
    : data_(std::make_unique<Data>(Data{s, k, std::move(strictness), {}, {}, s.zero()})) {
  if (k < 1) throw StructuralError("dominance index dimension must be at least 1");
  if (static_cast<int>(data_->strict.size()) != k) throw StructuralError("strictness vector does not match dimension");
}

DominanceIndex::DominanceIndex(DominanceIndex&&) noexcept = default;
DominanceIndex& DominanceIndex::operator=(DominanceIndex&&) noexcept = default;
DominanceIndex::~DominanceIndex() = default;

size_t DominanceIndex::size() const { return data_->weights.size(); }
int DominanceIndex::dimension() const { return data_->k; }
const SVal& DominanceIndex::total() const { return data_->total; }

DominanceIndex DominanceIndex::build(const Semiring& s, int k, std::vector<double> coords, std::vector<SVal> weights,
                                     std::vector<Cmp> strictness) {
  DominanceIndex idx(s, k, std::move(strictness));
  Data& d = *idx.data_;
  if (coords.size() != weights.size() * static_cast<size_t>(k)) {
    throw StructuralError("dominance index points do not all have dimension " + std::to_string(k));
  }
  for (double c : coords)
    if (!std::isfinite(c)) throw StructuralError("dominance index coordinates must be finite");
  for (const auto& w : weights) s.add_into(d.total, w);
  d.coords = std::move(coords);
  d.weights = std::move(weights);
  std::vector<int> ids(d.weights.size());
  std::iota(ids.begin(), ids.end(), 0);
  idx.root_ = std::make_unique<Level>(idx.data_.get(), 0, std::move(ids));
  return idx;
}

SVal DominanceIndex::query(const std::vector<double>& q) const {
  if (static_cast<int>(q.size()) != data_->k) throw StructuralError("query dimension mismatch");
  return query(q.data());
}

SVal DominanceIndex::query(const double* q) const {
  SVal acc = data_->sr.zero();
  if (root_) root_->query(q, acc);
  return acc;
}

}  // namespace faqai
