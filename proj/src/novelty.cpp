#include "crsail/novelty.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace crsail {

std::string to_string(NoveltyBackend backend) {
  return backend == NoveltyBackend::kBruteForce ? "brute_force" : "kd_tree";
}

NoveltyBackend parse_novelty_backend(const std::string& text) {
  if (text == "brute_force") return NoveltyBackend::kBruteForce;
  if (text == "kd_tree") return NoveltyBackend::kKdTree;
  throw ConfigError("unknown novelty backend '" + text + "' (expected brute_force or kd_tree)");
}

void NoveltyConfig::validate() const {
  if (k < 1) throw ConfigError("novelty: K must be >= 1");
}

namespace {

// Scalar loop in a fixed order; both backends go through here.
inline double squared_distance(const double* a, const double* b, int dim) {
  double sum = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return sum;
}

// Max-heap holding the k smallest squared distances seen so far.
class KSmallest {
 public:
  explicit KSmallest(int k) : k_(static_cast<std::size_t>(k)) {}
  void offer(double d2) {
    if (heap_.size() < k_) {
      heap_.push(d2);
    } else if (d2 < heap_.top()) {
      heap_.pop();
      heap_.push(d2);
    }
  }
  bool full() const { return heap_.size() == k_; }
  double worst() const { return heap_.top(); }

 private:
  std::size_t k_;
  std::priority_queue<double> heap_;
};

constexpr int kLeafSize = 16;

}  // namespace

struct NoveltyIndex::KdTree {
  struct Node {
    int begin = 0, end = 0;  // range in `order`
    int split_dim = -1;      // -1 for leaves
    double split_value = 0.0;
    int left = -1, right = -1;
  };

  std::vector<int> order;
  std::vector<Node> nodes;
  const double* points = nullptr;
  int dim = 0;

  KdTree(const std::vector<double>& pts, int d, int n) : points(pts.data()), dim(d) {
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
    nodes.reserve(2 * (n / kLeafSize + 1));
    build(0, n);
  }

  double coord(int idx, int axis) const { return points[static_cast<std::size_t>(idx) * dim + axis]; }

  int build(int begin, int end) {
    const int id = static_cast<int>(nodes.size());
    nodes.push_back({begin, end});
    if (end - begin <= kLeafSize) return id;

    int axis = 0;
    double best_spread = -1.0;
    for (int a = 0; a < dim; ++a) {
      double lo = coord(order[begin], a), hi = lo;
      for (int i = begin + 1; i < end; ++i) {
        lo = std::min(lo, coord(order[i], a));
        hi = std::max(hi, coord(order[i], a));
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        axis = a;
      }
    }
    if (best_spread <= 0.0) return id;  // all points identical: keep as leaf

    const int mid = begin + (end - begin) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                     [&](int a, int b) { return coord(a, axis) < coord(b, axis); });
    nodes[id].split_dim = axis;
    nodes[id].split_value = coord(order[mid], axis);
    // left: [begin, mid) has coord <= split; right: [mid, end) has coord >= split
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes[id].left = left;
    nodes[id].right = right;
    return id;
  }

  void search(int node_id, const double* query, KSmallest& best) const {
    const Node& node = nodes[node_id];
    if (node.split_dim < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        best.offer(squared_distance(query, points + static_cast<std::size_t>(order[i]) * dim, dim));
      }
      return;
    }
    const double diff = query[node.split_dim] - node.split_value;
    const int near = diff <= 0.0 ? node.left : node.right;
    const int far = diff <= 0.0 ? node.right : node.left;
    search(near, query, best);
    // Every point across the plane is at least |diff| away along this axis.
    if (!best.full() || diff * diff <= best.worst()) search(far, query, best);
  }
};

NoveltyIndex::NoveltyIndex(const ExpertDataset& dataset, const NoveltyConfig& config)
    : config_(config) {
  config_.validate();
  if (dataset.empty()) throw InsufficientData("novelty index: dataset is empty");
  dim_ = dataset.state_dim();
  size_ = dataset.size();
  if (config_.standardize) {
    standardizer_ = dataset.standardizer().empty() ? Standardizer::fit(dataset.states())
                                                   : dataset.standardizer();
  } else {
    standardizer_ = Standardizer::identity(dim_);
  }
  points_.resize(static_cast<std::size_t>(size_) * dim_);
  for (int i = 0; i < size_; ++i) {
    const State p = standardizer_.apply(dataset.states()[i]);
    std::copy(p.data(), p.data() + dim_, points_.begin() + static_cast<std::ptrdiff_t>(i) * dim_);
  }
  if (config_.backend == NoveltyBackend::kKdTree) {
    tree_ = std::make_unique<KdTree>(points_, dim_, size_);
  }
}

NoveltyIndex::~NoveltyIndex() = default;
NoveltyIndex::NoveltyIndex(NoveltyIndex&&) noexcept = default;
NoveltyIndex& NoveltyIndex::operator=(NoveltyIndex&&) noexcept = default;

State NoveltyIndex::project(const State& x) const {
  if (x.size() != dim_) {
    throw ConfigError("novelty: state has dimension " + std::to_string(x.size()) + ", expected " +
                      std::to_string(dim_));
  }
  return standardizer_.apply(x);
}

double NoveltyIndex::brute_force(const double* query) const {
  KSmallest best(config_.k);
  for (int i = 0; i < size_; ++i) {
    best.offer(squared_distance(query, points_.data() + static_cast<std::size_t>(i) * dim_, dim_));
  }
  return best.worst();
}

double NoveltyIndex::score(const State& x) const {
  if (size_ < config_.k) {
    throw InsufficientData("novelty: dataset has " + std::to_string(size_) +
                           " states, fewer than K=" + std::to_string(config_.k));
  }
  const State q = project(x);
  double d2 = 0.0;
  if (tree_) {
    KSmallest best(config_.k);
    tree_->search(0, q.data(), best);
    d2 = best.worst();
  } else {
    d2 = brute_force(q.data());
  }
  return std::sqrt(d2);
}

std::vector<double> NoveltyIndex::score_batch(const std::vector<State>& states) const {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& x : states) out.push_back(score(x));
  return out;
}

double score_sk(const State& x, const ExpertDataset& dataset, const NoveltyConfig& config) {
  NoveltyConfig brute = config;
  brute.backend = NoveltyBackend::kBruteForce;
  return NoveltyIndex(dataset, brute).score(x);
}

std::vector<double> score_batch(const std::vector<State>& states, const ExpertDataset& dataset,
                                const NoveltyConfig& config) {
  if (states.empty()) return {};
  return NoveltyIndex(dataset, config).score_batch(states);
}

NoveltyIndex rebuild_index(const ExpertDataset& dataset, const NoveltyConfig& config) {
  return NoveltyIndex(dataset, config);
}

}  // namespace crsail
