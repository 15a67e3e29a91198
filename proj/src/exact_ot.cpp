#include "lotkit/exact_ot.hpp"

#include "lotkit/eot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace lotkit {
namespace {

// Primal network simplex on the complete bipartite transportation graph with
// an artificial root, following the spanning-tree bookkeeping (thread,
// rev_thread, succ_num, last_succ) of the classic LEMON implementation and
// Dantzig block-search pivoting. Arc e < n*k is source e / k -> sink e % k.
class TransportSimplex {
 public:
  TransportSimplex(const Vector& supply, const Vector& demand, std::vector<double> cost)
      : n_(static_cast<int>(supply.size())),
        k_(static_cast<int>(demand.size())),
        node_num_(n_ + k_),
        arc_num_(static_cast<std::int64_t>(n_) * k_),
        root_(node_num_),
        cost_(std::move(cost)) {
    const int nodes = node_num_ + 1;
    parent_.assign(nodes, -1);
    pred_.assign(nodes, -1);
    thread_.assign(nodes, 0);
    rev_thread_.assign(nodes, 0);
    succ_num_.assign(nodes, 0);
    last_succ_.assign(nodes, 0);
    pred_dir_.assign(nodes, 0);
    pi_.assign(nodes, 0.0);
    flow_.assign(static_cast<std::size_t>(arc_num_ + node_num_), 0.0);
    state_.assign(static_cast<std::size_t>(arc_num_ + node_num_), kLower);
    art_cost_.assign(node_num_, 0.0);
    art_source_.assign(node_num_, 0);
    art_target_.assign(node_num_, 0);

    double max_cost = 0.0;
    for (double c : cost_) max_cost = std::max(max_cost, c);
    const double art = (max_cost + 1.0) * node_num_;
    reduced_tol_ = 1e-11 * (max_cost + 1.0);

    parent_[root_] = -1;
    pred_[root_] = -1;
    thread_[root_] = 0;
    rev_thread_[0] = root_;
    succ_num_[root_] = node_num_ + 1;
    last_succ_[root_] = root_ - 1;
    pi_[root_] = 0.0;
    for (int u = 0; u < node_num_; ++u) {
      const std::int64_t e = arc_num_ + u;
      parent_[u] = root_;
      pred_[u] = e;
      thread_[u] = u + 1;
      rev_thread_[u + 1] = u;
      succ_num_[u] = 1;
      last_succ_[u] = u;
      state_[e] = kTree;
      const double s = u < n_ ? supply[u] : -demand[u - n_];
      if (s >= 0.0) {
        pred_dir_[u] = kUp;
        pi_[u] = 0.0;
        art_source_[u] = u;
        art_target_[u] = root_;
        flow_[e] = s;
        art_cost_[u] = 0.0;
      } else {
        pred_dir_[u] = kDown;
        pi_[u] = art;
        art_source_[u] = root_;
        art_target_[u] = u;
        flow_[e] = -s;
        art_cost_[u] = art;
      }
    }
    block_size_ = std::max<std::int64_t>(10, static_cast<std::int64_t>(std::sqrt(static_cast<double>(arc_num_))));
  }

  void run() {
    while (find_entering_arc()) {
      find_join_node();
      find_leaving_arc();
      change_flow();
      update_tree_structure();
      update_potential();
    }
  }

  double flow(int i, int j) const { return flow_[static_cast<std::size_t>(static_cast<std::int64_t>(i) * k_ + j)]; }

  double artificial_flow() const {
    double total = 0.0;
    for (int u = 0; u < node_num_; ++u) total += flow_[static_cast<std::size_t>(arc_num_ + u)];
    return total;
  }

  /// Most negative reduced cost over all real arcs (>= -tol at optimality).
  double min_reduced_cost() const {
    double best = 0.0;
    for (std::int64_t e = 0; e < arc_num_; ++e) best = std::min(best, reduced_cost(e));
    return best;
  }

 private:
  static constexpr std::int8_t kLower = 1;
  static constexpr std::int8_t kTree = 0;
  static constexpr int kUp = 1;
  static constexpr int kDown = -1;

  int source(std::int64_t e) const {
    return e < arc_num_ ? static_cast<int>(e / k_) : art_source_[static_cast<std::size_t>(e - arc_num_)];
  }
  int target(std::int64_t e) const {
    return e < arc_num_ ? n_ + static_cast<int>(e % k_) : art_target_[static_cast<std::size_t>(e - arc_num_)];
  }
  double cost(std::int64_t e) const {
    return e < arc_num_ ? cost_[static_cast<std::size_t>(e)] : art_cost_[static_cast<std::size_t>(e - arc_num_)];
  }
  double reduced_cost(std::int64_t e) const {
    return cost(e) + pi_[static_cast<std::size_t>(source(e))] - pi_[static_cast<std::size_t>(target(e))];
  }

  bool find_entering_arc() {
    double min = -reduced_tol_;
    std::int64_t cnt = block_size_;
    bool found = false;
    std::int64_t e = next_arc_;
    for (std::int64_t scanned = 0; scanned < arc_num_; ++scanned) {
      if (state_[static_cast<std::size_t>(e)] == kLower) {
        const double c = reduced_cost(e);
        if (c < min) {
          min = c;
          in_arc_ = e;
          found = true;
        }
      }
      if (++e == arc_num_) e = 0;
      if (--cnt == 0) {
        if (found) break;
        cnt = block_size_;
      }
    }
    next_arc_ = e;
    return found;
  }

  void find_join_node() {
    int u = source(in_arc_);
    int v = target(in_arc_);
    while (u != v) {
      if (succ_num_[u] < succ_num_[v]) {
        u = parent_[u];
      } else {
        v = parent_[v];
      }
    }
    join_ = u;
  }

  void find_leaving_arc() {
    const int first = source(in_arc_);
    const int second = target(in_arc_);
    const double inf = std::numeric_limits<double>::infinity();
    delta_ = inf;
    int result = 0;
    for (int u = first; u != join_; u = parent_[u]) {
      const double d = pred_dir_[u] == kUp ? flow_[static_cast<std::size_t>(pred_[u])] : inf;
      if (d < delta_) {
        delta_ = d;
        u_out_ = u;
        result = 1;
      }
    }
    for (int u = second; u != join_; u = parent_[u]) {
      const double d = pred_dir_[u] == kDown ? flow_[static_cast<std::size_t>(pred_[u])] : inf;
      if (d <= delta_) {
        delta_ = d;
        u_out_ = u;
        result = 2;
      }
    }
    if (result == 0) throw NumericalError("transport problem is unbounded");
    if (result == 1) {
      u_in_ = first;
      v_in_ = second;
    } else {
      u_in_ = second;
      v_in_ = first;
    }
  }

  void change_flow() {
    if (delta_ > 0.0) {
      const double val = delta_;
      flow_[static_cast<std::size_t>(in_arc_)] += val;
      for (int u = source(in_arc_); u != join_; u = parent_[u])
        flow_[static_cast<std::size_t>(pred_[u])] -= pred_dir_[u] * val;
      for (int u = target(in_arc_); u != join_; u = parent_[u])
        flow_[static_cast<std::size_t>(pred_[u])] += pred_dir_[u] * val;
    }
    state_[static_cast<std::size_t>(in_arc_)] = kTree;
    const auto leaving = static_cast<std::size_t>(pred_[u_out_]);
    state_[leaving] = kLower;
    flow_[leaving] = 0.0;
  }

  void update_tree_structure() {
    const int old_rev_thread = rev_thread_[u_out_];
    const int old_succ_num = succ_num_[u_out_];
    const int old_last_succ = last_succ_[u_out_];
    v_out_ = parent_[u_out_];

    if (u_in_ == u_out_) {
      parent_[u_in_] = v_in_;
      pred_[u_in_] = in_arc_;
      pred_dir_[u_in_] = u_in_ == source(in_arc_) ? kUp : kDown;
      if (thread_[v_in_] != u_out_) {
        int after = thread_[old_last_succ];
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
        after = thread_[v_in_];
        thread_[v_in_] = u_out_;
        rev_thread_[u_out_] = v_in_;
        thread_[old_last_succ] = after;
        rev_thread_[after] = old_last_succ;
      }
    } else {
      const int thread_continue = old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];
      int stem = u_in_;
      int par_stem = v_in_;
      int last = last_succ_[u_in_];
      int after = thread_[last];
      thread_[v_in_] = u_in_;
      dirty_revs_.clear();
      dirty_revs_.push_back(v_in_);
      while (stem != u_out_) {
        const int next_stem = parent_[stem];
        thread_[last] = next_stem;
        dirty_revs_.push_back(last);

        const int before = rev_thread_[stem];
        thread_[before] = after;
        rev_thread_[after] = before;

        parent_[stem] = par_stem;
        par_stem = stem;
        stem = next_stem;

        last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem] : last_succ_[stem];
        after = thread_[last];
      }
      parent_[u_out_] = par_stem;
      thread_[last] = thread_continue;
      rev_thread_[thread_continue] = last;
      last_succ_[u_out_] = last;

      if (old_rev_thread != v_in_) {
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
      }
      for (int u : dirty_revs_) rev_thread_[thread_[u]] = u;

      int tmp_sc = 0;
      const int tmp_ls = last_succ_[u_out_];
      for (int u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
        pred_[u] = pred_[p];
        pred_dir_[u] = -pred_dir_[p];
        tmp_sc += succ_num_[u] - succ_num_[p];
        succ_num_[u] = tmp_sc;
        last_succ_[p] = tmp_ls;
      }
      pred_[u_in_] = in_arc_;
      pred_dir_[u_in_] = u_in_ == source(in_arc_) ? kUp : kDown;
      succ_num_[u_in_] = old_succ_num;
    }

    const int up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
    const int last_succ_out = last_succ_[u_out_];
    for (int u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u]) last_succ_[u] = last_succ_out;

    if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
      for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
        last_succ_[u] = old_rev_thread;
    } else if (last_succ_out != old_last_succ) {
      for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
        last_succ_[u] = last_succ_out;
    }

    for (int u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
    for (int u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
  }

  void update_potential() {
    const double sigma = pi_[v_in_] - pi_[u_in_] - pred_dir_[u_in_] * cost(in_arc_);
    const int end = thread_[last_succ_[u_in_]];
    for (int u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
  }

  int n_;
  int k_;
  int node_num_;
  std::int64_t arc_num_;
  int root_;
  std::vector<double> cost_;
  std::vector<int> parent_, pred_dir_, thread_, rev_thread_, succ_num_, last_succ_;
  std::vector<std::int64_t> pred_;
  std::vector<double> pi_;
  std::vector<double> flow_;
  std::vector<std::int8_t> state_;
  std::vector<double> art_cost_;
  std::vector<int> art_source_, art_target_;
  std::vector<int> dirty_revs_;
  double reduced_tol_ = 0.0;
  std::int64_t block_size_ = 10;
  std::int64_t next_arc_ = 0;

  std::int64_t in_arc_ = 0;
  int join_ = 0, u_in_ = 0, v_in_ = 0, u_out_ = 0, v_out_ = 0;
  double delta_ = 0.0;
};

struct SortedAtoms {
  std::vector<double> x;
  std::vector<double> cdf;
};

SortedAtoms sorted_atoms(const DiscreteMeasure& m) {
  require(m.dim() == 1, "quantile operations need one-dimensional measures");
  require(m.size() >= 1, "empty measure");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(m.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return m.support()(a, 0) < m.support()(b, 0); });
  SortedAtoms out;
  double acc = 0.0;
  for (auto i : idx) {
    acc += m.weights()[i];
    const double xi = m.support()(i, 0);
    if (!out.x.empty() && out.x.back() == xi) {
      out.cdf.back() = acc;
    } else {
      out.x.push_back(xi);
      out.cdf.push_back(acc);
    }
  }
  return out;
}

constexpr double kCdfSlack = 1e-12;

}  // namespace

double quantile_map_1d(const DiscreteMeasure& source, const DiscreteMeasure& target, double x) {
  const SortedAtoms s = sorted_atoms(source);
  const SortedAtoms t = sorted_atoms(target);
  // right-continuous CDF of the source at x
  const auto it = std::upper_bound(s.x.begin(), s.x.end(), x);
  const double q = it == s.x.begin() ? 0.0 : s.cdf[static_cast<std::size_t>(it - s.x.begin() - 1)];
  // left-continuous inverse: smallest atom whose CDF reaches q
  for (std::size_t j = 0; j < t.x.size(); ++j)
    if (t.cdf[j] >= q - kCdfSlack) return t.x[j];
  return t.x.back();
}

double quantile_w2_squared_1d(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  const SortedAtoms sa = sorted_atoms(a);
  const SortedAtoms sb = sorted_atoms(b);
  double total = 0.0;
  double prev = 0.0;
  std::size_t i = 0, j = 0;
  while (i < sa.x.size() && j < sb.x.size()) {
    const double next = std::min(sa.cdf[i], sb.cdf[j]);
    const double diff = sa.x[i] - sb.x[j];
    total += std::max(0.0, next - prev) * diff * diff;
    prev = next;
    if (sa.cdf[i] <= next) ++i;
    if (sb.cdf[j] <= next) ++j;
  }
  return total;
}

ExactOtResult discrete_w2(const DiscreteMeasure& source, const DiscreteMeasure& target) {
  require(source.dim() == target.dim(), "source and target live in different dimensions");
  const double arcs = static_cast<double>(source.size()) * static_cast<double>(target.size());
  if (arcs > kExactBudget)
    throw InvalidArgument("exact OT budget exceeded (" + format_double(arcs) +
                          " arcs); use the entropic solver instead");
  const auto n = source.size();
  const auto k = target.size();
  const Matrix half = half_squared_cost(source.support(), target.support());
  std::vector<double> cost(static_cast<std::size_t>(n * k));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < k; ++j) cost[static_cast<std::size_t>(i * k + j)] = 2.0 * half(i, j);

  TransportSimplex solver(source.weights(), target.weights(), std::move(cost));
  solver.run();
  if (solver.artificial_flow() > 1e-9)
    throw NumericalError("exact OT left unmatched mass " + format_double(solver.artificial_flow()));

  ExactOtResult out;
  out.plan.plan.resize(n, k);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const double f = std::max(0.0, solver.flow(static_cast<int>(i), static_cast<int>(j)));
      out.plan.plan(i, j) = f;
      total += f * 2.0 * half(i, j);
    }
  }
  out.plan.cost = total;
  out.w2 = std::sqrt(std::max(0.0, total));
  return out;
}

MapOnSample barycentric_projection(const TransportPlan& plan, const DiscreteMeasure& source,
                                   const DiscreteMeasure& target) {
  require(plan.plan.rows() == source.size() && plan.plan.cols() == target.size(),
          "plan shape does not match the measures");
  const Vector row_mass = plan.plan.rowwise().sum();
  for (Eigen::Index i = 0; i < row_mass.size(); ++i)
    if (!(row_mass[i] > 0.0)) throw NumericalError("unmatched source atom");
  PointMatrix images = row_mass.cwiseInverse().asDiagonal() * (plan.plan * target.support());
  return MapOnSample(std::make_shared<const PointMatrix>(source.support()),
                     std::make_shared<const Vector>(source.weights()), std::move(images));
}

}  // namespace lotkit
