#include "sticky/monotone.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sticky/error.hpp"

namespace sticky {

WeightedSequence::WeightedSequence(std::vector<double> w, std::vector<double> v)
    : weights(std::move(w)), values(std::move(v)) {
  if (weights.size() != values.size()) {
    throw InvalidArgument("WeightedSequence: weights and values differ in length");
  }
  for (double x : weights) {
    if (!(x > 0.0) || !std::isfinite(x)) throw InvalidArgument("WeightedSequence: weights must be positive");
  }
}

double WeightedSequence::total_weight() const noexcept {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

double WeightedSequence::weighted_mean() const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) s += weights[i] * values[i];
  return s / total_weight();
}

PiecewiseLinear::PiecewiseLinear(std::vector<double> nodes, std::vector<double> values)
    : nodes_(std::move(nodes)), values_(std::move(values)) {
  if (nodes_.size() != values_.size()) throw InvalidArgument("PiecewiseLinear: length mismatch");
  if (nodes_.empty()) throw InvalidArgument("PiecewiseLinear: no nodes");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i] > nodes_[i - 1])) throw InvalidArgument("PiecewiseLinear: nodes must be strictly increasing");
  }
}

double PiecewiseLinear::operator()(double m) const {
  if (m <= nodes_.front()) return values_.front();
  if (m >= nodes_.back()) return values_.back();
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), m);
  const std::size_t i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  const double t = (m - nodes_[i]) / (nodes_[i + 1] - nodes_[i]);
  return values_[i] + t * (values_[i + 1] - values_[i]);
}

double PiecewiseLinear::slope(std::size_t i) const {
  if (i + 1 >= nodes_.size()) throw InvalidArgument("PiecewiseLinear::slope: index out of range");
  return (values_[i + 1] - values_[i]) / (nodes_[i + 1] - nodes_[i]);
}

std::vector<double> PiecewiseLinear::slopes() const {
  std::vector<double> s;
  if (nodes_.size() < 2) return s;
  s.reserve(nodes_.size() - 1);
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) s.push_back(slope(i));
  return s;
}

bool PiecewiseLinear::is_convex(double tol) const {
  const auto s = slopes();
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] < s[i - 1] - tol) return false;
  }
  return true;
}

namespace {

struct Block {
  double weight;
  double sum;
  std::size_t begin;
  std::size_t end;
  double mean() const { return sum / weight; }
};

std::vector<Block> pava_impl(std::span<const double> w, std::span<const double> v) {
  if (w.size() != v.size()) throw InvalidArgument("pava: weights and values differ in length");
  std::vector<Block> st;
  st.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    st.push_back({w[i], w[i] * v[i], i, i + 1});
    while (st.size() > 1 && st[st.size() - 2].mean() >= st.back().mean()) {
      Block b = st.back();
      st.pop_back();
      Block& a = st.back();
      a.weight += b.weight;
      a.sum += b.sum;
      a.end = b.end;
    }
  }
  return st;
}

}  // namespace

std::vector<double> pava(std::span<const double> weights, std::span<const double> values) {
  std::vector<double> out(values.size());
  for (const Block& b : pava_impl(weights, values)) {
    const double m = b.end - b.begin == 1 ? values[b.begin] : b.mean();
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(b.begin), out.begin() + static_cast<std::ptrdiff_t>(b.end), m);
  }
  return out;
}

std::vector<IndexRange> pava_blocks(std::span<const double> weights, std::span<const double> values) {
  std::vector<IndexRange> r;
  for (const Block& b : pava_impl(weights, values)) r.push_back({b.begin, b.end});
  return r;
}

WeightedSequence project_monotone(const WeightedSequence& ws) {
  WeightedSequence out;
  out.weights = ws.weights;
  out.values = pava(ws.weights, ws.values);
  return out;
}

std::vector<std::size_t> lower_convex_hull(const PiecewiseLinear& pl, double tol) {
  const auto x = pl.nodes();
  const auto y = pl.values();
  std::vector<std::size_t> h;
  h.reserve(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    while (h.size() >= 2) {
      const std::size_t a = h[h.size() - 2];
      const std::size_t b = h.back();
      const double chord = y[a] + (y[k] - y[a]) * (x[b] - x[a]) / (x[k] - x[a]);
      if (y[b] >= chord - tol) {
        h.pop_back();
      } else {
        break;
      }
    }
    h.push_back(k);
  }
  return h;
}

PiecewiseLinear lower_convex_envelope(const PiecewiseLinear& pl, double tol) {
  const auto x = pl.nodes();
  const auto y = pl.values();
  const auto h = lower_convex_hull(pl, tol);
  std::vector<double> out(x.size());
  for (std::size_t s = 0; s + 1 < h.size(); ++s) {
    const std::size_t a = h[s];
    const std::size_t b = h[s + 1];
    out[a] = y[a];
    const double slope = (y[b] - y[a]) / (x[b] - x[a]);
    for (std::size_t k = a + 1; k < b; ++k) out[k] = y[a] + slope * (x[k] - x[a]);
  }
  out[h.back()] = y[h.back()];
  return PiecewiseLinear(std::vector<double>(x.begin(), x.end()), std::move(out));
}

PiecewiseLinear cumulative_primitive(const WeightedSequence& ws) {
  std::vector<double> nodes(ws.size() + 1, 0.0);
  std::vector<double> vals(ws.size() + 1, 0.0);
  for (std::size_t i = 0; i < ws.size(); ++i) {
    nodes[i + 1] = nodes[i] + ws.weights[i];
    vals[i + 1] = vals[i] + ws.weights[i] * ws.values[i];
  }
  return PiecewiseLinear(std::move(nodes), std::move(vals));
}

void validate_partition(std::span<const IndexRange> blocks, std::size_t n) {
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const IndexRange& b = blocks[i];
    if (b.end <= b.begin) throw MalformedPartition("partition block " + std::to_string(i) + " is empty");
    if (b.end > n) throw MalformedPartition("partition block " + std::to_string(i) + " exceeds the sequence");
    if (i > 0 && b.begin < prev_end) {
      throw MalformedPartition("partition blocks overlap or are unordered at block " + std::to_string(i));
    }
    prev_end = b.end;
  }
}

WeightedSequence project_subspace_HX(const WeightedSequence& ws, std::span<const IndexRange> blocks) {
  validate_partition(blocks, ws.size());
  WeightedSequence out = ws;
  for (const IndexRange& b : blocks) {
    if (b.size() == 1) continue;
    double wsum = 0.0, s = 0.0;
    for (std::size_t i = b.begin; i < b.end; ++i) {
      wsum += ws.weights[i];
      s += ws.weights[i] * ws.values[i];
    }
    std::fill(out.values.begin() + static_cast<std::ptrdiff_t>(b.begin),
              out.values.begin() + static_cast<std::ptrdiff_t>(b.end), s / wsum);
  }
  return out;
}

WeightedSequence project_tangent_cone(const WeightedSequence& ws, std::span<const IndexRange> blocks) {
  validate_partition(blocks, ws.size());
  WeightedSequence out = ws;
  const std::span<const double> w(ws.weights);
  const std::span<const double> v(ws.values);
  for (const IndexRange& b : blocks) {
    const auto p = pava(w.subspan(b.begin, b.size()), v.subspan(b.begin, b.size()));
    std::copy(p.begin(), p.end(), out.values.begin() + static_cast<std::ptrdiff_t>(b.begin));
  }
  return out;
}

}  // namespace sticky
