#include "gbk/tape.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gbk {

namespace {

using EigenRowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<EigenRowMat>;
using ConstMapMat = Eigen::Map<const EigenRowMat>;

ConstMapMat map(const Tensor& t) { return {t.data.data(), t.rows, t.cols}; }
MapMat map(Tensor& t) { return {t.data.data(), t.rows, t.cols}; }

}  // namespace

bool all_finite(const Tensor& t) {
  for (double v : t.data)
    if (!std::isfinite(v)) return false;
  return true;
}

void Tape::check(Var v) const {
  if (!v.valid() || v.id >= static_cast<int>(nodes_.size()))
    throw std::invalid_argument("Tape: invalid Var handle");
}

Var Tape::push(Node node, Tensor value) {
  nodes_.push_back(std::move(node));
  values_.push_back(std::move(value));
  has_grads_ = false;
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::input(Tensor value) {
  return push(basic(Op::kInput), std::move(value));
}

Var Tape::matmul(Var a, Var b) {
  check(a);
  check(b);
  const Tensor& ta = val(a.id);
  const Tensor& tb = val(b.id);
  if (ta.cols != tb.rows)
    throw std::invalid_argument("matmul: inner dimensions disagree, " +
                                ta.shape_str() + " * " + tb.shape_str());
  Tensor out(ta.rows, tb.cols);
  map(out).noalias() = map(ta) * map(tb);
  return push(basic(Op::kMatMul, a.id, b.id), std::move(out));
}

Var Tape::add(Var a, Var b) {
  check(a);
  check(b);
  const Tensor& ta = val(a.id);
  const Tensor& tb = val(b.id);
  if (!ta.same_shape(tb))
    throw std::invalid_argument("add: shape mismatch, " + ta.shape_str() +
                                " vs " + tb.shape_str());
  Tensor out(ta.rows, ta.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = ta.data[i] + tb.data[i];
  return push(basic(Op::kAdd, a.id, b.id), std::move(out));
}

Var Tape::scale(Var a, double factor) {
  check(a);
  const Tensor& ta = val(a.id);
  Tensor out(ta.rows, ta.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = factor * ta.data[i];
  return push(basic(Op::kScale, a.id, -1, factor), std::move(out));
}

Var Tape::mul(Var a, Var b) {
  check(a);
  check(b);
  const Tensor& ta = val(a.id);
  const Tensor& tb = val(b.id);
  if (!ta.same_shape(tb))
    throw std::invalid_argument("mul: shape mismatch, " + ta.shape_str() +
                                " vs " + tb.shape_str());
  Tensor out(ta.rows, ta.cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = ta.data[i] * tb.data[i];
  return push(basic(Op::kMul, a.id, b.id), std::move(out));
}

Var Tape::add_bias_row(Var a, Var bias) {
  check(a);
  check(bias);
  const Tensor& ta = val(a.id);
  const Tensor& tb = val(bias.id);
  if (tb.rows != 1 || tb.cols != ta.cols)
    throw std::invalid_argument("add_bias_row: bias must be 1x" +
                                std::to_string(ta.cols) + ", got " +
                                tb.shape_str());
  Tensor out(ta.rows, ta.cols);
  for (int r = 0; r < ta.rows; ++r)
    for (int c = 0; c < ta.cols; ++c) out.at(r, c) = ta.at(r, c) + tb.at(0, c);
  return push(basic(Op::kAddBiasRow, a.id, bias.id), std::move(out));
}

Var Tape::relu(Var a) {
  check(a);
  const Tensor& ta = val(a.id);
  Tensor out(ta.rows, ta.cols);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data[i] = ta.data[i] > 0.0 ? ta.data[i] : 0.0;
  return push(basic(Op::kRelu, a.id), std::move(out));
}

Var Tape::sigmoid(Var a) {
  check(a);
  const Tensor& ta = val(a.id);
  // saturate to the nearest representable values inside (0,1); the raw result
  // rounds to exactly 0.0 or 1.0 for |x| beyond ~37 where the derivative is
  // already below machine epsilon
  static const double kCeil = std::nextafter(1.0, 0.0);
  static constexpr double kFloor = std::numeric_limits<double>::min();
  Tensor out(ta.rows, ta.cols);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = ta.data[i];
    // branch on sign so exp never overflows
    const double s = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                              : std::exp(x) / (1.0 + std::exp(x));
    out.data[i] = std::min(kCeil, std::max(kFloor, s));
  }
  return push(basic(Op::kSigmoid, a.id), std::move(out));
}

Var Tape::concat_cols(Var a, Var b) {
  check(a);
  check(b);
  const Tensor& ta = val(a.id);
  const Tensor& tb = val(b.id);
  if (ta.rows != tb.rows)
    throw std::invalid_argument("concat_cols: row counts differ, " +
                                ta.shape_str() + " vs " + tb.shape_str());
  Tensor out(ta.rows, ta.cols + tb.cols);
  for (int r = 0; r < ta.rows; ++r) {
    for (int c = 0; c < ta.cols; ++c) out.at(r, c) = ta.at(r, c);
    for (int c = 0; c < tb.cols; ++c) out.at(r, ta.cols + c) = tb.at(r, c);
  }
  return push(basic(Op::kConcatCols, a.id, b.id), std::move(out));
}

Var Tape::gather_rows(Var a, std::vector<int> rows) {
  check(a);
  const Tensor& ta = val(a.id);
  for (int r : rows)
    if (r < 0 || r >= ta.rows)
      throw std::invalid_argument("gather_rows: row " + std::to_string(r) +
                                  " out of range for " + ta.shape_str());
  Tensor out(static_cast<int>(rows.size()), ta.cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int c = 0; c < ta.cols; ++c)
      out.at(static_cast<int>(i), c) = ta.at(rows[i], c);
  Node node = basic(Op::kGatherRows, a.id);
  node.index_aux = std::move(rows);
  return push(std::move(node), std::move(out));
}

Var Tape::neighbor_mean(Var z, const std::vector<std::vector<int>>& neighbor_index,
                        Var edge_weights, bool include_self) {
  check(z);
  const Tensor& tz = val(z.id);
  if (static_cast<int>(neighbor_index.size()) != tz.rows)
    throw std::invalid_argument("neighbor_mean: index size != rows of z");
  std::size_t num_edges = 0;
  for (const auto& nbrs : neighbor_index) num_edges += nbrs.size();
  if (edge_weights.valid()) {
    check(edge_weights);
    const Tensor& tw = val(edge_weights.id);
    if (tw.cols != 1 || static_cast<std::size_t>(tw.rows) != num_edges)
      throw std::invalid_argument(
          "neighbor_mean: weights must be " + std::to_string(num_edges) +
          "x1, got " + tw.shape_str());
  }
  const Tensor* tw = edge_weights.valid() ? &val(edge_weights.id) : nullptr;
  Tensor out(tz.rows, tz.cols);
  std::size_t pos = 0;
  for (int i = 0; i < tz.rows; ++i) {
    const auto& nbrs = neighbor_index[static_cast<std::size_t>(i)];
    const double denom = static_cast<double>(nbrs.size()) + (include_self ? 1.0 : 0.0);
    if (denom == 0.0) {
      pos += nbrs.size();
      continue;  // isolated node, zero row
    }
    if (include_self)
      for (int c = 0; c < tz.cols; ++c) out.at(i, c) += tz.at(i, c);
    for (int j : nbrs) {
      const double w = tw ? tw->data[pos] : 1.0;
      for (int c = 0; c < tz.cols; ++c) out.at(i, c) += w * tz.at(j, c);
      ++pos;
    }
    for (int c = 0; c < tz.cols; ++c) out.at(i, c) /= denom;
  }
  Node node = basic(Op::kNeighborMean, z.id, edge_weights.valid() ? edge_weights.id : -1);
  node.neighbors = &neighbor_index;
  node.include_self = include_self;
  return push(std::move(node), std::move(out));
}

Var Tape::softmax_cross_entropy(Var logits, std::vector<int> labels,
                                std::vector<int> mask) {
  check(logits);
  const Tensor& tl = val(logits.id);
  if (static_cast<int>(labels.size()) != tl.rows)
    throw std::invalid_argument("softmax_cross_entropy: labels size != rows");
  if (mask.empty())
    throw std::invalid_argument("softmax_cross_entropy: empty mask");
  for (int r : mask)
    if (r < 0 || r >= tl.rows)
      throw std::invalid_argument("softmax_cross_entropy: mask row out of range");

  Tensor probs(tl.rows, tl.cols);  // masked rows only, zeros elsewhere
  double loss = 0.0;
  for (int r : mask) {
    double row_max = tl.at(r, 0);
    for (int c = 1; c < tl.cols; ++c) row_max = std::max(row_max, tl.at(r, c));
    double denom = 0.0;
    for (int c = 0; c < tl.cols; ++c) denom += std::exp(tl.at(r, c) - row_max);
    for (int c = 0; c < tl.cols; ++c)
      probs.at(r, c) = std::exp(tl.at(r, c) - row_max) / denom;
    const int y = labels[static_cast<std::size_t>(r)];
    if (y < 0 || y >= tl.cols)
      throw std::invalid_argument("softmax_cross_entropy: label out of range");
    loss += std::log(denom) - (tl.at(r, y) - row_max);
  }
  loss /= static_cast<double>(mask.size());

  Node node = basic(Op::kSoftmaxCrossEntropy, logits.id);
  node.index_aux = std::move(labels);
  node.mask_aux = std::move(mask);
  node.saved = std::move(probs);
  return push(std::move(node), Tensor(1, 1, {loss}));
}

Var Tape::binary_cross_entropy(Var probs, std::vector<double> targets) {
  check(probs);
  const Tensor& tp = val(probs.id);
  if (tp.cols != 1)
    throw std::invalid_argument("binary_cross_entropy: probs must be e x 1");
  if (targets.empty() || tp.rows == 0)
    throw std::invalid_argument("binary_cross_entropy: empty target list");
  if (static_cast<int>(targets.size()) != tp.rows)
    throw std::invalid_argument("binary_cross_entropy: targets size != rows");

  Tensor clamped(tp.rows, 1);
  double loss = 0.0;
  for (int r = 0; r < tp.rows; ++r) {
    const double p = tp.at(r, 0);
    const double q = std::min(1.0 - kBceEps, std::max(kBceEps, p));
    clamped.at(r, 0) = q;
    const double t = targets[static_cast<std::size_t>(r)];
    loss += -(t * std::log(q) + (1.0 - t) * std::log(1.0 - q));
  }
  loss /= static_cast<double>(tp.rows);

  Node node = basic(Op::kBinaryCrossEntropy, probs.id);
  node.real_aux = std::move(targets);
  node.saved = std::move(clamped);
  return push(std::move(node), Tensor(1, 1, {loss}));
}

const Tensor& Tape::value(Var v) const {
  check(v);
  return values_[static_cast<std::size_t>(v.id)];
}

const Tensor& Tape::grad(Var v) const {
  check(v);
  if (!has_grads_) throw std::logic_error("Tape: backward() has not run");
  return grads_[static_cast<std::size_t>(v.id)];
}

void Tape::backward(Var loss) {
  check(loss);
  const Tensor& tl = val(loss.id);
  if (tl.rows != 1 || tl.cols != 1)
    throw std::invalid_argument("backward: loss must be 1x1, got " + tl.shape_str());

  grads_.clear();
  grads_.reserve(nodes_.size());
  for (const Tensor& v : values_) grads_.emplace_back(v.rows, v.cols);
  grads_[static_cast<std::size_t>(loss.id)].at(0, 0) = 1.0;

  for (int id = loss.id; id >= 0; --id) {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    const Tensor& g = grads_[static_cast<std::size_t>(id)];
    switch (n.op) {
      case Op::kInput:
        break;
      case Op::kMatMul: {
        Tensor& ga = grads_[static_cast<std::size_t>(n.a)];
        Tensor& gb = grads_[static_cast<std::size_t>(n.b)];
        map(ga).noalias() += map(g) * map(val(n.b)).transpose();
        map(gb).noalias() += map(val(n.a)).transpose() * map(g);
        break;
      }
      case Op::kAdd: {
        Tensor& ga = grads_[static_cast<std::size_t>(n.a)];
        Tensor& gb = grads_[static_cast<std::size_t>(n.b)];
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga.data[i] += g.data[i];
          gb.data[i] += g.data[i];
        }
        break;
      }
      case Op::kScale: {
        Tensor& ga = grads_[static_cast<std::size_t>(n.a)];
        for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += n.factor * g.data[i];
        break;
      }
      case Op::kMul: {
        Tensor& ga = grads_[static_cast<std::size_t>(n.a)];
        Tensor& gb = grads_[static_cast<std::size_t>(n.b)];
        const Tensor& va = val(n.a);
        const Tensor& vb = val(n.b);
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga.data[i] += g.data[i] * vb.data[i];
          gb.data[i] += g.data[i] * va.data[i];
        }
        break;
      }
      case Op::kAddBiasRow: {
        Tensor& ga = grads_[static_cast<std::size_t>(n.a)];
        Tensor& gb = grads_[static_cast<std::size_t>(n.b)];
        for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
        for (int r = 0; r < g.rows; ++r)
          for (int c = 0; c < g.cols; ++c) gb.at(0, c) += g.at(r, c);
        break;
      }
      case Op::kRelu: {
        Tensor& ga = grads_[static_cast<std::size_t>(n.a)];
        const Tensor& out = val(id);
        for (std::size_t i = 0; i < g.size(); ++i)
          if (out.data[i] > 0.0) ga.data[i] += g.data[i];
        break;
      }
      case Op::kSigmoid: {
        Tensor& ga = grads_[static_cast<std::size_t>(n.a)];
        const Tensor& out = val(id);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double s = out.data[i];
          ga.data[i] += g.data[i] * s * (1.0 - s);
        }
        break;
      }
      case Op::kConcatCols: {
        Tensor& ga = grads_[static_cast<std::size_t>(n.a)];
        Tensor& gb = grads_[static_cast<std::size_t>(n.b)];
        for (int r = 0; r < g.rows; ++r) {
          for (int c = 0; c < ga.cols; ++c) ga.at(r, c) += g.at(r, c);
          for (int c = 0; c < gb.cols; ++c) gb.at(r, c) += g.at(r, ga.cols + c);
        }
        break;
      }
      case Op::kGatherRows: {
        Tensor& ga = grads_[static_cast<std::size_t>(n.a)];
        for (std::size_t i = 0; i < n.index_aux.size(); ++i)
          for (int c = 0; c < g.cols; ++c)
            ga.at(n.index_aux[i], c) += g.at(static_cast<int>(i), c);
        break;
      }
      case Op::kNeighborMean: {
        Tensor& gz = grads_[static_cast<std::size_t>(n.a)];
        Tensor* gw = n.b >= 0 ? &grads_[static_cast<std::size_t>(n.b)] : nullptr;
        const Tensor& vz = val(n.a);
        const Tensor* vw = n.b >= 0 ? &val(n.b) : nullptr;
        std::size_t pos = 0;
        for (int i = 0; i < vz.rows; ++i) {
          const auto& nbrs = (*n.neighbors)[static_cast<std::size_t>(i)];
          const double denom =
              static_cast<double>(nbrs.size()) + (n.include_self ? 1.0 : 0.0);
          if (denom == 0.0) {
            pos += nbrs.size();
            continue;
          }
          if (n.include_self)
            for (int c = 0; c < vz.cols; ++c) gz.at(i, c) += g.at(i, c) / denom;
          for (int j : nbrs) {
            const double w = vw ? vw->data[pos] : 1.0;
            double dot = 0.0;
            for (int c = 0; c < vz.cols; ++c) {
              gz.at(j, c) += w * g.at(i, c) / denom;
              dot += vz.at(j, c) * g.at(i, c);
            }
            if (gw) gw->data[pos] += dot / denom;
            ++pos;
          }
        }
        break;
      }
      case Op::kSoftmaxCrossEntropy: {
        Tensor& ga = grads_[static_cast<std::size_t>(n.a)];
        const double scale = g.at(0, 0) / static_cast<double>(n.mask_aux.size());
        for (int r : n.mask_aux) {
          const int y = n.index_aux[static_cast<std::size_t>(r)];
          for (int c = 0; c < ga.cols; ++c) {
            const double indicator = c == y ? 1.0 : 0.0;
            ga.at(r, c) += scale * (n.saved.at(r, c) - indicator);
          }
        }
        break;
      }
      case Op::kBinaryCrossEntropy: {
        Tensor& ga = grads_[static_cast<std::size_t>(n.a)];
        const Tensor& vp = val(n.a);
        const double scale = g.at(0, 0) / static_cast<double>(vp.rows);
        for (int r = 0; r < vp.rows; ++r) {
          const double p = vp.at(r, 0);
          if (p < kBceEps || p > 1.0 - kBceEps) continue;  // clamp is flat
          const double q = n.saved.at(r, 0);
          const double t = n.real_aux[static_cast<std::size_t>(r)];
          ga.at(r, 0) += scale * (q - t) / (q * (1.0 - q));
        }
        break;
      }
    }
  }
  has_grads_ = true;
}

}  // namespace gbk
