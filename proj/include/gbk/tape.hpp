#pragma once

#include <cstdint>
#include <vector>

#include "gbk/tensor.hpp"

namespace gbk {

/// Handle to a node on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode differentiation record over dense Tensors.
///
/// Every primitive appends one node; backward() walks the record in exact
/// reverse order and accumulates adjoints additively, so an input feeding
/// several ops receives the sum of its contributions. A Tape is single-writer:
/// one forward/backward pass owns it. Replays with identical inputs are
/// bit-identical (no threading, fixed iteration order, no stdlib
/// distributions).
///
/// neighbor_mean stores a pointer to the caller's neighbor index; the graph
/// must outlive the tape.
class Tape {
 public:
  /// Registers a leaf. Gradients are accumulated for every leaf; callers
  /// read the ones they care about.
  Var input(Tensor value);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var scale(Var a, double factor);
  Var mul(Var a, Var b);
  /// rows(a) + bias, bias is 1 x cols(a).
  Var add_bias_row(Var a, Var bias);
  Var relu(Var a);
  Var sigmoid(Var a);
  Var concat_cols(Var a, Var b);
  /// out[r] = a[rows[r]]; backward scatter-adds.
  Var gather_rows(Var a, std::vector<int> rows);

  /// Per-node mean of (optionally weighted) neighbor rows:
  ///   out[i] = (self_i + sum_{j in N(i)} w_ij * z[j]) / (|N(i)| + s)
  /// where s = 1 and self_i = z[i] when include_self, else s = 0 and
  /// self_i = 0. Nodes with empty N(i) and no self term get a zero row.
  /// Weights, when given, align one-to-one with the flattened directed edge
  /// enumeration (i ascending, neighbors in stored order) as an e x 1 tensor.
  Var neighbor_mean(Var z, const std::vector<std::vector<int>>& neighbor_index,
                    Var edge_weights = {}, bool include_self = false);

  /// Mean over masked rows of -log softmax(logits)[label]. Row-max subtraction
  /// keeps the exponentials in range. Scalar (1x1) output.
  Var softmax_cross_entropy(Var logits, std::vector<int> labels,
                            std::vector<int> mask);

  /// Mean of -[t ln p + (1-t) ln(1-p)] over an e x 1 probability column.
  /// Probabilities are clamped to [1e-7, 1 - 1e-7]; clamped coordinates get a
  /// zero adjoint. Scalar output.
  Var binary_cross_entropy(Var probs, std::vector<double> targets);

  /// Seeds d(loss)/d(loss) = 1 and accumulates adjoints for every node.
  /// loss must be 1x1.
  void backward(Var loss);

  const Tensor& value(Var v) const;
  /// Adjoint of v from the last backward() call.
  const Tensor& grad(Var v) const;

  int size() const { return static_cast<int>(nodes_.size()); }

  static constexpr double kBceEps = 1e-7;

 private:
  enum class Op {
    kInput,
    kMatMul,
    kAdd,
    kScale,
    kMul,
    kAddBiasRow,
    kRelu,
    kSigmoid,
    kConcatCols,
    kGatherRows,
    kNeighborMean,
    kSoftmaxCrossEntropy,
    kBinaryCrossEntropy,
  };

  struct Node {
    Op op;
    int a = -1;
    int b = -1;
    double factor = 0.0;
    std::vector<int> index_aux;    // gather rows / labels
    std::vector<int> mask_aux;     // softmax CE mask
    std::vector<double> real_aux;  // BCE targets
    const std::vector<std::vector<int>>* neighbors = nullptr;
    bool include_self = false;
    Tensor saved;  // op-specific forward state reused in backward
  };

  static Node basic(Op op, int a = -1, int b = -1, double factor = 0.0) {
    Node n;
    n.op = op;
    n.a = a;
    n.b = b;
    n.factor = factor;
    return n;
  }
  Var push(Node node, Tensor value);
  const Tensor& val(int id) const { return values_[static_cast<std::size_t>(id)]; }
  void check(Var v) const;

  std::vector<Node> nodes_;
  std::vector<Tensor> values_;
  std::vector<Tensor> grads_;
  bool has_grads_ = false;
};

}  // namespace gbk
