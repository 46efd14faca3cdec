#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gbk/graph.hpp"
#include "gbk/tape.hpp"
#include "gbk/tensor.hpp"

namespace gbk {

enum class LayerKind { kDense, kGcn, kSage, kGbk };
enum class Activation { kRelu, kIdentity };

struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  int in_dim = 0;
  int out_dim = 0;
  Activation activation = Activation::kRelu;
  int gate_hidden_dim = 16;  // gbk only
};

/// Parameter tensors for one layer; the populated subset depends on the kind.
///   dense, gcn:  W, bias
///   sage:        W_f (self), W_s (neighbor), bias
///   gbk:         W_f, W_s, W_d, gate MLP (W_g1 2h x gh, b_g1, W_g2 gh x 1,
///                b_g2), bias
struct LayerParams {
  Tensor W;
  Tensor W_f, W_s, W_d;
  Tensor W_g1, b_g1, W_g2, b_g2;
  Tensor bias;
};

struct ModelParams {
  std::vector<LayerSpec> specs;
  std::vector<LayerParams> layers;
  std::uint64_t seed = 0;
};

/// Named view over every present parameter tensor, in a fixed order shared by
/// the optimizer, the checkpoint format, and the tape binding. `decay` marks
/// weight matrices (biases are excluded from weight decay).
struct ParamRef {
  std::string name;
  Tensor* tensor;
  bool decay;
};
std::vector<ParamRef> param_refs(ModelParams& params);

LayerKind layer_kind_from_string(const std::string& s);
std::string to_string(LayerKind k);

/// Stacks (num_layers - 1) hidden layers of width `hidden` with relu plus a
/// final identity layer emitting num_classes logits.
std::vector<LayerSpec> make_model_specs(LayerKind kind, int in_dim, int hidden,
                                        int num_classes, int num_layers,
                                        int gate_hidden = 16);

/// Glorot-uniform matrices (bound sqrt(6/(fan_in+fan_out))), zero biases,
/// deterministic per seed.
ModelParams init_params(const std::vector<LayerSpec>& specs, std::uint64_t seed);

/// Tape handles for one layer's parameters.
struct BoundLayer {
  Var W, W_f, W_s, W_d, W_g1, b_g1, W_g2, b_g2, bias;
};
struct BoundModel {
  std::vector<BoundLayer> layers;
  std::vector<Var> flat;  // same order as param_refs
};
BoundModel bind_params(Tape& tape, const ModelParams& params);

/// Gate selection behavior. kOracle substitutes the label indicator
/// 1(y_i = y_j) for the learned score; analysis and property tests only.
enum class GateMode { kLearned, kOracle };

/// Per-edge gate scores for every stored directed edge, as an e x 1 column in
/// (0,1): sigmoid of a dense-relu-dense map of the concatenated endpoint
/// rows [z_i || z_j]. The first dense layer is evaluated in split form
/// (z W_g1_top + z W_g1_bottom gathered per edge), which is the same map
/// without materializing the e x 2h concatenation.
Var gate_scores(Tape& tape, const BoundLayer& layer, Var z, const Graph& g);

struct GbkLayerOut {
  Var z;
  Var alpha;  // e x 1
};

/// z_i = act(W_f z_i + (1/|N(i)|) sum_j [a_ij W_s z_j + (1-a_ij) W_d z_j] + bias).
GbkLayerOut gbk_layer_forward(Tape& tape, const BoundLayer& layer,
                              const LayerSpec& spec, Var z, const Graph& g,
                              GateMode mode = GateMode::kLearned);

/// act(rowwise mean over {i} u N(i) of (z W) + bias), i.e. the row-normalized
/// adjacency with self-loop applied to z W.
Var gcn_layer_forward(Tape& tape, const BoundLayer& layer, const LayerSpec& spec,
                      Var z, const Graph& g);

/// act(W_f z_i + W_s mean_{j in N(i)} z_j + bias); isolated nodes keep only
/// the self term.
Var sage_layer_forward(Tape& tape, const BoundLayer& layer, const LayerSpec& spec,
                       Var z, const Graph& g);

Var dense_layer_forward(Tape& tape, const BoundLayer& layer, const LayerSpec& spec,
                        Var z);

/// Validates the dimension chain: non-empty, in/out dims link up, inputs match
/// feature_dim, final out_dim = num_classes, final activation identity.
void validate_specs(const std::vector<LayerSpec>& specs, int feature_dim,
                    int num_classes);

struct ForwardResult {
  Var logits;
  Var final_hidden;         // input of the last layer (pre-logit representations)
  std::vector<Var> alphas;  // one e x 1 entry per gbk layer
};

ForwardResult model_forward(Tape& tape, const BoundModel& bound,
                            const ModelParams& params, const Graph& g,
                            Var features, GateMode mode = GateMode::kLearned);

/// Checkpoint round trip: JSON document holding the seed, the layer specs and
/// every named tensor. Doubles survive bit-exactly.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& file);
ModelParams load_checkpoint(const std::filesystem::path& file);

}  // namespace gbk
